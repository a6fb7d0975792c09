#pragma once

#include <functional>
#include <map>
#include <string>

#include "wcmkg/lstm.hpp"

namespace wcmkg {

/// Outcome of comparing analytic gradients against central finite
/// differences. Parameters whose analytic and numeric gradients are both
/// below the absolute floor are compared absolutely instead of relatively.
struct GradientReport {
  double max_rel_error = 0.0;
  std::map<std::string, double> per_parameter;  ///< block name -> worst error
};

/// Central differences (f(t+h) - f(t-h)) / 2h for every scalar in `params`,
/// compared against `analytic`. `loss` must be a pure function of the
/// parameters.
GradientReport finite_difference_gradients(
    const LstmParams& params,
    const std::function<double(const LstmParams&)>& loss,
    const LstmParams& analytic, double h, double abs_floor = 1e-12);

}  // namespace wcmkg
