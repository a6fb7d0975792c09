#pragma once

#include <functional>
#include <vector>

namespace wcmkg {

struct NelderMeadOptions {
  double tolerance = 1e-10;  ///< stop when max vertex spread (x and f) drops below
  int max_iterations = 5000;
  double initial_step = 0.5;  ///< offset applied per coordinate to build the simplex
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Downhill simplex minimization of an n-dimensional function. Deterministic:
/// no internal randomness, ties broken by index order.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> initial, const NelderMeadOptions& options = {});

}  // namespace wcmkg
