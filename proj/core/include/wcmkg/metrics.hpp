#pragma once

#include <optional>
#include <span>

namespace wcmkg {

/// Evaluation summary for one method on one set of prediction/observation
/// pairs. pearson_r is absent when either array is constant or n < 2.
struct MetricSet {
  double rmse = 0.0;
  std::optional<double> pearson_r;
  double bias = 0.0;  ///< mean(pred - obs)
  int n = 0;
};

double rmse(std::span<const double> pred, std::span<const double> obs);

/// Sample Pearson correlation; throws DegenerateInput on constant input.
double pearson_r(std::span<const double> pred, std::span<const double> obs);

double bias(std::span<const double> pred, std::span<const double> obs);

/// All three metrics; a degenerate Pearson is reported missing, not zero.
MetricSet compute_metrics(std::span<const double> pred,
                          std::span<const double> obs);

}  // namespace wcmkg
