#include "wcmkg/metrics.hpp"

#include <cmath>
#include <string>

#include "wcmkg/errors.hpp"

namespace wcmkg {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> obs,
                   const char* who) {
  if (pred.empty()) throw EmptyInput(std::string(who) + ": empty input");
  if (pred.size() != obs.size()) {
    throw DimensionMismatch(std::string(who) + ": length mismatch " +
                            std::to_string(pred.size()) + " vs " +
                            std::to_string(obs.size()));
  }
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> obs) {
  check_lengths(pred, obs, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - obs[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double pearson_r(std::span<const double> pred, std::span<const double> obs) {
  check_lengths(pred, obs, "pearson_r");
  const std::size_t n = pred.size();
  if (n < 2) throw DegenerateInput("pearson_r: need at least 2 samples");

  double mean_p = 0.0, mean_o = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_p += pred[i];
    mean_o += obs[i];
  }
  mean_p /= static_cast<double>(n);
  mean_o /= static_cast<double>(n);

  double spp = 0.0, soo = 0.0, spo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mean_p;
    const double dob = obs[i] - mean_o;
    spp += dp * dp;
    soo += dob * dob;
    spo += dp * dob;
  }
  if (spp == 0.0 || soo == 0.0) {
    throw DegenerateInput("pearson_r: constant input array");
  }
  const double r = spo / std::sqrt(spp * soo);
  // Guard against round-off pushing |r| a hair over 1.
  return std::max(-1.0, std::min(1.0, r));
}

double bias(std::span<const double> pred, std::span<const double> obs) {
  check_lengths(pred, obs, "bias");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += pred[i] - obs[i];
  return sum / static_cast<double>(pred.size());
}

MetricSet compute_metrics(std::span<const double> pred,
                          std::span<const double> obs) {
  MetricSet m;
  m.rmse = rmse(pred, obs);
  m.bias = bias(pred, obs);
  m.n = static_cast<int>(pred.size());
  try {
    m.pearson_r = pearson_r(pred, obs);
  } catch (const DegenerateInput&) {
    m.pearson_r = std::nullopt;
  }
  return m;
}

}  // namespace wcmkg
