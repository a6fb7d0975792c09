#include "wcmkg/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace wcmkg {

GradientReport finite_difference_gradients(
    const LstmParams& params,
    const std::function<double(const LstmParams&)>& loss,
    const LstmParams& analytic, double h, double abs_floor) {
  if (!(h > 0.0)) throw InvariantViolation("finite differences: h must be > 0");

  // Collect the analytic blocks in layout order.
  std::vector<std::pair<std::string, std::vector<double>>> reference;
  analytic.for_each_block(
      [&](const std::string& name, const double* data, std::int64_t n) {
        reference.emplace_back(name, std::vector<double>(data, data + n));
      });

  GradientReport report;
  LstmParams probe = params;
  std::vector<std::pair<double*, std::int64_t>> blocks;
  probe.for_each_block([&](const std::string&, double* data, std::int64_t n) {
    blocks.emplace_back(data, n);
  });
  if (blocks.size() != reference.size()) {
    throw DimensionMismatch("finite differences: layout mismatch");
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto [data, n] = blocks[b];
    const auto& [name, ana] = reference[b];
    if (static_cast<std::int64_t>(ana.size()) != n) {
      throw DimensionMismatch("finite differences: block " + name);
    }
    double worst = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double f_plus = loss(probe);
      data[i] = saved - h;
      const double f_minus = loss(probe);
      data[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double scale = std::max(std::abs(numeric), std::abs(ana[i]));
      const double err = (scale < abs_floor)
                             ? std::abs(numeric - ana[i])
                             : std::abs(numeric - ana[i]) / scale;
      worst = std::max(worst, err);
    }
    report.per_parameter[name] = worst;
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

}  // namespace wcmkg
