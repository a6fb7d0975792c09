#include "wcmkg/adam.hpp"

#include <cmath>
#include <vector>

namespace wcmkg {

namespace {

struct BlockView {
  double* data;
  std::int64_t size;
};

std::vector<BlockView> views(LstmParams& p) {
  std::vector<BlockView> out;
  p.for_each_block([&](const std::string&, double* data, std::int64_t n) {
    out.push_back({data, n});
  });
  return out;
}

}  // namespace

void optimizer_step(LstmParams& params, const LstmParams& gradients,
                    AdamState& state, const AdamConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto theta = views(params);
  auto m = views(state.m);
  auto v = views(state.v);
  std::size_t idx = 0;
  gradients.for_each_block([&](const std::string&, const double* g,
                               std::int64_t n) {
    if (idx >= theta.size() || theta[idx].size != n) {
      throw DimensionMismatch("optimizer_step: gradient layout mismatch");
    }
    double* t = theta[idx].data;
    double* mm = m[idx].data;
    double* vv = v[idx].data;
    for (std::int64_t i = 0; i < n; ++i) {
      mm[i] = config.beta1 * mm[i] + (1.0 - config.beta1) * g[i];
      vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = mm[i] / bc1;
      const double v_hat = vv[i] / bc2;
      t[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    ++idx;
  });
}

double clip_global_norm(LstmParams& gradients, double max_norm) {
  const double norm = gradients.global_norm();
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    gradients.for_each_block([&](const std::string&, double* data,
                                 std::int64_t n) {
      for (std::int64_t i = 0; i < n; ++i) data[i] *= scale;
    });
  }
  return norm;
}

}  // namespace wcmkg
