#pragma once

#include "wcmkg/lstm.hpp"

namespace wcmkg {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  LstmParams m;  ///< first-moment estimates
  LstmParams v;  ///< second-moment estimates
  long step = 0;

  static AdamState zeros(LstmDims dims) {
    return AdamState{LstmParams::zeros(dims), LstmParams::zeros(dims), 0};
  }
};

/// In-place Adam update with bias correction. Deterministic given state.
void optimizer_step(LstmParams& params, const LstmParams& gradients,
                    AdamState& state, const AdamConfig& config);

/// Scales all gradient blocks so the global L2 norm does not exceed
/// max_norm. Returns the pre-clip norm.
double clip_global_norm(LstmParams& gradients, double max_norm);

}  // namespace wcmkg
