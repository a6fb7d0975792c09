#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wcmkg/errors.hpp"

namespace wcmkg {

struct LstmDims {
  int input = 0;
  int hidden = 0;
};

/// All learnable state of the recurrent regressor: four gate blocks, the
/// affine head, and the unconstrained log of the vegetation backscattering
/// factor (exposed as a = exp(log_a) > 0).
///
/// The same layout doubles as the container for gradients and optimizer
/// moments; for_each_block fixes the flattened parameter order shared by the
/// optimizer, the finite-difference harness and the checkpoint format.
struct LstmParams {
  enum Gate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };
  static constexpr std::array<std::string_view, 4> kGateNames{"i", "f", "g", "o"};

  std::array<Eigen::MatrixXd, 4> w_in;   // hidden x input
  std::array<Eigen::MatrixXd, 4> w_rec;  // hidden x hidden
  std::array<Eigen::VectorXd, 4> bias;   // hidden
  Eigen::RowVectorXd head_w;             // 1 x hidden
  double head_b = 0.0;
  double log_a = 0.0;

  static LstmParams zeros(LstmDims dims);

  /// Uniform init in [-k, k] with k = 1/sqrt(hidden), forget-gate bias +1,
  /// log_a = log(init_a). Seeded and reproducible.
  static LstmParams init(LstmDims dims, std::uint64_t seed, double init_a = 0.05);

  LstmDims dims() const;
  std::int64_t scalar_count() const;

  template <class F>
  void for_each_block(F&& f) {
    for (int g = 0; g < 4; ++g) {
      f(block_name("w_in_", g), w_in[g].data(), w_in[g].size());
      f(block_name("w_rec_", g), w_rec[g].data(), w_rec[g].size());
      f(block_name("bias_", g), bias[g].data(), bias[g].size());
    }
    f(std::string("head_w"), head_w.data(), head_w.size());
    f(std::string("head_b"), &head_b, std::int64_t{1});
    f(std::string("log_a"), &log_a, std::int64_t{1});
  }

  template <class F>
  void for_each_block(F&& f) const {
    const_cast<LstmParams&>(*this).for_each_block(
        [&f](const std::string& name, const double* data, std::int64_t n) {
          f(name, data, n);
        });
  }

  double global_norm() const;
  void set_all(double v);
  bool all_finite() const;

  /// v += scale * other, blockwise. Shapes must match.
  void axpy(double scale, const LstmParams& other);

 private:
  static std::string block_name(const char* prefix, int gate) {
    return std::string(prefix) + std::string(kGateNames[gate]);
  }
};

/// Per-step activations kept by the forward pass for exact backpropagation
/// through time.
struct LstmCache {
  std::vector<Eigen::MatrixXd> gate_i, gate_f, gate_g, gate_o;  // hidden x batch
  std::vector<Eigen::MatrixXd> cell, cell_tanh, hidden_prev;    // hidden x batch
  Eigen::MatrixXd hidden_last;                                  // hidden x batch
  int steps = 0;
};

/// Runs the LSTM recurrence over a time-major input sequence
/// (inputs[t] is input_dim x batch) from zero initial state and applies the
/// affine head to the final hidden state. Returns one prediction per batch
/// column. Deterministic; per-column results independent of batch order.
Eigen::VectorXd lstm_forward(const std::vector<Eigen::MatrixXd>& inputs,
                             const LstmParams& params,
                             LstmCache* cache = nullptr);

struct LstmGradients {
  LstmParams params;                    ///< d loss / d theta, same layout
  std::vector<Eigen::MatrixXd> inputs;  ///< d loss / d x_t (input_dim x batch)
};

/// Exact gradients via backpropagation through time. `upstream` holds
/// d loss / d prediction per batch element. The log_a slot of the result is
/// zero here: its chain runs through the input gradients and is assembled by
/// the knowledge-guided loss.
LstmGradients lstm_backward(const std::vector<Eigen::MatrixXd>& inputs,
                            const LstmParams& params, const LstmCache& cache,
                            const Eigen::VectorXd& upstream);

}  // namespace wcmkg
