#pragma once

#include <Eigen/Dense>

#include "wcmkg/features.hpp"
#include "wcmkg/lstm.hpp"

namespace wcmkg {

struct LossConfig {
  double lambda = 1.0;       ///< boundary regularization factor
  double clamp_floor = 1e-10;  ///< linear-power floor for the isolation

  void validate() const {
    if (!(lambda >= 0.0)) throw InvariantViolation("lambda must be >= 0");
    if (!(clamp_floor > 0.0)) throw InvariantViolation("clamp_floor must be > 0");
  }
};

struct LossBreakdown {
  double total = 0.0;
  double soil_mse = 0.0;   ///< (m^3/m^3)^2
  double boundary = 0.0;
  double clamped_fraction = 0.0;  ///< non-padded steps that hit the floor
};

/// Plain mean squared error between predictions and observations.
double baseline_mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);

/// lambda * mean(max(0,-p) + max(0,p-1)); zero iff all predictions in [0,1].
double boundary_loss(const Eigen::VectorXd& pred, double lambda);

/// Standardized model inputs assembled from a batch with the soil slot
/// re-isolated at a = exp(log_a), plus what the log_a chain rule needs.
struct KnowledgeInputs {
  std::vector<Eigen::MatrixXd> inputs;  ///< feature tensor, slot 0 recomputed
  Eigen::MatrixXd residual;             ///< linear residual per step (window x batch)
  Eigen::MatrixXd clamped;              ///< 1.0 where the residual hit the floor
  double clamped_fraction = 0.0;
};

KnowledgeInputs knowledge_inputs(const SequenceBatch& batch, double log_a,
                                 const StandardizationStats& stats,
                                 double clamp_floor);

/// Forward pass of the knowledge-guided model: isolation with the current a,
/// frozen standardization, LSTM, affine head.
Eigen::VectorXd kg_predict(const SequenceBatch& batch, const LstmParams& params,
                           const StandardizationStats& stats,
                           double clamp_floor);

struct KgLossResult {
  LossBreakdown breakdown;
  LstmParams gradients;  ///< exact d total / d theta, including log_a
  Eigen::VectorXd predictions;
};

/// Dual-component loss (soil MSE + boundary penalty) with exact gradients
/// for every parameter. The log_a gradient runs through the isolation; steps
/// at the clamp contribute zero (straight-through).
KgLossResult kg_loss(const SequenceBatch& batch, const LstmParams& params,
                     const StandardizationStats& stats,
                     const LossConfig& config);

/// Loss value only; the pure function the finite-difference oracle probes.
double kg_loss_value(const SequenceBatch& batch, const LstmParams& params,
                     const StandardizationStats& stats,
                     const LossConfig& config);

}  // namespace wcmkg
