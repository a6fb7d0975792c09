#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcmkg/adam.hpp"
#include "wcmkg/context.hpp"
#include "wcmkg/features.hpp"
#include "wcmkg/kg_loss.hpp"

namespace wcmkg {

struct TrainConfig {
  int window = 8;
  int hidden = 32;
  double lambda = 1.0;
  double clamp_floor = 1e-10;
  AdamConfig adam;          ///< learning rate 0.01, standard decay rates
  double clip_norm = 5.0;   ///< global-norm gradient clip
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 20;        ///< early stopping on validation soil MSE
  std::uint64_t seed = 0;
  double init_a = 0.05;     ///< overridden by a calibration warm start
  FeatureSpec features;

  void validate() const;
  LossConfig loss() const { return LossConfig{lambda, clamp_floor}; }
};

struct TrainLogRow {
  int epoch = 0;
  double train_total = 0.0;
  double train_soil = 0.0;
  double train_boundary = 0.0;
  double val_soil_mse = 0.0;
  double clamped_fraction = 0.0;
  double a = 0.0;  ///< current exp(log_a)
};

struct TrainedModel {
  LstmParams params;
  StandardizationStats stats;
  TrainConfig config;
  PhysicsContext physics;
  AdamState optimizer;
  int best_epoch = 0;
  double best_val_soil_mse = 0.0;
};

struct TrainResult {
  TrainedModel model;
  std::vector<TrainLogRow> log;
};

/// Minibatch training of the knowledge-guided model with early stopping on
/// validation soil MSE. Epoch 0 logs the untrained state; the returned model
/// carries the best-validation parameters. Deterministic given seed.
TrainResult train(const SequenceBatch& train_windows,
                  const SequenceBatch& val_windows,
                  const StandardizationStats& stats,
                  const PhysicsContext& physics, const TrainConfig& config);

/// Line-delimited records: one JSON object per epoch.
std::string training_log_jsonl(const std::vector<TrainLogRow>& log);

struct SitePrediction {
  std::string site_id;
  Date time;
  double sm_pred = 0.0;
  bool padded = false;  ///< window needed left-padding
};

/// Sliding-window predictions aligned to each acquisition of the series,
/// windows built exactly as in training.
std::vector<SitePrediction> predict(const TrainedModel& model,
                                    const SiteSeries& series);

}  // namespace wcmkg
