#include "wcmkg/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "wcmkg/rng.hpp"

namespace wcmkg {

void TrainConfig::validate() const {
  if (window < 1) throw InvariantViolation("training: window must be >= 1");
  if (hidden < 1) throw InvariantViolation("training: hidden must be >= 1");
  if (!(lambda >= 0.0)) throw InvariantViolation("training: lambda must be >= 0");
  if (!(clamp_floor > 0.0)) {
    throw InvariantViolation("training: clamp_floor must be > 0");
  }
  if (!(adam.learning_rate > 0.0)) {
    throw InvariantViolation("training: learning_rate must be > 0");
  }
  if (batch_size < 1) throw InvariantViolation("training: batch_size must be >= 1");
  if (max_epochs < 1) throw InvariantViolation("training: max_epochs must be >= 1");
  if (patience < 1) throw InvariantViolation("training: patience must be >= 1");
  if (!(init_a > 0.0)) throw InvariantViolation("training: init_a must be > 0");
  if (!(clip_norm > 0.0)) throw InvariantViolation("training: clip_norm must be > 0");
  features.validate();
}

namespace {

/// Validation soil MSE under the current parameters (forward only).
double validation_soil_mse(const SequenceBatch& val, const LstmParams& params,
                           const StandardizationStats& stats,
                           const LossConfig& loss) {
  if (val.batch() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd pred = kg_predict(val, params, stats, loss.clamp_floor);
  return baseline_mse_loss(pred, val.targets);
}

TrainLogRow evaluate_epoch(int epoch, const SequenceBatch& train,
                           const SequenceBatch& val, const LstmParams& params,
                           const StandardizationStats& stats,
                           const LossConfig& loss) {
  const KnowledgeInputs ki =
      knowledge_inputs(train, params.log_a, stats, loss.clamp_floor);
  const Eigen::VectorXd pred = lstm_forward(ki.inputs, params);
  TrainLogRow row;
  row.epoch = epoch;
  row.train_soil = baseline_mse_loss(pred, train.targets);
  row.train_boundary = boundary_loss(pred, loss.lambda);
  row.train_total = row.train_soil + row.train_boundary;
  row.val_soil_mse = validation_soil_mse(val, params, stats, loss);
  row.clamped_fraction = ki.clamped_fraction;
  row.a = std::exp(params.log_a);
  return row;
}

}  // namespace

TrainResult train(const SequenceBatch& train_windows,
                  const SequenceBatch& val_windows,
                  const StandardizationStats& stats,
                  const PhysicsContext& physics, const TrainConfig& config) {
  config.validate();
  if (train_windows.batch() == 0) throw EmptyBatch("train: no training windows");
  if (!train_windows.has_targets()) {
    throw InvariantViolation("train: training windows must all be labeled");
  }
  if (train_windows.feature_dim() != config.features.dim()) {
    throw DimensionMismatch("train: window feature dim does not match config");
  }

  const LossConfig loss = config.loss();
  const LstmDims dims{config.features.dim(), config.hidden};
  LstmParams params = LstmParams::init(dims, config.seed, config.init_a);
  AdamState opt = AdamState::zeros(dims);

  TrainResult result;
  result.log.push_back(
      evaluate_epoch(0, train_windows, val_windows, params, stats, loss));

  LstmParams best_params = params;
  const bool has_val = val_windows.batch() > 0;
  double best_val = has_val ? result.log.front().val_soil_mse
                            : result.log.front().train_soil;
  int best_epoch = 0;
  int stale = 0;

  const int n = train_windows.batch();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng.engine());

    for (int start = 0; start < n; start += config.batch_size) {
      const int len = std::min(config.batch_size, n - start);
      const std::vector<int> rows(order.begin() + start,
                                  order.begin() + start + len);
      const SequenceBatch mini = train_windows.subset(rows);
      KgLossResult step = kg_loss(mini, params, stats, loss);
      if (!std::isfinite(step.breakdown.total)) {
        throw NonFiniteLoss(
            "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(start / config.batch_size) + " (first site " +
            mini.site_ids.front() + ", ending " +
            format_date(mini.end_times.front()) + ")");
      }
      clip_global_norm(step.gradients, config.clip_norm);
      optimizer_step(params, step.gradients, opt, config.adam);
      if (!std::isfinite(params.log_a)) {
        throw NonFiniteLoss("log_a became non-finite at epoch " +
                            std::to_string(epoch));
      }
    }

    const TrainLogRow row =
        evaluate_epoch(epoch, train_windows, val_windows, params, stats, loss);
    result.log.push_back(row);

    const double score = has_val ? row.val_soil_mse : row.train_soil;
    if (score < best_val) {
      best_val = score;
      best_params = params;
      best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
      if (stale >= config.patience) break;
    }
  }

  result.model.params = std::move(best_params);
  result.model.stats = stats;
  result.model.config = config;
  result.model.physics = physics;
  result.model.optimizer = std::move(opt);
  result.model.best_epoch = best_epoch;
  result.model.best_val_soil_mse = best_val;
  return result;
}

std::string training_log_jsonl(const std::vector<TrainLogRow>& log) {
  std::string out;
  for (const TrainLogRow& row : log) {
    nlohmann::ordered_json j;
    j["epoch"] = row.epoch;
    j["train_total"] = row.train_total;
    j["train_soil"] = row.train_soil;
    j["train_boundary"] = row.train_boundary;
    j["val_soil_mse"] = row.val_soil_mse;
    j["clamped_fraction"] = row.clamped_fraction;
    j["a"] = row.a;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SitePrediction> predict(const TrainedModel& model,
                                    const SiteSeries& series) {
  const SequenceBatch windows =
      build_windows(series, model.config.window, model.config.features,
                    model.stats, model.physics, WindowMode::kAllTimestamps);
  std::vector<SitePrediction> out;
  if (windows.batch() == 0) return out;

  const Eigen::VectorXd pred = kg_predict(windows, model.params, model.stats,
                                          model.config.clamp_floor);
  out.reserve(windows.batch());
  for (int j = 0; j < windows.batch(); ++j) {
    SitePrediction p;
    p.site_id = windows.site_ids[j];
    p.time = windows.end_times[j];
    p.sm_pred = pred[j];
    p.padded = windows.pad_mask.col(j).sum() > 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace wcmkg
