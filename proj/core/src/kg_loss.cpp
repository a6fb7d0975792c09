#include "wcmkg/kg_loss.hpp"

#include <cmath>

namespace wcmkg {

namespace {

constexpr double kLn10Over10 = 0.23025850929940457;  // ln(10)/10

void check_batch(const SequenceBatch& batch, const LstmParams& params) {
  if (batch.batch() == 0) throw EmptyBatch("empty sequence batch");
  if (batch.feature_dim() != params.dims().input) {
    throw DimensionMismatch("batch feature dim " +
                            std::to_string(batch.feature_dim()) +
                            " != model input dim " +
                            std::to_string(params.dims().input));
  }
}

}  // namespace

double baseline_mse_loss(const Eigen::VectorXd& pred,
                         const Eigen::VectorXd& obs) {
  if (pred.size() == 0) throw EmptyBatch("baseline_mse_loss: empty input");
  if (pred.size() != obs.size()) {
    throw DimensionMismatch("baseline_mse_loss: length mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - obs[i];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

double boundary_loss(const Eigen::VectorXd& pred, double lambda) {
  if (pred.size() == 0) throw EmptyBatch("boundary_loss: empty input");
  if (!(lambda >= 0.0)) throw InvariantViolation("lambda must be >= 0");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    sum += std::max(0.0, -pred[i]) + std::max(0.0, pred[i] - 1.0);
  }
  return lambda * sum / static_cast<double>(pred.size());
}

KnowledgeInputs knowledge_inputs(const SequenceBatch& batch, double log_a,
                                 const StandardizationStats& stats,
                                 double clamp_floor) {
  const int w = batch.window();
  const int b = batch.batch();
  const double a = std::exp(log_a);
  const double mean0 = stats.mean[SequenceBatch::kSigmaSoilFeature];
  const double std0 = stats.stddev[SequenceBatch::kSigmaSoilFeature];

  KnowledgeInputs out;
  out.inputs = batch.features;  // aux slots stay as built
  out.residual.resize(w, b);
  out.clamped = Eigen::MatrixXd::Zero(w, b);

  int clamped_real = 0;
  int real_steps = 0;
  for (int t = 0; t < w; ++t) {
    for (int j = 0; j < b; ++j) {
      const double r = batch.obs_linear(t, j) - a * batch.veg_geom(t, j);
      const bool hit = !(r > clamp_floor);
      const double floored = hit ? clamp_floor : r;
      const double soil_db = 10.0 * std::log10(floored / batch.gamma2(t, j));
      out.inputs[t](SequenceBatch::kSigmaSoilFeature, j) =
          (soil_db - mean0) / std0;
      out.residual(t, j) = floored;
      out.clamped(t, j) = hit ? 1.0 : 0.0;
      if (batch.pad_mask(t, j) == 0.0) {
        ++real_steps;
        if (hit) ++clamped_real;
      }
    }
  }
  out.clamped_fraction =
      real_steps > 0 ? static_cast<double>(clamped_real) / real_steps : 0.0;
  return out;
}

Eigen::VectorXd kg_predict(const SequenceBatch& batch, const LstmParams& params,
                           const StandardizationStats& stats,
                           double clamp_floor) {
  check_batch(batch, params);
  const KnowledgeInputs ki =
      knowledge_inputs(batch, params.log_a, stats, clamp_floor);
  return lstm_forward(ki.inputs, params);
}

namespace {

LossBreakdown breakdown_of(const Eigen::VectorXd& pred,
                           const Eigen::VectorXd& targets,
                           double clamped_fraction, const LossConfig& config) {
  LossBreakdown out;
  out.soil_mse = baseline_mse_loss(pred, targets);
  out.boundary = boundary_loss(pred, config.lambda);
  out.total = out.soil_mse + out.boundary;
  out.clamped_fraction = clamped_fraction;
  return out;
}

}  // namespace

KgLossResult kg_loss(const SequenceBatch& batch, const LstmParams& params,
                     const StandardizationStats& stats,
                     const LossConfig& config) {
  config.validate();
  check_batch(batch, params);
  if (!batch.has_targets()) {
    throw InvariantViolation("kg_loss: batch has unlabeled windows");
  }

  const KnowledgeInputs ki =
      knowledge_inputs(batch, params.log_a, stats, config.clamp_floor);

  LstmCache cache;
  const Eigen::VectorXd pred = lstm_forward(ki.inputs, params, &cache);

  KgLossResult result;
  result.predictions = pred;
  result.breakdown =
      breakdown_of(pred, batch.targets, ki.clamped_fraction, config);

  // d total / d prediction: squared-error term plus boundary subgradient
  // (zero exactly at the kinks).
  const double n = static_cast<double>(pred.size());
  Eigen::VectorXd upstream(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    double g = 2.0 * (pred[i] - batch.targets[i]) / n;
    if (pred[i] < 0.0) g -= config.lambda / n;
    if (pred[i] > 1.0) g += config.lambda / n;
    upstream[i] = g;
  }

  LstmGradients grads = lstm_backward(ki.inputs, params, cache, upstream);

  // Chain into log_a through the soil slot:
  //   x0 = (10*log10(r / gamma2) - mean0) / std0,  r = obs_lin - a*geom
  //   d x0 / d log_a = -(a * geom) / (ln(10)/10 * r * std0)
  // with zero flow where the residual sits on the floor.
  const double a = std::exp(params.log_a);
  const double std0 = stats.stddev[SequenceBatch::kSigmaSoilFeature];
  double dlog_a = 0.0;
  for (int t = 0; t < batch.window(); ++t) {
    for (int j = 0; j < batch.batch(); ++j) {
      if (ki.clamped(t, j) != 0.0) continue;
      const double dr_dlog_a = -a * batch.veg_geom(t, j);
      const double dx0 =
          dr_dlog_a / (kLn10Over10 * ki.residual(t, j) * std0);
      dlog_a += grads.inputs[t](SequenceBatch::kSigmaSoilFeature, j) * dx0;
    }
  }
  grads.params.log_a = dlog_a;

  result.gradients = std::move(grads.params);
  return result;
}

double kg_loss_value(const SequenceBatch& batch, const LstmParams& params,
                     const StandardizationStats& stats,
                     const LossConfig& config) {
  config.validate();
  check_batch(batch, params);
  const KnowledgeInputs ki =
      knowledge_inputs(batch, params.log_a, stats, config.clamp_floor);
  const Eigen::VectorXd pred = lstm_forward(ki.inputs, params);
  return breakdown_of(pred, batch.targets, ki.clamped_fraction, config).total;
}

}  // namespace wcmkg
