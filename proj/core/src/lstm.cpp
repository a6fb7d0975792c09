#include "wcmkg/lstm.hpp"

#include <cmath>

#include "wcmkg/rng.hpp"

namespace wcmkg {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return ((-z.array()).exp() + 1.0).inverse().matrix();
}

void check_dims(const std::vector<Eigen::MatrixXd>& inputs,
                const LstmParams& params) {
  if (inputs.empty()) throw EmptyBatch("lstm: empty input sequence");
  const LstmDims d = params.dims();
  const Eigen::Index batch = inputs.front().cols();
  if (batch == 0) throw EmptyBatch("lstm: zero-column input");
  for (const auto& x : inputs) {
    if (x.rows() != d.input || x.cols() != batch) {
      throw DimensionMismatch("lstm: input step is " + std::to_string(x.rows()) +
                              "x" + std::to_string(x.cols()) + ", expected " +
                              std::to_string(d.input) + "x" +
                              std::to_string(batch));
    }
  }
}

}  // namespace

LstmParams LstmParams::zeros(LstmDims dims) {
  LstmParams p;
  for (int g = 0; g < 4; ++g) {
    p.w_in[g] = Eigen::MatrixXd::Zero(dims.hidden, dims.input);
    p.w_rec[g] = Eigen::MatrixXd::Zero(dims.hidden, dims.hidden);
    p.bias[g] = Eigen::VectorXd::Zero(dims.hidden);
  }
  p.head_w = Eigen::RowVectorXd::Zero(dims.hidden);
  p.head_b = 0.0;
  p.log_a = 0.0;
  return p;
}

LstmParams LstmParams::init(LstmDims dims, std::uint64_t seed, double init_a) {
  LstmParams p = zeros(dims);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  p.for_each_block([&](const std::string&, double* data, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) data[i] = rng.uniform(-k, k);
  });
  p.bias[kForget].array() += 1.0;
  p.head_b = 0.0;
  p.log_a = std::log(init_a);
  return p;
}

LstmDims LstmParams::dims() const {
  return LstmDims{static_cast<int>(w_in[0].cols()),
                  static_cast<int>(w_in[0].rows())};
}

std::int64_t LstmParams::scalar_count() const {
  std::int64_t n = 0;
  for_each_block([&](const std::string&, const double*, std::int64_t len) {
    n += len;
  });
  return n;
}

double LstmParams::global_norm() const {
  double sq = 0.0;
  for_each_block([&](const std::string&, const double* data, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) sq += data[i] * data[i];
  });
  return std::sqrt(sq);
}

void LstmParams::set_all(double v) {
  for_each_block([&](const std::string&, double* data, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) data[i] = v;
  });
}

bool LstmParams::all_finite() const {
  bool ok = true;
  for_each_block([&](const std::string&, const double* data, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) ok = ok && std::isfinite(data[i]);
  });
  return ok;
}

void LstmParams::axpy(double scale, const LstmParams& other) {
  auto* self = this;
  std::vector<std::pair<double*, std::int64_t>> mine;
  self->for_each_block([&](const std::string&, double* data, std::int64_t n) {
    mine.emplace_back(data, n);
  });
  std::size_t idx = 0;
  other.for_each_block(
      [&](const std::string&, const double* data, std::int64_t n) {
        if (idx >= mine.size() || mine[idx].second != n) {
          throw DimensionMismatch("LstmParams::axpy shape mismatch");
        }
        double* dst = mine[idx].first;
        for (std::int64_t i = 0; i < n; ++i) dst[i] += scale * data[i];
        ++idx;
      });
}

Eigen::VectorXd lstm_forward(const std::vector<Eigen::MatrixXd>& inputs,
                             const LstmParams& params, LstmCache* cache) {
  check_dims(inputs, params);
  const LstmDims d = params.dims();
  const Eigen::Index batch = inputs.front().cols();
  const int steps = static_cast<int>(inputs.size());

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d.hidden, batch);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d.hidden, batch);

  if (cache) {
    cache->gate_i.resize(steps);
    cache->gate_f.resize(steps);
    cache->gate_g.resize(steps);
    cache->gate_o.resize(steps);
    cache->cell.resize(steps);
    cache->cell_tanh.resize(steps);
    cache->hidden_prev.resize(steps);
    cache->steps = steps;
  }

  for (int t = 0; t < steps; ++t) {
    if (cache) cache->hidden_prev[t] = h;
    const Eigen::MatrixXd& x = inputs[t];
    Eigen::MatrixXd zi =
        (params.w_in[LstmParams::kInput] * x + params.w_rec[LstmParams::kInput] * h).colwise() +
        params.bias[LstmParams::kInput];
    Eigen::MatrixXd zf =
        (params.w_in[LstmParams::kForget] * x + params.w_rec[LstmParams::kForget] * h).colwise() +
        params.bias[LstmParams::kForget];
    Eigen::MatrixXd zg =
        (params.w_in[LstmParams::kCell] * x + params.w_rec[LstmParams::kCell] * h).colwise() +
        params.bias[LstmParams::kCell];
    Eigen::MatrixXd zo =
        (params.w_in[LstmParams::kOutput] * x + params.w_rec[LstmParams::kOutput] * h).colwise() +
        params.bias[LstmParams::kOutput];

    const Eigen::MatrixXd gi = sigmoid(zi);
    const Eigen::MatrixXd gf = sigmoid(zf);
    const Eigen::MatrixXd gg = zg.array().tanh().matrix();
    const Eigen::MatrixXd go = sigmoid(zo);

    c = (gf.array() * c.array() + gi.array() * gg.array()).matrix();
    const Eigen::MatrixXd ct = c.array().tanh().matrix();
    h = (go.array() * ct.array()).matrix();

    if (cache) {
      cache->gate_i[t] = gi;
      cache->gate_f[t] = gf;
      cache->gate_g[t] = gg;
      cache->gate_o[t] = go;
      cache->cell[t] = c;
      cache->cell_tanh[t] = ct;
    }
  }
  if (cache) cache->hidden_last = h;

  Eigen::VectorXd pred = (params.head_w * h).transpose();
  pred.array() += params.head_b;
  return pred;
}

LstmGradients lstm_backward(const std::vector<Eigen::MatrixXd>& inputs,
                            const LstmParams& params, const LstmCache& cache,
                            const Eigen::VectorXd& upstream) {
  check_dims(inputs, params);
  const LstmDims d = params.dims();
  const Eigen::Index batch = inputs.front().cols();
  const int steps = static_cast<int>(inputs.size());
  if (cache.steps != steps) {
    throw DimensionMismatch("lstm_backward: cache built for a different window");
  }
  if (upstream.size() != batch) {
    throw DimensionMismatch("lstm_backward: upstream gradient length " +
                            std::to_string(upstream.size()) + " != batch " +
                            std::to_string(batch));
  }

  LstmGradients g;
  g.params = LstmParams::zeros(d);
  g.inputs.assign(steps, Eigen::MatrixXd::Zero(d.input, batch));

  // Head: pred_b = head_w . h_last_col(b) + head_b.
  g.params.head_w = upstream.transpose() * cache.hidden_last.transpose();
  g.params.head_b = upstream.sum();

  Eigen::MatrixXd dh = params.head_w.transpose() * upstream.transpose();
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(d.hidden, batch);

  for (int t = steps - 1; t >= 0; --t) {
    const Eigen::MatrixXd& gi = cache.gate_i[t];
    const Eigen::MatrixXd& gf = cache.gate_f[t];
    const Eigen::MatrixXd& gg = cache.gate_g[t];
    const Eigen::MatrixXd& go = cache.gate_o[t];
    const Eigen::MatrixXd& ct = cache.cell_tanh[t];
    const Eigen::MatrixXd c_prev = (t > 0)
        ? cache.cell[t - 1]
        : Eigen::MatrixXd::Zero(d.hidden, batch).eval();

    dc.array() += dh.array() * go.array() * (1.0 - ct.array().square());

    const Eigen::MatrixXd da_o =
        (dh.array() * ct.array() * go.array() * (1.0 - go.array())).matrix();
    const Eigen::MatrixXd da_f =
        (dc.array() * c_prev.array() * gf.array() * (1.0 - gf.array())).matrix();
    const Eigen::MatrixXd da_i =
        (dc.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
    const Eigen::MatrixXd da_g =
        (dc.array() * gi.array() * (1.0 - gg.array().square())).matrix();

    const Eigen::MatrixXd& x = inputs[t];
    const Eigen::MatrixXd& h_prev = cache.hidden_prev[t];

    g.params.w_in[LstmParams::kInput] += da_i * x.transpose();
    g.params.w_in[LstmParams::kForget] += da_f * x.transpose();
    g.params.w_in[LstmParams::kCell] += da_g * x.transpose();
    g.params.w_in[LstmParams::kOutput] += da_o * x.transpose();

    g.params.w_rec[LstmParams::kInput] += da_i * h_prev.transpose();
    g.params.w_rec[LstmParams::kForget] += da_f * h_prev.transpose();
    g.params.w_rec[LstmParams::kCell] += da_g * h_prev.transpose();
    g.params.w_rec[LstmParams::kOutput] += da_o * h_prev.transpose();

    g.params.bias[LstmParams::kInput] += da_i.rowwise().sum();
    g.params.bias[LstmParams::kForget] += da_f.rowwise().sum();
    g.params.bias[LstmParams::kCell] += da_g.rowwise().sum();
    g.params.bias[LstmParams::kOutput] += da_o.rowwise().sum();

    g.inputs[t] = params.w_in[LstmParams::kInput].transpose() * da_i +
                  params.w_in[LstmParams::kForget].transpose() * da_f +
                  params.w_in[LstmParams::kCell].transpose() * da_g +
                  params.w_in[LstmParams::kOutput].transpose() * da_o;

    dh = params.w_rec[LstmParams::kInput].transpose() * da_i +
         params.w_rec[LstmParams::kForget].transpose() * da_f +
         params.w_rec[LstmParams::kCell].transpose() * da_g +
         params.w_rec[LstmParams::kOutput].transpose() * da_o;
    dc = (dc.array() * gf.array()).matrix();
  }

  g.params.log_a = 0.0;
  return g;
}

}  // namespace wcmkg
