#include <doctest.h>

#include <cmath>
#include <vector>

#include "wcmkg/adam.hpp"
#include "wcmkg/gradient_check.hpp"
#include "wcmkg/lstm.hpp"
#include "wcmkg/rng.hpp"

using namespace wcmkg;

namespace {

std::vector<Eigen::MatrixXd> random_inputs(int window, int dim, int batch,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> x(window, Eigen::MatrixXd(dim, batch));
  for (auto& step : x) {
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < batch; ++c) step(r, c) = rng.normal(0.0, 1.0);
    }
  }
  return x;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("all-zero parameters predict zero") {
  const LstmParams p = LstmParams::zeros({3, 4});
  const auto x = random_inputs(5, 3, 2, 1);
  const Eigen::VectorXd pred = lstm_forward(x, p);
  CHECK(pred[0] == 0.0);
  CHECK(pred[1] == 0.0);
}

TEST_CASE("single cell matches a hand-unrolled computation") {
  LstmParams p = LstmParams::zeros({1, 1});
  p.w_in[LstmParams::kInput](0, 0) = 0.3;
  p.w_in[LstmParams::kForget](0, 0) = -0.2;
  p.w_in[LstmParams::kCell](0, 0) = 0.7;
  p.w_in[LstmParams::kOutput](0, 0) = 0.1;
  p.bias[LstmParams::kInput][0] = 0.05;
  p.bias[LstmParams::kForget][0] = 1.0;
  p.bias[LstmParams::kCell][0] = -0.1;
  p.bias[LstmParams::kOutput][0] = 0.2;
  p.head_w[0] = 1.5;
  p.head_b = 0.25;

  const double x = 0.8;
  std::vector<Eigen::MatrixXd> inputs(1, Eigen::MatrixXd::Constant(1, 1, x));

  const double gi = sigmoid(0.3 * x + 0.05);
  const double gg = std::tanh(0.7 * x - 0.1);
  const double go = sigmoid(0.1 * x + 0.2);
  const double c = gi * gg;  // forget gate multiplies the zero initial cell
  const double h = go * std::tanh(c);
  const double expected = 1.5 * h + 0.25;

  const Eigen::VectorXd pred = lstm_forward(inputs, p);
  CHECK(pred[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("identical batch columns give identical predictions") {
  const LstmParams p = LstmParams::init({4, 6}, 5);
  auto x = random_inputs(7, 4, 2, 2);
  for (auto& step : x) step.col(1) = step.col(0);
  const Eigen::VectorXd pred = lstm_forward(x, p);
  CHECK(pred[0] == pred[1]);
}

TEST_CASE("forward is invariant to batch order") {
  const LstmParams p = LstmParams::init({3, 5}, 8);
  const auto x = random_inputs(6, 3, 4, 3);
  const Eigen::VectorXd pred = lstm_forward(x, p);

  // Reverse the batch columns.
  auto rev = x;
  for (auto& step : rev) step = step.rowwise().reverse().eval();
  const Eigen::VectorXd pred_rev = lstm_forward(rev, p);
  for (int j = 0; j < 4; ++j) CHECK(pred[j] == pred_rev[3 - j]);
}

TEST_CASE("dimension mismatches are rejected") {
  const LstmParams p = LstmParams::init({3, 4}, 1);
  CHECK_THROWS_AS(lstm_forward({}, p), EmptyBatch);
  CHECK_THROWS_AS(lstm_forward(random_inputs(2, 5, 2, 1), p),
                  DimensionMismatch);

  LstmCache cache;
  const auto x = random_inputs(3, 3, 2, 4);
  lstm_forward(x, p, &cache);
  CHECK_THROWS_AS(lstm_backward(x, p, cache, Eigen::VectorXd::Zero(5)),
                  DimensionMismatch);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  const LstmParams p = LstmParams::init({3, 4}, 6);
  const auto x = random_inputs(5, 3, 2, 7);
  LstmCache cache;
  lstm_forward(x, p, &cache);
  const LstmGradients g =
      lstm_backward(x, p, cache, Eigen::VectorXd::Zero(2));
  CHECK(g.params.global_norm() == 0.0);
  for (const auto& gi : g.inputs) CHECK(gi.norm() == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  const int window = 5, dim = 3, hidden = 4, batch = 3;
  const LstmParams params = LstmParams::init({dim, hidden}, 21);
  const auto x = random_inputs(window, dim, batch, 22);
  Rng rng(23);
  Eigen::VectorXd targets(batch);
  for (int j = 0; j < batch; ++j) targets[j] = rng.uniform(0.0, 0.5);

  auto loss_value = [&](const LstmParams& p) {
    const Eigen::VectorXd pred = lstm_forward(x, p);
    return (pred - targets).squaredNorm() / batch;
  };

  LstmCache cache;
  const Eigen::VectorXd pred = lstm_forward(x, params, &cache);
  const Eigen::VectorXd upstream = 2.0 / batch * (pred - targets);
  const LstmGradients analytic = lstm_backward(x, params, cache, upstream);

  const GradientReport report = finite_difference_gradients(
      params, loss_value, analytic.params, 1e-5);
  CHECK(report.max_rel_error < 1e-4);
  // log_a does not enter the plain loss; both sides must agree on zero.
  CHECK(report.per_parameter.at("log_a") < 1e-12);
}

TEST_CASE("input gradients match finite differences") {
  const LstmParams params = LstmParams::init({2, 3}, 31);
  auto x = random_inputs(4, 2, 2, 32);
  Eigen::VectorXd targets(2);
  targets << 0.2, 0.4;

  LstmCache cache;
  const Eigen::VectorXd pred = lstm_forward(x, params, &cache);
  const Eigen::VectorXd upstream = 2.0 / 2 * (pred - targets);
  const LstmGradients analytic = lstm_backward(x, params, cache, upstream);

  const double h = 1e-6;
  for (int t = 0; t < 4; ++t) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const double saved = x[t](r, c);
        x[t](r, c) = saved + h;
        const double up = (lstm_forward(x, params) - targets).squaredNorm() / 2;
        x[t](r, c) = saved - h;
        const double dn = (lstm_forward(x, params) - targets).squaredNorm() / 2;
        x[t](r, c) = saved;
        const double numeric = (up - dn) / (2.0 * h);
        CHECK(analytic.inputs[t](r, c) ==
              doctest::Approx(numeric).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("finite differences on a quadratic are exact to rounding") {
  LstmParams p = LstmParams::zeros({1, 1});
  p.head_b = 3.0;
  auto quad = [](const LstmParams& q) { return q.head_b * q.head_b; };
  LstmParams analytic = LstmParams::zeros({1, 1});
  analytic.head_b = 6.0;
  const GradientReport report =
      finite_difference_gradients(p, quad, analytic, 1e-5);
  CHECK(report.per_parameter.at("head_b") < 1e-9);
  CHECK_THROWS_AS(finite_difference_gradients(p, quad, analytic, 0.0),
                  InvariantViolation);
}

TEST_CASE("seeded initialization is bounded and reproducible") {
  const int hidden = 16;
  const LstmParams a = LstmParams::init({9, hidden}, 77, 0.05);
  const LstmParams b = LstmParams::init({9, hidden}, 77, 0.05);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));

  bool identical = true;
  a.for_each_block([&](const std::string&, const double*, std::int64_t) {});
  std::vector<double> flat_a, flat_b;
  a.for_each_block([&](const std::string&, const double* d, std::int64_t n) {
    flat_a.insert(flat_a.end(), d, d + n);
  });
  b.for_each_block([&](const std::string&, const double* d, std::int64_t n) {
    flat_b.insert(flat_b.end(), d, d + n);
  });
  for (std::size_t i = 0; i < flat_a.size(); ++i) {
    identical = identical && flat_a[i] == flat_b[i];
  }
  CHECK(identical);

  for (int g = 0; g < 4; ++g) {
    CHECK(a.w_in[g].cwiseAbs().maxCoeff() <= k);
    CHECK(a.w_rec[g].cwiseAbs().maxCoeff() <= k);
  }
  // Forget bias sits near +1.
  CHECK(a.bias[LstmParams::kForget].minCoeff() >= 1.0 - k);
  CHECK(a.bias[LstmParams::kForget].maxCoeff() <= 1.0 + k);
  CHECK(a.log_a == doctest::Approx(std::log(0.05)));

  // Long standardized windows stay finite at init.
  const auto x = random_inputs(64, 9, 4, 5);
  const Eigen::VectorXd pred = lstm_forward(x, a);
  for (int j = 0; j < 4; ++j) CHECK(std::isfinite(pred[j]));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  LstmParams p = LstmParams::init({2, 3}, 9);
  const LstmParams before = p;
  AdamState state = AdamState::zeros(p.dims());
  optimizer_step(p, LstmParams::zeros(p.dims()), state, {});
  std::vector<double> a, b;
  p.for_each_block([&](const std::string&, const double* d, std::int64_t n) {
    a.insert(a.end(), d, d + n);
  });
  before.for_each_block([&](const std::string&, const double* d,
                            std::int64_t n) { b.insert(b.end(), d, d + n); });
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(state.step == 1);
}

TEST_CASE("adam: hand-computed single-scalar update") {
  LstmParams p = LstmParams::zeros({1, 1});
  p.head_b = 0.5;
  LstmParams g = LstmParams::zeros({1, 1});
  g.head_b = 0.2;
  AdamState state = AdamState::zeros({1, 1});
  AdamConfig cfg;
  cfg.learning_rate = 0.01;

  optimizer_step(p, g, state, cfg);

  const double m = 0.1 * 0.2;            // (1-beta1)*g
  const double v = 0.001 * 0.04;         // (1-beta2)*g^2
  const double m_hat = m / 0.1;          // bias correction, t=1
  const double v_hat = v / 0.001;
  const double expected = 0.5 - 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(p.head_b == doctest::Approx(expected).epsilon(1e-15));
  CHECK(state.m.head_b == doctest::Approx(m).epsilon(1e-15));
  CHECK(state.v.head_b == doctest::Approx(v).epsilon(1e-15));
}

TEST_CASE("adam trajectories are bit-identical across reruns") {
  auto run = [] {
    LstmParams p = LstmParams::init({2, 4}, 123);
    AdamState state = AdamState::zeros(p.dims());
    const auto x = random_inputs(3, 2, 2, 124);
    Eigen::VectorXd targets(2);
    targets << 0.1, 0.3;
    for (int step = 0; step < 25; ++step) {
      LstmCache cache;
      const Eigen::VectorXd pred = lstm_forward(x, p, &cache);
      LstmGradients g =
          lstm_backward(x, p, cache, 2.0 / 2 * (pred - targets));
      clip_global_norm(g.params, 5.0);
      optimizer_step(p, g.params, state, {});
    }
    return p;
  };
  const LstmParams p1 = run();
  const LstmParams p2 = run();
  std::vector<double> a, b;
  p1.for_each_block([&](const std::string&, const double* d, std::int64_t n) {
    a.insert(a.end(), d, d + n);
  });
  p2.for_each_block([&](const std::string&, const double* d, std::int64_t n) {
    b.insert(b.end(), d, d + n);
  });
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("global-norm clipping") {
  LstmParams g = LstmParams::zeros({1, 2});
  g.head_w[0] = 3.0;
  g.head_w[1] = 4.0;  // norm 5 exactly: untouched
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(5.0));
  CHECK(g.head_w[0] == doctest::Approx(3.0));

  g.head_w[0] = 30.0;
  g.head_w[1] = 40.0;
  const double pre = clip_global_norm(g, 5.0);
  CHECK(pre == doctest::Approx(50.0));
  CHECK(g.global_norm() == doctest::Approx(5.0).epsilon(1e-12));
}
