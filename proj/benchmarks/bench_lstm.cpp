#include <benchmark/benchmark.h>

#include "wcmkg/adam.hpp"
#include "wcmkg/kg_loss.hpp"
#include "wcmkg/lstm.hpp"
#include "wcmkg/rng.hpp"
#include "wcmkg/synthetic.hpp"

namespace {

using namespace wcmkg;

std::vector<Eigen::MatrixXd> random_inputs(int window, int dim, int batch) {
  Rng rng(1);
  std::vector<Eigen::MatrixXd> x(window, Eigen::MatrixXd(dim, batch));
  for (auto& step : x) {
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < batch; ++c) step(r, c) = rng.normal(0.0, 1.0);
    }
  }
  return x;
}

// Canonical training shape: batch 32, window 8, hidden 32, 9 features.
void BM_lstm_forward(benchmark::State& state) {
  const LstmParams params = LstmParams::init({9, 32}, 2);
  const auto x = random_inputs(8, 9, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lstm_forward(x, params));
  }
}
BENCHMARK(BM_lstm_forward);

void BM_lstm_forward_backward(benchmark::State& state) {
  const LstmParams params = LstmParams::init({9, 32}, 2);
  const auto x = random_inputs(8, 9, 32);
  Eigen::VectorXd upstream = Eigen::VectorXd::Constant(32, 0.01);
  for (auto _ : state) {
    LstmCache cache;
    benchmark::DoNotOptimize(lstm_forward(x, params, &cache));
    benchmark::DoNotOptimize(lstm_backward(x, params, cache, upstream));
  }
}
BENCHMARK(BM_lstm_forward_backward);

void BM_adam_step(benchmark::State& state) {
  LstmParams params = LstmParams::init({9, 32}, 2);
  LstmParams grads = LstmParams::init({9, 32}, 3);
  AdamState opt = AdamState::zeros(params.dims());
  for (auto _ : state) {
    optimizer_step(params, grads, opt, {});
  }
}
BENCHMARK(BM_adam_step);

struct LossFixture {
  SequenceBatch batch;
  StandardizationStats stats;
  LstmParams params;

  LossFixture() {
    SyntheticConfig cfg;
    cfg.n_sites = 4;
    cfg.n_timesteps = 30;
    cfg.noise_db = 0.4;
    cfg.seed = 5;
    static SyntheticDataset data = generate_synthetic(cfg);
    PhysicsContext physics;
    physics.vwc_coeff = cfg.vwc_coeff;
    std::vector<const SiteSeries*> ptrs;
    for (const auto& s : data.sites) ptrs.push_back(&s);
    FeatureSpec spec;
    stats = compute_standardization(ptrs, spec, physics, 0.05, 1e-10);
    const SequenceBatch all = build_windows(ptrs, 8, spec, stats, physics);
    std::vector<int> rows(32);
    for (int i = 0; i < 32; ++i) rows[i] = i;
    batch = all.subset(rows);
    params = LstmParams::init({batch.feature_dim(), 32}, 7, 0.05);
  }
};

// One full training step's worth of loss + gradients on a 32-window batch.
void BM_kg_loss_with_gradients(benchmark::State& state) {
  const LossFixture f;
  const LossConfig cfg{1.0, 1e-10};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kg_loss(f.batch, f.params, f.stats, cfg));
  }
}
BENCHMARK(BM_kg_loss_with_gradients);

}  // namespace

BENCHMARK_MAIN();
