#include <benchmark/benchmark.h>

#include "wcmkg/rng.hpp"
#include "wcmkg/wcm.hpp"

namespace {

using namespace wcmkg;

const WcmParams kParams{0.02, 0.084, -25.0, 30.0, deg_to_rad(40.0)};

void BM_db_round_trip(benchmark::State& state) {
  double x = -19.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(db_to_linear(linear_to_db(LinearPower{x + 20.0})));
  }
}
BENCHMARK(BM_db_round_trip);

void BM_attenuation(benchmark::State& state) {
  double vwc = 1.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(attenuation(vwc, kParams));
  }
}
BENCHMARK(BM_attenuation);

void BM_wcm_forward(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(wcm_forward(SoilMoisture{0.23}, 1.3, kParams));
  }
}
BENCHMARK(BM_wcm_forward);

void BM_wcm_invert(benchmark::State& state) {
  const Decibel obs = wcm_forward(SoilMoisture{0.23}, 1.3, kParams);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wcm_invert_sm(obs, 1.3, kParams));
  }
}
BENCHMARK(BM_wcm_invert);

void BM_isolate_clamped(benchmark::State& state) {
  const Decibel obs = wcm_forward(SoilMoisture{0.23}, 1.3, kParams);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        isolate_soil_backscatter_clamped(obs, 1.3, kParams.a, kParams, 1e-10));
  }
}
BENCHMARK(BM_isolate_clamped);

}  // namespace

BENCHMARK_MAIN();
