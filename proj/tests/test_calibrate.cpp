#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wcmkg/calibrate.hpp"
#include "wcmkg/rng.hpp"

using namespace wcmkg;

namespace {

// Grid of noise-free observations generated by the forward model.
CalibrationProblem make_problem(const WcmParams& truth, int n = 120) {
  CalibrationProblem problem;
  problem.fixed_b = truth.b;
  Rng rng(42);
  for (int i = 0; i < n; ++i) {
    const double sm = rng.uniform(0.05, 0.4);
    const double vwc = rng.uniform(0.2, 1.8);
    const double theta = deg_to_rad(rng.uniform(38.0, 42.0));
    const WcmParams p = truth.with_theta(theta);
    problem.observations.push_back(
        {wcm_forward(SoilMoisture{sm}, vwc, p).value, vwc, theta, sm});
  }
  return problem;
}

const WcmParams kTruth{0.02, 0.084, -25.0, 30.0, deg_to_rad(40.0)};

}  // namespace

TEST_CASE("objective vanishes at the generating parameters") {
  const CalibrationProblem problem = make_problem(kTruth);
  const double at_truth =
      calibration_objective(std::log(kTruth.a), kTruth.c, kTruth.d, problem);
  CHECK(at_truth <= 1e-18);
}

TEST_CASE("uniform intercept offset shifts the inversion by exactly 1/D") {
  const CalibrationProblem problem = make_problem(kTruth);
  const double shifted =
      calibration_objective(std::log(kTruth.a), kTruth.c + 1.0, kTruth.d, problem);
  CHECK(shifted == doctest::Approx(1.0 / (kTruth.d * kTruth.d)).epsilon(1e-10));
}

TEST_CASE("truth is a local minimum of the objective") {
  const CalibrationProblem problem = make_problem(kTruth);
  const double at_truth =
      calibration_objective(std::log(kTruth.a), kTruth.c, kTruth.d, problem);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double d0 = rng.uniform(-0.05, 0.05);
    const double d1 = rng.uniform(-0.05, 0.05);
    const double d2 = rng.uniform(-0.05, 0.05);
    CHECK(calibration_objective(std::log(kTruth.a) + d0, kTruth.c + d1,
                                kTruth.d + d2, problem) >= at_truth);
  }
}

TEST_CASE("objective is invariant to observation order") {
  CalibrationProblem problem = make_problem(kTruth, 60);
  const double before =
      calibration_objective(std::log(0.03), -24.0, 28.0, problem);
  std::reverse(problem.observations.begin(), problem.observations.end());
  const double after =
      calibration_objective(std::log(0.03), -24.0, 28.0, problem);
  CHECK(before == doctest::Approx(after).epsilon(1e-14));
}

TEST_CASE("noise-free recovery within 1% relative error") {
  const CalibrationProblem problem = make_problem(kTruth);
  const CalibrationResult result = calibrate_wcm(problem);
  CHECK(result.params.a > 0.0);
  CHECK(std::abs(result.params.a - kTruth.a) / kTruth.a <= 0.01);
  CHECK(std::abs(result.params.c - kTruth.c) / std::abs(kTruth.c) <= 0.01);
  CHECK(std::abs(result.params.d - kTruth.d) / kTruth.d <= 0.01);
  CHECK(result.objective <= calibration_objective(std::log(0.05), -25.0, 30.0,
                                                  problem));
  CHECK_FALSE(result.low_a_sensitivity);
  // Paper-scale sanity: fitted A has order 1e-2.
  CHECK(result.params.a > 1e-3);
  CHECK(result.params.a < 1e-1);
}

TEST_CASE("zero vegetation leaves A unidentified and flags it") {
  CalibrationProblem problem;
  problem.fixed_b = kTruth.b;
  Rng rng(9);
  for (int i = 0; i < 40; ++i) {
    const double sm = rng.uniform(0.05, 0.4);
    const double theta = deg_to_rad(40.0);
    const WcmParams p = kTruth.with_theta(theta);
    problem.observations.push_back(
        {wcm_forward(SoilMoisture{sm}, 0.0, p).value, 0.0, theta, sm});
  }
  const CalibrationResult result = calibrate_wcm(problem);
  CHECK(result.gamma2_stddev == 0.0);
  CHECK(result.low_a_sensitivity);
  CHECK(result.params.a > 0.0);
  // C and D are still identified by the soil regression.
  CHECK(std::abs(result.params.c - kTruth.c) / std::abs(kTruth.c) <= 0.01);
  CHECK(std::abs(result.params.d - kTruth.d) / kTruth.d <= 0.01);
}

TEST_CASE("determinism: identical problems give identical results") {
  const CalibrationProblem problem = make_problem(kTruth, 80);
  const CalibrationResult r1 = calibrate_wcm(problem);
  const CalibrationResult r2 = calibrate_wcm(problem);
  CHECK(r1.params.a == r2.params.a);
  CHECK(r1.params.c == r2.params.c);
  CHECK(r1.params.d == r2.params.d);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("problem validation") {
  CalibrationProblem problem;
  problem.observations = {{-19.0, 0.5, deg_to_rad(40.0), 0.2},
                          {-18.0, 0.5, deg_to_rad(40.0), 0.25}};
  CHECK_THROWS_AS(problem.validate(), InvariantViolation);  // too few

  problem.observations.push_back({-17.0, 0.5, deg_to_rad(40.0), 1.5});
  CHECK_THROWS_AS(problem.validate(), InvariantViolation);  // sm out of range
}

TEST_CASE("calibration JSON round-trip") {
  const CalibrationProblem problem = make_problem(kTruth, 60);
  const CalibrationResult result = calibrate_wcm(problem);
  const std::string text = calibration_result_json(result);
  const CalibrationResult back = calibration_result_from_json(text);
  CHECK(back.params.a == result.params.a);
  CHECK(back.params.b == result.params.b);
  CHECK(back.params.c == result.params.c);
  CHECK(back.params.d == result.params.d);
  CHECK(back.objective == result.objective);
  CHECK(back.converged == result.converged);
  CHECK_THROWS_AS(calibration_result_from_json("{\"a\": 1}"), SchemaError);
  CHECK_THROWS_AS(calibration_result_from_json("not json"), SchemaError);
}
