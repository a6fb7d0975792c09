#include "wcmkg/calibrate.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "wcmkg/errors.hpp"
#include "wcmkg/rng.hpp"

namespace wcmkg {

void CalibrationProblem::validate() const {
  if (observations.size() < 3) {
    throw InvariantViolation(
        "calibration needs at least 3 observations for 3 free parameters, got " +
        std::to_string(observations.size()));
  }
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (!(o.sm_ref >= 0.0 && o.sm_ref <= 1.0)) {
      throw InvariantViolation("calibration observation " + std::to_string(i) +
                               ": sm_ref outside [0,1]");
    }
    if (!std::isfinite(o.sigma_obs_db)) {
      throw InvariantViolation("calibration observation " + std::to_string(i) +
                               ": non-finite backscatter");
    }
  }
  if (!(clamp_floor > 0.0)) {
    throw InvariantViolation("calibration clamp_floor must be > 0");
  }
}

double calibration_objective(double log_a, double c, double d,
                             const CalibrationProblem& problem) {
  const double a = std::exp(log_a);
  double sum = 0.0;
  for (const auto& o : problem.observations) {
    WcmParams p;
    p.a = a;
    p.b = problem.fixed_b;
    p.c = c;
    p.d = d;
    p.theta = o.theta;
    const SoilMoisture sm =
        wcm_invert_sm_clamped(Decibel{o.sigma_obs_db}, o.vwc, p, problem.clamp_floor);
    const double err = sm.value - o.sm_ref;
    sum += err * err;
  }
  return sum / static_cast<double>(problem.observations.size());
}

namespace {

double penalized_objective(const std::vector<double>& x,
                           const CalibrationProblem& problem) {
  double penalty = 0.0;
  std::vector<double> clamped = x;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [lo, hi] = problem.bounds[i];
    if (clamped[i] < lo) {
      penalty += (lo - clamped[i]) * (lo - clamped[i]);
      clamped[i] = lo;
    } else if (clamped[i] > hi) {
      penalty += (clamped[i] - hi) * (clamped[i] - hi);
      clamped[i] = hi;
    }
  }
  return calibration_objective(clamped[0], clamped[1], clamped[2], problem) +
         penalty;
}

double gamma2_stddev(const CalibrationProblem& problem) {
  double mean = 0.0;
  std::vector<double> g;
  g.reserve(problem.observations.size());
  for (const auto& o : problem.observations) {
    WcmParams p;
    p.b = problem.fixed_b;
    p.theta = o.theta;
    g.push_back(attenuation(o.vwc, p).gamma2);
    mean += g.back();
  }
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(g.size()));
}

}  // namespace

CalibrationResult calibrate_wcm(const CalibrationProblem& problem,
                                const CalibrationSettings& settings) {
  problem.validate();

  auto objective = [&problem](const std::vector<double>& x) {
    return penalized_objective(x, problem);
  };

  std::vector<double> start(problem.initial.begin(), problem.initial.end());
  NelderMeadResult best = nelder_mead(objective, start, settings.simplex);

  if (!best.converged) {
    // One jittered restart; keep whichever run ends lower.
    Rng rng(settings.restart_seed);
    std::vector<double> jittered = start;
    for (double& v : jittered) {
      v += rng.uniform(-settings.restart_jitter, settings.restart_jitter);
    }
    NelderMeadResult retry = nelder_mead(objective, jittered, settings.simplex);
    retry.iterations += best.iterations;
    if (retry.value < best.value) best = retry;
  }

  CalibrationResult result;
  result.params.a = std::exp(best.x[0]);
  result.params.b = problem.fixed_b;
  result.params.c = best.x[1];
  result.params.d = best.x[2];
  result.params.theta = settings.default_theta;
  result.objective = best.value;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.gamma2_stddev = gamma2_stddev(problem);
  result.low_a_sensitivity = result.gamma2_stddev < 0.01;
  return result;
}

std::string calibration_result_json(const CalibrationResult& result) {
  nlohmann::ordered_json j;
  j["a"] = result.params.a;
  j["b"] = result.params.b;
  j["c"] = result.params.c;
  j["d"] = result.params.d;
  j["theta_deg"] = rad_to_deg(result.params.theta);
  j["objective"] = result.objective;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["gamma2_stddev"] = result.gamma2_stddev;
  j["low_a_sensitivity"] = result.low_a_sensitivity;
  return j.dump(2) + "\n";
}

CalibrationResult calibration_result_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("calibration JSON: ") + e.what());
  }
  CalibrationResult result;
  try {
    result.params.a = j.at("a").get<double>();
    result.params.b = j.at("b").get<double>();
    result.params.c = j.at("c").get<double>();
    result.params.d = j.at("d").get<double>();
    result.params.theta = deg_to_rad(j.at("theta_deg").get<double>());
    result.objective = j.at("objective").get<double>();
    result.iterations = j.at("iterations").get<int>();
    result.converged = j.at("converged").get<bool>();
    result.gamma2_stddev = j.value("gamma2_stddev", 0.0);
    result.low_a_sensitivity = j.value("low_a_sensitivity", false);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("calibration JSON: ") + e.what());
  }
  return result;
}

}  // namespace wcmkg
