#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wcmkg/nelder_mead.hpp"
#include "wcmkg/wcm.hpp"

namespace wcmkg {

/// One labeled radar acquisition used to fit the empirical parameters.
struct CalibrationObservation {
  double sigma_obs_db = 0.0;
  double vwc = 0.0;     ///< kg/m^2
  double theta = 0.0;   ///< local incidence angle (radians)
  double sm_ref = 0.0;  ///< reference soil moisture (m^3/m^3)
};

struct CalibrationProblem {
  std::vector<CalibrationObservation> observations;
  double fixed_b = WcmParams::kGrasslandB;
  double clamp_floor = 1e-10;  ///< linear floor for the isolation inside the objective

  /// Box constraints on (log A, C, D), enforced through a quadratic penalty.
  std::array<std::pair<double, double>, 3> bounds{{
      {std::log(1e-5), std::log(10.0)},  // log A
      {-80.0, 20.0},                     // C (dB)
      {0.1, 500.0},                      // D (dB per m^3/m^3)
  }};

  /// Starting point (log A, C, D).
  std::array<double, 3> initial{std::log(0.05), -25.0, 30.0};

  void validate() const;
};

struct CalibrationSettings {
  NelderMeadOptions simplex;     ///< tolerance 1e-10, max 5000 iterations
  double default_theta = deg_to_rad(WcmParams::kDefaultThetaDeg);
  std::uint64_t restart_seed = 1;  ///< jittered restart when the first pass stalls
  double restart_jitter = 0.25;
};

struct CalibrationResult {
  WcmParams params;
  double objective = 0.0;  ///< mean squared SM mismatch ((m^3/m^3)^2)
  int iterations = 0;
  bool converged = false;
  double gamma2_stddev = 0.0;     ///< spread of the attenuation across the data
  bool low_a_sensitivity = false; ///< gamma2_stddev below 0.01: A is weakly identified
};

/// Mean squared mismatch between the closed-form inversion and the reference
/// soil moisture, over all observations. Uses the clamped isolation so noisy
/// observations below the vegetation floor still contribute.
double calibration_objective(double log_a, double c, double d,
                             const CalibrationProblem& problem);

CalibrationResult calibrate_wcm(const CalibrationProblem& problem,
                                const CalibrationSettings& settings = {});

/// JSON document with keys a, b, c, d, theta_deg, objective, iterations,
/// converged (plus the identifiability diagnostic).
std::string calibration_result_json(const CalibrationResult& result);

CalibrationResult calibration_result_from_json(const std::string& text);

}  // namespace wcmkg
