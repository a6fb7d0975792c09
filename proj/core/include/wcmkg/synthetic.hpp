#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcmkg/data.hpp"
#include "wcmkg/wcm.hpp"

namespace wcmkg {

/// Desk-scale stand-in for a real radar/in-situ campaign: seeded scene with
/// known generating physics, optional saturating soil response and additive
/// dB noise.
struct SyntheticConfig {
  int n_sites = 24;
  int n_timesteps = 90;
  WcmParams true_params{0.02, WcmParams::kGrasslandB, -25.0, 30.0,
                        deg_to_rad(40.0)};
  double vwc_coeff = 1.0;  ///< NDVI -> VWC map used when generating

  // Bounded random walk for soil moisture.
  double sm_min = 0.02;
  double sm_max = 0.45;
  double sm_step_std = 0.02;

  // Seasonal NDVI sinusoid; mid 0.5 / amplitude 0.4 keeps it in [0.1, 0.9].
  double ndvi_mid = 0.5;
  double ndvi_amp = 0.4;

  double incidence_base_deg = 40.0;
  double incidence_jitter_deg = 2.0;

  double noise_db = 0.0;        ///< Gaussian observation noise std (dB)
  bool nonlinear_soil = false;  ///< saturating soil response instead of linear
  double label_fraction = 1.0;  ///< fraction of rows carrying sm_ref

  std::uint64_t seed = 0;
  int cadence_days = 12;  ///< typical revisit cycle
  std::string start_date = "2019-01-01";
  double domain_size = 100.0;  ///< sites scattered in [0, domain_size]^2

  void validate() const;
};

/// Saturating soil response used when nonlinear_soil is on:
/// sigma_soil(dB) = C + D * 0.45 * tanh(SM / 0.25).
double saturating_sm(double sm);

/// Generating record kept alongside the dataset for oracle tests.
struct SyntheticTruth {
  WcmParams params;
  SyntheticConfig config;
  std::vector<std::vector<double>> clean_sigma_db;  ///< per site, per step
  std::vector<std::vector<double>> true_sm;         ///< per site, per step
};

struct SyntheticDataset {
  std::vector<SiteSeries> sites;
  SyntheticTruth truth;
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

/// Sidecar JSON: true parameters, seed and a config echo.
std::string synthetic_truth_json(const SyntheticTruth& truth);

}  // namespace wcmkg
