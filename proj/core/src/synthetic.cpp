#include "wcmkg/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "wcmkg/rng.hpp"

namespace wcmkg {

void SyntheticConfig::validate() const {
  if (n_sites < 1) throw InvariantViolation("synthetic: n_sites must be >= 1");
  if (n_timesteps < 1) {
    throw InvariantViolation("synthetic: n_timesteps must be >= 1");
  }
  if (!(noise_db >= 0.0)) {
    throw InvariantViolation("synthetic: noise_db must be >= 0");
  }
  if (!(sm_min >= 0.0 && sm_max <= 1.0 && sm_min < sm_max)) {
    throw InvariantViolation("synthetic: need 0 <= sm_min < sm_max <= 1");
  }
  if (!(label_fraction >= 0.0 && label_fraction <= 1.0)) {
    throw InvariantViolation("synthetic: label_fraction must lie in [0,1]");
  }
  if (cadence_days < 1) {
    throw InvariantViolation("synthetic: cadence_days must be >= 1");
  }
  true_params.validate();
}

double saturating_sm(double sm) { return 0.45 * std::tanh(sm / 0.25); }

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const Date start = parse_date(config.start_date);

  SyntheticDataset out;
  out.truth.params = config.true_params;
  out.truth.config = config;
  out.sites.reserve(config.n_sites);

  for (int s = 0; s < config.n_sites; ++s) {
    // Independent per-site streams so changing one knob does not reshuffle
    // every other site.
    Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(s)));

    SiteSeries site;
    site.site_id = "site" + std::string(s < 10 ? "0" : "") + std::to_string(s);
    site.x = rng.uniform(0.0, config.domain_size);
    site.y = rng.uniform(0.0, config.domain_size);

    double r0 = rng.uniform(0.1, 1.0);
    double r1 = rng.uniform(0.1, 1.0);
    double r2 = rng.uniform(0.1, 1.0);
    const double scale = 0.95 / (r0 + r1 + r2);
    site.soil.clay = r0 * scale;
    site.soil.sand = r1 * scale;
    site.soil.silt = r2 * scale;
    site.soil.awc = rng.uniform(0.05, 0.25);

    const double ndvi_phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double albedo_base = rng.uniform(0.15, 0.25);

    double sm = rng.uniform(config.sm_min, config.sm_max);
    std::vector<double> clean;
    std::vector<double> sm_true;
    clean.reserve(config.n_timesteps);
    sm_true.reserve(config.n_timesteps);

    for (int t = 0; t < config.n_timesteps; ++t) {
      const Date when = start + std::chrono::days{t * config.cadence_days};
      const double doy = static_cast<double>(day_of_year(when));
      const double phase = 2.0 * 3.14159265358979323846 * doy / 365.25;

      const double ndvi =
          config.ndvi_mid + config.ndvi_amp * std::sin(phase + ndvi_phase);
      const double albedo =
          albedo_base + 0.03 * std::sin(phase + ndvi_phase + 1.0);
      const double incidence =
          config.incidence_base_deg +
          rng.uniform(-config.incidence_jitter_deg, config.incidence_jitter_deg);

      const WcmParams p = config.true_params.with_theta(deg_to_rad(incidence));
      const double vwc = vwc_from_ndvi(ndvi, config.vwc_coeff);
      const double sm_effective =
          config.nonlinear_soil ? saturating_sm(sm) : sm;
      const double sigma_clean =
          wcm_forward(SoilMoisture{sm_effective}, vwc, p).value;
      const double sigma =
          sigma_clean + (config.noise_db > 0.0
                             ? rng.normal(0.0, config.noise_db)
                             : 0.0);

      site.timestamps.push_back(when);
      site.sigma_obs_db.push_back(sigma);
      site.incidence_deg.push_back(incidence);
      site.ndvi.push_back(ndvi);
      site.albedo.push_back(albedo);
      const bool labeled = config.label_fraction >= 1.0 ||
                           rng.uniform(0.0, 1.0) < config.label_fraction;
      site.sm_ref.push_back(labeled ? std::optional<double>(sm) : std::nullopt);
      clean.push_back(sigma_clean);
      sm_true.push_back(sm);

      sm = std::clamp(sm + rng.normal(0.0, config.sm_step_std), config.sm_min,
                      config.sm_max);
    }

    site.validate();
    out.truth.clean_sigma_db.push_back(std::move(clean));
    out.truth.true_sm.push_back(std::move(sm_true));
    out.sites.push_back(std::move(site));
  }
  return out;
}

std::string synthetic_truth_json(const SyntheticTruth& truth) {
  const SyntheticConfig& c = truth.config;
  nlohmann::ordered_json j;
  j["true_params"] = {{"a", truth.params.a},
                      {"b", truth.params.b},
                      {"c", truth.params.c},
                      {"d", truth.params.d},
                      {"theta_deg", rad_to_deg(truth.params.theta)}};
  j["seed"] = c.seed;
  j["config"] = {{"n_sites", c.n_sites},
                 {"n_timesteps", c.n_timesteps},
                 {"vwc_coeff", c.vwc_coeff},
                 {"sm_min", c.sm_min},
                 {"sm_max", c.sm_max},
                 {"sm_step_std", c.sm_step_std},
                 {"ndvi_mid", c.ndvi_mid},
                 {"ndvi_amp", c.ndvi_amp},
                 {"incidence_base_deg", c.incidence_base_deg},
                 {"incidence_jitter_deg", c.incidence_jitter_deg},
                 {"noise_db", c.noise_db},
                 {"nonlinear_soil", c.nonlinear_soil},
                 {"label_fraction", c.label_fraction},
                 {"cadence_days", c.cadence_days},
                 {"start_date", c.start_date},
                 {"domain_size", c.domain_size}};
  return j.dump(2) + "\n";
}

}  // namespace wcmkg
