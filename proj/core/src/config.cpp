#include "wcmkg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace wcmkg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

/// Flat "section.key" -> value view over the INI text, tracking which keys
/// were consumed so leftovers can be rejected.
class KeyValueView {
 public:
  void insert(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v{};
    const std::string& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError(key + ": cannot parse number '" + s + "'");
    }
    return v;
  }

  long long get_int(const std::string& key, long long fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v{};
    const std::string& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError(key + ": cannot parse integer '" + s + "'");
    }
    return v;
  }

  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v{};
    const std::string& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError(key + ": cannot parse unsigned integer '" + s + "'");
    }
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": cannot parse boolean '" + s + "'");
  }

  std::vector<std::string> get_list(const std::string& key,
                                    std::vector<std::string> fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  void reject_unknown() const {
    std::vector<std::string> unknown;
    for (const auto& [key, _] : values_) {
      if (!consumed_.count(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
      std::string msg = "unknown configuration key(s):";
      for (const std::string& k : unknown) msg += " " + k;
      throw ConfigError(msg);
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

KeyValueView parse_ini(const std::string& text,
                       const std::vector<std::string>& overrides) {
  KeyValueView view;
  std::string section;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    // Strip comments, then whitespace.
    const auto hash = raw.find_first_of("#;");
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' outside any section");
    }
    view.insert(section + "." + key, value);
  }

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + ov + "': expected section.key=value");
    }
    const std::string key = trim(ov.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      throw ConfigError("override '" + ov + "': key must include its section");
    }
    view.insert(key, trim(ov.substr(eq + 1)));
  }
  return view;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

CvConfig RunConfig::cv_config() const {
  CvConfig cv;
  cv.seed = cv_seed;
  cv.val_fraction = cv_val_fraction;
  cv.threads = cv_threads;
  cv.training = training;
  cv.physics = physics;
  return cv;
}

RunConfig parse_run_config(const std::string& text,
                           const std::vector<std::string>& overrides) {
  KeyValueView v = parse_ini(text, overrides);
  RunConfig cfg;

  // [data]
  cfg.csv_path = v.get_string("data.csv", "");
  cfg.synthetic_enabled =
      v.get_bool("data.synthetic.enabled", v.has("data.synthetic.n_sites"));

  // [data.synthetic]
  SyntheticConfig& syn = cfg.synthetic;
  syn.n_sites = static_cast<int>(v.get_int("data.synthetic.n_sites", syn.n_sites));
  require(syn.n_sites >= 1, "data.synthetic.n_sites", "must be >= 1");
  syn.n_timesteps =
      static_cast<int>(v.get_int("data.synthetic.n_timesteps", syn.n_timesteps));
  require(syn.n_timesteps >= 1, "data.synthetic.n_timesteps", "must be >= 1");
  syn.true_params.a = v.get_double("data.synthetic.true_a", syn.true_params.a);
  require(syn.true_params.a > 0.0, "data.synthetic.true_a", "must be > 0");
  syn.true_params.c = v.get_double("data.synthetic.true_c", syn.true_params.c);
  syn.true_params.d = v.get_double("data.synthetic.true_d", syn.true_params.d);
  require(syn.true_params.d != 0.0, "data.synthetic.true_d", "must be nonzero");
  syn.sm_min = v.get_double("data.synthetic.sm_min", syn.sm_min);
  syn.sm_max = v.get_double("data.synthetic.sm_max", syn.sm_max);
  require(syn.sm_min >= 0.0 && syn.sm_max <= 1.0 && syn.sm_min < syn.sm_max,
          "data.synthetic.sm_min", "need 0 <= sm_min < sm_max <= 1");
  syn.sm_step_std = v.get_double("data.synthetic.sm_step_std", syn.sm_step_std);
  require(syn.sm_step_std >= 0.0, "data.synthetic.sm_step_std", "must be >= 0");
  syn.ndvi_mid = v.get_double("data.synthetic.ndvi_mid", syn.ndvi_mid);
  syn.ndvi_amp = v.get_double("data.synthetic.ndvi_amp", syn.ndvi_amp);
  require(syn.ndvi_mid - syn.ndvi_amp >= -1.0 && syn.ndvi_mid + syn.ndvi_amp <= 1.0,
          "data.synthetic.ndvi_amp", "seasonal NDVI must stay within [-1,1]");
  syn.incidence_base_deg =
      v.get_double("data.synthetic.incidence_base_deg", syn.incidence_base_deg);
  syn.incidence_jitter_deg = v.get_double("data.synthetic.incidence_jitter_deg",
                                          syn.incidence_jitter_deg);
  require(syn.incidence_jitter_deg >= 0.0, "data.synthetic.incidence_jitter_deg",
          "must be >= 0");
  require(syn.incidence_base_deg - syn.incidence_jitter_deg > 0.0 &&
              syn.incidence_base_deg + syn.incidence_jitter_deg < 90.0,
          "data.synthetic.incidence_base_deg", "angles must stay in (0, 90) deg");
  syn.noise_db = v.get_double("data.synthetic.noise_db", syn.noise_db);
  require(syn.noise_db >= 0.0, "data.synthetic.noise_db", "must be >= 0 dB");
  syn.nonlinear_soil =
      v.get_bool("data.synthetic.nonlinear_soil", syn.nonlinear_soil);
  syn.label_fraction =
      v.get_double("data.synthetic.label_fraction", syn.label_fraction);
  require(syn.label_fraction >= 0.0 && syn.label_fraction <= 1.0,
          "data.synthetic.label_fraction", "must lie in [0,1]");
  syn.seed = v.get_uint64("data.synthetic.seed", syn.seed);
  syn.cadence_days =
      static_cast<int>(v.get_int("data.synthetic.cadence_days", syn.cadence_days));
  require(syn.cadence_days >= 1, "data.synthetic.cadence_days", "must be >= 1 day");
  syn.start_date = v.get_string("data.synthetic.start_date", syn.start_date);
  try {
    parse_date(syn.start_date);
  } catch (const SchemaError& e) {
    throw ConfigError(std::string("data.synthetic.start_date: ") + e.what());
  }
  syn.domain_size = v.get_double("data.synthetic.domain_size", syn.domain_size);
  require(syn.domain_size > 0.0, "data.synthetic.domain_size", "must be > 0");

  // [wcm]
  cfg.physics.b = v.get_double("wcm.b", cfg.physics.b);
  require(cfg.physics.b > 0.0, "wcm.b", "must be > 0");
  cfg.physics.theta_default_deg =
      v.get_double("wcm.theta_default_deg", cfg.physics.theta_default_deg);
  require(cfg.physics.theta_default_deg > 0.0 &&
              cfg.physics.theta_default_deg < 90.0,
          "wcm.theta_default_deg", "must lie in (0, 90) degrees");
  cfg.physics.vwc_coeff = v.get_double("wcm.vwc_coeff", cfg.physics.vwc_coeff);
  require(cfg.physics.vwc_coeff > 0.0, "wcm.vwc_coeff",
          "must be > 0 kg/m^2 per NDVI unit");
  // Generation uses the same data conventions as retrieval.
  syn.true_params.b = cfg.physics.b;
  syn.vwc_coeff = cfg.physics.vwc_coeff;

  // [training]
  TrainConfig& t = cfg.training;
  t.window = static_cast<int>(v.get_int("training.window", t.window));
  require(t.window >= 1, "training.window", "must be >= 1 time steps");
  t.hidden = static_cast<int>(v.get_int("training.hidden", t.hidden));
  require(t.hidden >= 1, "training.hidden", "must be >= 1 units");
  t.lambda = v.get_double("training.lambda", t.lambda);
  require(t.lambda >= 0.0, "training.lambda", "must be >= 0");
  t.clamp_floor = v.get_double("training.clamp_floor", t.clamp_floor);
  require(t.clamp_floor > 0.0, "training.clamp_floor",
          "must be > 0 linear power units");
  t.adam.learning_rate =
      v.get_double("training.learning_rate", t.adam.learning_rate);
  require(t.adam.learning_rate > 0.0, "training.learning_rate", "must be > 0");
  t.adam.beta1 = v.get_double("training.beta1", t.adam.beta1);
  t.adam.beta2 = v.get_double("training.beta2", t.adam.beta2);
  require(t.adam.beta1 > 0.0 && t.adam.beta1 < 1.0, "training.beta1",
          "must lie in (0,1)");
  require(t.adam.beta2 > 0.0 && t.adam.beta2 < 1.0, "training.beta2",
          "must lie in (0,1)");
  t.adam.epsilon = v.get_double("training.epsilon", t.adam.epsilon);
  require(t.adam.epsilon > 0.0, "training.epsilon", "must be > 0");
  t.clip_norm = v.get_double("training.clip_norm", t.clip_norm);
  require(t.clip_norm > 0.0, "training.clip_norm", "must be > 0");
  t.batch_size = static_cast<int>(v.get_int("training.batch_size", t.batch_size));
  require(t.batch_size >= 1, "training.batch_size", "must be >= 1");
  t.max_epochs = static_cast<int>(v.get_int("training.max_epochs", t.max_epochs));
  require(t.max_epochs >= 1, "training.max_epochs", "must be >= 1");
  t.patience = static_cast<int>(v.get_int("training.patience", t.patience));
  require(t.patience >= 1, "training.patience", "must be >= 1 epochs");
  t.seed = v.get_uint64("training.seed", t.seed);
  t.init_a = v.get_double("training.init_a", t.init_a);
  require(t.init_a > 0.0, "training.init_a", "must be > 0");
  t.features.aux = v.get_list("training.aux_features", t.features.aux);
  try {
    t.features.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("training.aux_features: ") + e.what());
  }
  cfg.train_val_fraction =
      v.get_double("training.val_fraction", cfg.train_val_fraction);
  require(cfg.train_val_fraction > 0.0 && cfg.train_val_fraction < 1.0,
          "training.val_fraction", "must lie in (0,1)");
  cfg.calibration_path = v.get_string("training.calibration", "");

  // [cv]
  cfg.cv_folds = static_cast<int>(v.get_int("cv.folds", cfg.cv_folds));
  require(cfg.cv_folds >= 2, "cv.folds", "must be >= 2");
  cfg.cv_seed = v.get_uint64("cv.seed", cfg.cv_seed);
  cfg.cv_val_fraction = v.get_double("cv.val_fraction", cfg.cv_val_fraction);
  require(cfg.cv_val_fraction > 0.0 && cfg.cv_val_fraction < 1.0,
          "cv.val_fraction", "must lie in (0,1)");
  cfg.cv_threads = static_cast<int>(v.get_int("cv.threads", cfg.cv_threads));
  require(cfg.cv_threads >= 0, "cv.threads", "must be >= 0 (0 = machine)");

  // [output]
  cfg.output_dir = v.get_string("output.dir", cfg.output_dir);
  require(!cfg.output_dir.empty(), "output.dir", "must not be empty");

  v.reject_unknown();
  return cfg;
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

std::string config_reference() {
  return R"(Configuration keys (INI sections; override any key with --set section.key=value)

[data]
  csv                      path to a site time-series CSV (header:
                           site_id,x,y,timestamp,sigma_obs_db,incidence_deg,
                           ndvi,albedo,clay,sand,silt,awc,sm_ref)

[data.synthetic]           seeded synthetic scene (used when enabled)
  enabled                  bool, turn the generator on (default: on when
                           n_sites is set)
  n_sites                  sites to generate, >= 1 (default 24)
  n_timesteps              acquisitions per site, >= 1 (default 90)
  true_a                   generating vegetation factor, linear, > 0 (0.02)
  true_c                   generating soil intercept, dB (-25)
  true_d                   generating soil slope, dB per m^3/m^3 (30)
  sm_min, sm_max           soil moisture walk bounds, m^3/m^3 (0.02, 0.45)
  sm_step_std              walk step std, m^3/m^3 (0.02)
  ndvi_mid, ndvi_amp       seasonal NDVI sinusoid, dimensionless (0.5, 0.4)
  incidence_base_deg       mean incidence angle, degrees (40)
  incidence_jitter_deg     per-acquisition angle jitter, degrees (2)
  noise_db                 observation noise std, dB, >= 0 (0)
  nonlinear_soil           bool, saturating soil response (false)
  label_fraction           share of rows with reference SM, [0,1] (1)
  seed                     unsigned generator seed (0)
  cadence_days             revisit interval, days, >= 1 (12)
  start_date               first acquisition, ISO-8601 date (2019-01-01)
  domain_size              site coordinate extent, planar units (100)

[wcm]
  b                        vegetation parameter per kg/m^2 VWC, > 0 (0.084)
  theta_default_deg        incidence angle used when a row has none (40)
  vwc_coeff                NDVI -> VWC coefficient, kg/m^2 per unit (1.0)

[training]
  window                   sequence window length, time steps, >= 1 (8)
  hidden                   LSTM hidden units, >= 1 (32)
  lambda                   boundary penalty weight, >= 0 (1.0)
  clamp_floor              isolation floor, linear power, > 0 (1e-10)
  learning_rate            Adam step size, > 0 (0.01)
  beta1, beta2             Adam decay rates, (0,1) (0.9, 0.999)
  epsilon                  Adam denominator guard, > 0 (1e-8)
  clip_norm                global gradient-norm clip, > 0 (5.0)
  batch_size               windows per optimizer step, >= 1 (32)
  max_epochs               epoch budget, >= 1 (500)
  patience                 early-stopping patience, epochs, >= 1 (20)
  seed                     unsigned training seed (0)
  init_a                   starting vegetation factor, > 0 (0.05)
  aux_features             comma list from: ndvi, albedo, clay, sand, silt,
                           awc, doy_sin, doy_cos (default: all)
  val_fraction             site share held out by 'train', (0,1) (0.2)
  calibration              optional calibration JSON to warm-start init_a

[cv]
  folds                    spatial folds, >= 2 (4)
  seed                     unsigned cross-validation seed (42)
  val_fraction             training-site share for early stopping, (0,1) (0.2)
  threads                  fold-level threads, 0 = machine parallelism (0)

[output]
  dir                      output directory (out)
)";
}

}  // namespace wcmkg
