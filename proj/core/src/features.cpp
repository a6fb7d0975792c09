#include "wcmkg/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wcmkg {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

/// Raw (unstandardized) auxiliary feature value for one row.
double aux_value(const std::string& name, const SiteSeries& s, std::size_t i) {
  if (name == "ndvi") return s.ndvi[i];
  if (name == "albedo") return s.albedo[i];
  if (name == "clay") return s.soil.clay;
  if (name == "sand") return s.soil.sand;
  if (name == "silt") return s.soil.silt;
  if (name == "awc") return s.soil.awc;
  if (name == "doy_sin") {
    return std::sin(kTwoPi * day_of_year(s.timestamps[i]) / 365.25);
  }
  if (name == "doy_cos") {
    return std::cos(kTwoPi * day_of_year(s.timestamps[i]) / 365.25);
  }
  throw MissingFeature("unknown feature '" + name + "'");
}

}  // namespace

std::vector<std::string> FeatureSpec::names() const {
  std::vector<std::string> out{kSigmaSoil};
  out.insert(out.end(), aux.begin(), aux.end());
  return out;
}

void FeatureSpec::validate() const {
  const std::set<std::string> known{"ndvi", "albedo", "clay",    "sand",
                                    "silt", "awc",    "doy_sin", "doy_cos"};
  std::set<std::string> seen;
  for (const std::string& name : aux) {
    if (!known.count(name)) {
      throw MissingFeature("unknown auxiliary feature '" + name + "'");
    }
    if (!seen.insert(name).second) {
      throw InvariantViolation("duplicate auxiliary feature '" + name + "'");
    }
  }
}

bool StandardizationStats::computed_from(const std::string& site_id) const {
  return std::binary_search(source_sites.begin(), source_sites.end(), site_id);
}

bool SequenceBatch::has_targets() const {
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (!std::isfinite(targets[i])) return false;
  }
  return targets.size() > 0;
}

SequenceBatch SequenceBatch::subset(const std::vector<int>& rows) const {
  SequenceBatch out;
  const int w = window();
  const int b = static_cast<int>(rows.size());
  out.features.assign(w, Eigen::MatrixXd(feature_dim(), b));
  out.targets.resize(b);
  out.obs_linear.resize(w, b);
  out.veg_geom.resize(w, b);
  out.gamma2.resize(w, b);
  out.obs_db.resize(w, b);
  out.vwc.resize(w, b);
  out.theta_rad.resize(w, b);
  out.pad_mask.resize(w, b);
  out.site_ids.resize(b);
  out.end_times.resize(b);
  for (int j = 0; j < b; ++j) {
    const int src = rows[j];
    if (src < 0 || src >= batch()) {
      throw DimensionMismatch("SequenceBatch::subset: row out of range");
    }
    for (int t = 0; t < w; ++t) out.features[t].col(j) = features[t].col(src);
    out.targets[j] = targets[src];
    out.obs_linear.col(j) = obs_linear.col(src);
    out.veg_geom.col(j) = veg_geom.col(src);
    out.gamma2.col(j) = gamma2.col(src);
    out.obs_db.col(j) = obs_db.col(src);
    out.vwc.col(j) = vwc.col(src);
    out.theta_rad.col(j) = theta_rad.col(src);
    out.pad_mask.col(j) = pad_mask.col(src);
    out.site_ids[j] = site_ids[src];
    out.end_times[j] = end_times[src];
  }
  return out;
}

SequenceBatch SequenceBatch::concat(const std::vector<SequenceBatch>& parts) {
  std::vector<const SequenceBatch*> nonempty;
  for (const auto& p : parts) {
    if (p.batch() > 0) nonempty.push_back(&p);
  }
  if (nonempty.empty()) return SequenceBatch{};

  const int w = nonempty[0]->window();
  const int d = nonempty[0]->feature_dim();
  int total = 0;
  for (const auto* p : nonempty) {
    if (p->window() != w || p->feature_dim() != d) {
      throw DimensionMismatch("SequenceBatch::concat: mixed window shapes");
    }
    total += p->batch();
  }

  SequenceBatch out;
  out.features.assign(w, Eigen::MatrixXd(d, total));
  out.targets.resize(total);
  out.obs_linear.resize(w, total);
  out.veg_geom.resize(w, total);
  out.gamma2.resize(w, total);
  out.obs_db.resize(w, total);
  out.vwc.resize(w, total);
  out.theta_rad.resize(w, total);
  out.pad_mask.resize(w, total);
  out.site_ids.reserve(total);
  out.end_times.reserve(total);

  int offset = 0;
  for (const auto* p : nonempty) {
    const int b = p->batch();
    for (int t = 0; t < w; ++t) {
      out.features[t].middleCols(offset, b) = p->features[t];
    }
    out.targets.segment(offset, b) = p->targets;
    out.obs_linear.middleCols(offset, b) = p->obs_linear;
    out.veg_geom.middleCols(offset, b) = p->veg_geom;
    out.gamma2.middleCols(offset, b) = p->gamma2;
    out.obs_db.middleCols(offset, b) = p->obs_db;
    out.vwc.middleCols(offset, b) = p->vwc;
    out.theta_rad.middleCols(offset, b) = p->theta_rad;
    out.pad_mask.middleCols(offset, b) = p->pad_mask;
    out.site_ids.insert(out.site_ids.end(), p->site_ids.begin(),
                        p->site_ids.end());
    out.end_times.insert(out.end_times.end(), p->end_times.begin(),
                         p->end_times.end());
    offset += b;
  }
  return out;
}

void SequenceBatch::validate() const {
  const int w = window();
  const int b = batch();
  if (w == 0 || b == 0) throw EmptyBatch("empty sequence batch");
  auto check = [&](const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != w || m.cols() != b) {
      throw DimensionMismatch(std::string("SequenceBatch: ") + what +
                              " shape mismatch");
    }
  };
  check(obs_linear, "obs_linear");
  check(veg_geom, "veg_geom");
  check(gamma2, "gamma2");
  check(obs_db, "obs_db");
  check(vwc, "vwc");
  check(theta_rad, "theta_rad");
  check(pad_mask, "pad_mask");
  if (static_cast<int>(site_ids.size()) != b ||
      static_cast<int>(end_times.size()) != b ||
      static_cast<int>(targets.size()) != b) {
    throw DimensionMismatch("SequenceBatch: per-window metadata length");
  }
  for (const auto& f : features) {
    if (!f.allFinite()) {
      throw InvariantViolation("SequenceBatch: non-finite feature value");
    }
  }
}

StandardizationStats compute_standardization(
    const std::vector<const SiteSeries*>& train_sites, const FeatureSpec& spec,
    const PhysicsContext& ctx, double initial_a, double clamp_floor) {
  if (train_sites.empty()) {
    throw EmptyInput("compute_standardization: no training sites");
  }
  spec.validate();

  const std::vector<std::string> names = spec.names();
  const std::size_t dim = names.size();
  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  std::size_t count = 0;

  for (const SiteSeries* site : train_sites) {
    for (std::size_t i = 0; i < site->size(); ++i) {
      const WcmParams p =
          ctx.wcm_at(initial_a, 0.0, 1.0, site->incidence_deg[i]);
      const double soil_db =
          isolate_soil_backscatter_clamped(Decibel{site->sigma_obs_db[i]},
                                           ctx.vwc(site->ndvi[i]), initial_a, p,
                                           clamp_floor)
              .soil_db.value;
      sum[0] += soil_db;
      sum_sq[0] += soil_db * soil_db;
      for (std::size_t k = 0; k < spec.aux.size(); ++k) {
        const double v = aux_value(spec.aux[k], *site, i);
        sum[k + 1] += v;
        sum_sq[k + 1] += v * v;
      }
      ++count;
    }
  }
  if (count == 0) {
    throw EmptyInput("compute_standardization: training sites have no rows");
  }

  StandardizationStats stats;
  stats.names = names;
  stats.mean.resize(dim);
  stats.stddev.resize(dim);
  const double n = static_cast<double>(count);
  for (std::size_t k = 0; k < dim; ++k) {
    stats.mean[k] = sum[k] / n;
    const double var = std::max(0.0, sum_sq[k] / n - stats.mean[k] * stats.mean[k]);
    stats.stddev[k] = std::max(std::sqrt(var), StandardizationStats::kStdFloor);
  }
  stats.reference_a = initial_a;
  stats.clamp_floor = clamp_floor;
  for (const SiteSeries* site : train_sites) {
    stats.source_sites.push_back(site->site_id);
  }
  std::sort(stats.source_sites.begin(), stats.source_sites.end());
  return stats;
}

SequenceBatch build_windows(const SiteSeries& series, int n,
                            const FeatureSpec& spec,
                            const StandardizationStats& stats,
                            const PhysicsContext& ctx, WindowMode mode) {
  if (n < 1) throw InvariantViolation("window length must be >= 1");
  spec.validate();
  if (stats.names != spec.names()) {
    throw MissingFeature("standardization statistics do not match the feature spec");
  }

  std::vector<int> ends;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (mode == WindowMode::kAllTimestamps || series.sm_ref[i].has_value()) {
      ends.push_back(static_cast<int>(i));
    }
  }

  SequenceBatch out;
  const int b = static_cast<int>(ends.size());
  if (b == 0) return out;
  const int d = spec.dim();
  out.features.assign(n, Eigen::MatrixXd(d, b));
  out.targets.resize(b);
  out.obs_linear.resize(n, b);
  out.veg_geom.resize(n, b);
  out.gamma2.resize(n, b);
  out.obs_db.resize(n, b);
  out.vwc.resize(n, b);
  out.theta_rad.resize(n, b);
  out.pad_mask.resize(n, b);
  out.site_ids.assign(b, series.site_id);
  out.end_times.resize(b);

  for (int j = 0; j < b; ++j) {
    const int end = ends[j];
    out.end_times[j] = series.timestamps[end];
    out.targets[j] = series.sm_ref[end] ? *series.sm_ref[end]
                                        : std::numeric_limits<double>::quiet_NaN();
    for (int t = 0; t < n; ++t) {
      const int raw = end - (n - 1) + t;
      const int i = std::max(raw, 0);  // left-pad with the earliest row
      const double theta = ctx.theta_rad(series.incidence_deg[i]);
      const double vwc = ctx.vwc(series.ndvi[i]);
      const VegState veg =
          attenuation(vwc, ctx.wcm_at(stats.reference_a, 0.0, 1.0,
                                      series.incidence_deg[i]));
      const double obs_lin = db_to_linear(Decibel{series.sigma_obs_db[i]}).value;
      const double geom = std::cos(theta) * (1.0 - veg.gamma2);

      out.obs_linear(t, j) = obs_lin;
      out.veg_geom(t, j) = geom;
      out.gamma2(t, j) = veg.gamma2;
      out.obs_db(t, j) = series.sigma_obs_db[i];
      out.vwc(t, j) = vwc;
      out.theta_rad(t, j) = theta;
      out.pad_mask(t, j) = raw < 0 ? 1.0 : 0.0;

      const double residual = obs_lin - stats.reference_a * geom;
      const double floored = residual > stats.clamp_floor ? residual
                                                          : stats.clamp_floor;
      const double soil_db = 10.0 * std::log10(floored / veg.gamma2);
      out.features[t](SequenceBatch::kSigmaSoilFeature, j) =
          (soil_db - stats.mean[0]) / stats.stddev[0];
      for (std::size_t k = 0; k < spec.aux.size(); ++k) {
        out.features[t](static_cast<int>(k) + 1, j) =
            (aux_value(spec.aux[k], series, static_cast<std::size_t>(i)) -
             stats.mean[k + 1]) /
            stats.stddev[k + 1];
      }
    }
  }
  out.validate();
  return out;
}

SequenceBatch build_windows(const std::vector<const SiteSeries*>& sites, int n,
                            const FeatureSpec& spec,
                            const StandardizationStats& stats,
                            const PhysicsContext& ctx, WindowMode mode) {
  std::vector<SequenceBatch> parts;
  parts.reserve(sites.size());
  for (const SiteSeries* s : sites) {
    parts.push_back(build_windows(*s, n, spec, stats, ctx, mode));
  }
  return SequenceBatch::concat(parts);
}

}  // namespace wcmkg
