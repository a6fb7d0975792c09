#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcmkg/context.hpp"
#include "wcmkg/data.hpp"

namespace wcmkg {

/// Names and order of the model inputs. Slot 0 is always the isolated soil
/// backscatter; the auxiliary vector follows in the order given here.
struct FeatureSpec {
  static constexpr const char* kSigmaSoil = "sigma_soil";

  std::vector<std::string> aux = default_aux();

  static std::vector<std::string> default_aux() {
    return {"ndvi", "albedo", "clay",    "sand",
            "silt", "awc",    "doy_sin", "doy_cos"};
  }

  int dim() const { return 1 + static_cast<int>(aux.size()); }

  std::vector<std::string> names() const;
  void validate() const;  ///< throws MissingFeature on unknown names
};

/// Frozen per-feature mean/std (population convention, std floored at 1e-8)
/// plus the provenance needed for leakage checks: the sites the statistics
/// were computed from and the vegetation factor the slot-0 isolation used.
struct StandardizationStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> source_sites;  ///< sorted site ids
  double reference_a = 0.05;              ///< a used for the slot-0 isolation
  double clamp_floor = 1e-10;

  static constexpr double kStdFloor = 1e-8;

  bool computed_from(const std::string& site_id) const;
};

/// Windowed, standardized training sequences plus the raw per-step physics
/// inputs the knowledge-guided loss re-isolates from. Immutable once built.
struct SequenceBatch {
  static constexpr int kSigmaSoilFeature = 0;

  /// Time-major standardized inputs: features[t] is (feature_dim x batch).
  std::vector<Eigen::MatrixXd> features;
  /// Reference soil moisture per window; NaN when the row is unlabeled.
  Eigen::VectorXd targets;

  // Raw per-step quantities, (window x batch): observed linear power, the
  // geometric vegetation factor cos(theta)*(1-gamma2), the attenuation, and
  // provenance copies of the dB observation, canopy water and angle.
  Eigen::MatrixXd obs_linear, veg_geom, gamma2;
  Eigen::MatrixXd obs_db, vwc, theta_rad;
  /// 1.0 where the step is a left-pad copy of the earliest observation.
  Eigen::MatrixXd pad_mask;

  std::vector<std::string> site_ids;  ///< per window
  std::vector<Date> end_times;        ///< acquisition time each window ends at

  int window() const { return static_cast<int>(features.size()); }
  int batch() const {
    return features.empty() ? 0 : static_cast<int>(features[0].cols());
  }
  int feature_dim() const {
    return features.empty() ? 0 : static_cast<int>(features[0].rows());
  }
  bool has_targets() const;

  SequenceBatch subset(const std::vector<int>& rows) const;
  static SequenceBatch concat(const std::vector<SequenceBatch>& parts);
  void validate() const;
};

enum class WindowMode {
  kLabeledOnly,    ///< one window ending at each timestamp with sm_ref present
  kAllTimestamps,  ///< one window ending at every acquisition (prediction)
};

/// Per-feature statistics over every timestamp of the given sites. Slot 0 is
/// the soil backscatter isolated with `initial_a` through the clamped path.
StandardizationStats compute_standardization(
    const std::vector<const SiteSeries*>& train_sites, const FeatureSpec& spec,
    const PhysicsContext& ctx, double initial_a, double clamp_floor);

/// Builds windows of length `n` ending at each eligible timestamp of one
/// series. Short histories are left-padded by repeating the earliest
/// observation. Slot 0 holds the standardized isolation at the stats'
/// reference a; the training loss recomputes it from the raw columns with
/// the current a.
SequenceBatch build_windows(const SiteSeries& series, int n,
                            const FeatureSpec& spec,
                            const StandardizationStats& stats,
                            const PhysicsContext& ctx,
                            WindowMode mode = WindowMode::kLabeledOnly);

SequenceBatch build_windows(const std::vector<const SiteSeries*>& sites, int n,
                            const FeatureSpec& spec,
                            const StandardizationStats& stats,
                            const PhysicsContext& ctx,
                            WindowMode mode = WindowMode::kLabeledOnly);

}  // namespace wcmkg
