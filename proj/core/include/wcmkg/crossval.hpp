#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcmkg/calibrate.hpp"
#include "wcmkg/context.hpp"
#include "wcmkg/folds.hpp"
#include "wcmkg/metrics.hpp"
#include "wcmkg/train.hpp"

namespace wcmkg {

struct CvConfig {
  std::uint64_t seed = 42;
  double val_fraction = 0.2;  ///< share of training sites held out for early stopping
  int threads = 0;            ///< fold-level parallelism; 0 = machine parallelism
  TrainConfig training;
  PhysicsContext physics;
  NelderMeadOptions calibration;
  double calibration_clamp_floor = 1e-10;

  void validate() const;
};

/// One method's outcome on one test fold, with the prediction-observation
/// pairs behind the metrics.
struct MethodFoldResult {
  MetricSet metrics;
  double fitted_a = 0.0;
  std::vector<double> predicted;
  std::vector<double> observed;
};

struct FoldResult {
  int fold = 0;
  std::vector<std::string> test_sites;
  std::vector<std::string> val_sites;  ///< early-stopping split (from training sites)
  MethodFoldResult wcm;
  MethodFoldResult kg_lstm;
  bool calibration_converged = true;
};

struct EvalReport {
  int fold_count = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  MetricSet pooled_wcm;
  MetricSet pooled_kg;
  bool leakage_checked = false;
};

/// Per fold: calibrates the classical model on the training sites, evaluates
/// its closed-form inversion on the test sites, trains the knowledge-guided
/// model on the same training sites (validation split carved out by site),
/// and evaluates it on the test sites. Pooled metrics concatenate the pairs
/// across folds. Deterministic given seed; folds may run on several threads.
EvalReport run_cross_validation(const std::vector<SiteSeries>& sites,
                                const FoldAssignment& folds,
                                const CvConfig& config);

/// report.json content: method -> fold -> {rmse, r, bias, n, fitted_a},
/// pooled entries, and the fold composition. Byte-deterministic.
std::string report_json(const EvalReport& report);

/// Fixed-width text table, one row per method/fold plus pooled rows.
std::string report_summary(const EvalReport& report);

/// Writes report.json, scatter_fold{f}_{method}.csv (header
/// "predicted,observed") and summary.txt into out_dir.
void export_report(const EvalReport& report, const std::string& out_dir);

}  // namespace wcmkg
