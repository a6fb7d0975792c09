#include "wcmkg/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "wcmkg/kg_loss.hpp"
#include "wcmkg/rng.hpp"

namespace wcmkg {

void CvConfig::validate() const {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw InvariantViolation("cv: val_fraction must lie in (0,1)");
  }
  if (threads < 0) throw InvariantViolation("cv: threads must be >= 0");
  training.validate();
}

namespace {

std::vector<const SiteSeries*> sites_in_fold(
    const std::vector<SiteSeries>& sites, const FoldAssignment& folds,
    int fold, bool invert) {
  std::vector<const SiteSeries*> out;
  for (const SiteSeries& s : sites) {
    const bool in_fold = folds.site_to_fold.at(s.site_id) == fold;
    if (in_fold != invert) out.push_back(&s);
  }
  return out;
}

CalibrationProblem calibration_problem(
    const std::vector<const SiteSeries*>& train, const PhysicsContext& ctx,
    double clamp_floor) {
  CalibrationProblem problem;
  problem.fixed_b = ctx.b;
  problem.clamp_floor = clamp_floor;
  for (const SiteSeries* s : train) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!s->sm_ref[i]) continue;
      CalibrationObservation o;
      o.sigma_obs_db = s->sigma_obs_db[i];
      o.vwc = ctx.vwc(s->ndvi[i]);
      o.theta = ctx.theta_rad(s->incidence_deg[i]);
      o.sm_ref = *s->sm_ref[i];
      problem.observations.push_back(o);
    }
  }
  return problem;
}

/// Classical baseline: closed-form inversion of every labeled test row.
MethodFoldResult evaluate_wcm(const std::vector<const SiteSeries*>& test,
                              const WcmParams& fitted,
                              const PhysicsContext& ctx, double clamp_floor) {
  MethodFoldResult out;
  out.fitted_a = fitted.a;
  for (const SiteSeries* s : test) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!s->sm_ref[i]) continue;
      const WcmParams p = fitted.with_theta(ctx.theta_rad(s->incidence_deg[i]));
      const SoilMoisture sm = wcm_invert_sm_clamped(
          Decibel{s->sigma_obs_db[i]}, ctx.vwc(s->ndvi[i]), p, clamp_floor);
      out.predicted.push_back(sm.value);
      out.observed.push_back(*s->sm_ref[i]);
    }
  }
  if (out.predicted.empty()) {
    throw EmptyInput("cross-validation: test fold has no labeled rows");
  }
  out.metrics = compute_metrics(out.predicted, out.observed);
  return out;
}

void assert_no_leakage(const StandardizationStats& stats,
                       const std::vector<const SiteSeries*>& test, int fold) {
  for (const SiteSeries* s : test) {
    if (stats.computed_from(s->site_id)) {
      throw InvariantViolation("leakage: statistics for fold " +
                               std::to_string(fold) +
                               " were computed from test site '" + s->site_id +
                               "'");
    }
  }
}

FoldResult run_fold(const std::vector<SiteSeries>& sites,
                    const FoldAssignment& folds, int fold,
                    const CvConfig& config) {
  FoldResult result;
  result.fold = fold;

  const std::vector<const SiteSeries*> test =
      sites_in_fold(sites, folds, fold, false);
  const std::vector<const SiteSeries*> train_sites =
      sites_in_fold(sites, folds, fold, true);
  for (const SiteSeries* s : test) result.test_sites.push_back(s->site_id);
  std::sort(result.test_sites.begin(), result.test_sites.end());

  // Classical baseline, calibrated on training sites only.
  CalibrationProblem problem =
      calibration_problem(train_sites, config.physics, config.calibration_clamp_floor);
  CalibrationSettings settings;
  settings.simplex = config.calibration;
  settings.default_theta = deg_to_rad(config.physics.theta_default_deg);
  const CalibrationResult calib = calibrate_wcm(problem, settings);
  result.calibration_converged = calib.converged;
  result.wcm = evaluate_wcm(test, calib.params, config.physics,
                            config.calibration_clamp_floor);

  // Early-stopping split by site within the training fold.
  std::vector<int> order(train_sites.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(fold)));
  std::shuffle(order.begin(), order.end(), rng.engine());
  const int n_val = std::max(
      1, static_cast<int>(std::floor(config.val_fraction *
                                     static_cast<double>(train_sites.size()))));
  if (n_val >= static_cast<int>(train_sites.size())) {
    throw TooFewSites("fold " + std::to_string(fold) +
                      ": not enough training sites for a validation split");
  }
  std::vector<const SiteSeries*> val_sites, fit_sites;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (static_cast<int>(i) < n_val) {
      val_sites.push_back(train_sites[order[i]]);
    } else {
      fit_sites.push_back(train_sites[order[i]]);
    }
  }
  for (const SiteSeries* s : val_sites) result.val_sites.push_back(s->site_id);
  std::sort(result.val_sites.begin(), result.val_sites.end());

  // Knowledge-guided model, warm-started from the calibrated A.
  TrainConfig tc = config.training;
  tc.init_a = calib.params.a;
  tc.seed = Rng::derive(config.seed, 2000 + static_cast<std::uint64_t>(fold));

  const StandardizationStats stats =
      compute_standardization(fit_sites, tc.features, config.physics, tc.init_a,
                              tc.clamp_floor);
  assert_no_leakage(stats, test, fold);

  const SequenceBatch fit_windows = build_windows(
      fit_sites, tc.window, tc.features, stats, config.physics);
  const SequenceBatch val_windows = build_windows(
      val_sites, tc.window, tc.features, stats, config.physics);

  const TrainResult trained =
      train(fit_windows, val_windows, stats, config.physics, tc);

  const SequenceBatch test_windows = build_windows(
      test, tc.window, tc.features, stats, config.physics);
  if (test_windows.batch() == 0) {
    throw EmptyInput("cross-validation: test fold has no labeled rows");
  }
  const Eigen::VectorXd pred = kg_predict(test_windows, trained.model.params,
                                          stats, tc.clamp_floor);
  result.kg_lstm.fitted_a = std::exp(trained.model.params.log_a);
  for (int j = 0; j < test_windows.batch(); ++j) {
    result.kg_lstm.predicted.push_back(pred[j]);
    result.kg_lstm.observed.push_back(test_windows.targets[j]);
  }
  result.kg_lstm.metrics =
      compute_metrics(result.kg_lstm.predicted, result.kg_lstm.observed);
  return result;
}

MetricSet pooled_metrics(const std::vector<FoldResult>& folds, bool kg) {
  std::vector<double> pred, obs;
  for (const FoldResult& f : folds) {
    const MethodFoldResult& m = kg ? f.kg_lstm : f.wcm;
    pred.insert(pred.end(), m.predicted.begin(), m.predicted.end());
    obs.insert(obs.end(), m.observed.begin(), m.observed.end());
  }
  return compute_metrics(pred, obs);
}

}  // namespace

EvalReport run_cross_validation(const std::vector<SiteSeries>& sites,
                                const FoldAssignment& folds,
                                const CvConfig& config) {
  config.validate();
  folds.validate(sites);

  EvalReport report;
  report.fold_count = folds.fold_count;
  report.seed = config.seed;
  report.folds.resize(folds.fold_count);

  int threads = config.threads;
  if (threads == 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads == 0) threads = 1;
  }
  threads = std::min(threads, folds.fold_count);

  if (threads <= 1) {
    for (int f = 0; f < folds.fold_count; ++f) {
      report.folds[f] = run_fold(sites, folds, f, config);
    }
  } else {
    // Folds are independent; results land in their own slots and the merge
    // order is fixed, so the thread count cannot change the report.
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(folds.fold_count);
    auto worker = [&]() {
      for (int f = next.fetch_add(1); f < folds.fold_count;
           f = next.fetch_add(1)) {
        try {
          report.folds[f] = run_fold(sites, folds, f, config);
        } catch (...) {
          errors[f] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (int f = 0; f < folds.fold_count; ++f) {
      if (errors[f]) {
        try {
          std::rethrow_exception(errors[f]);
        } catch (const Error& e) {
          throw Error("fold " + std::to_string(f) + ": " + e.what());
        }
      }
    }
  }

  report.pooled_wcm = pooled_metrics(report.folds, false);
  report.pooled_kg = pooled_metrics(report.folds, true);
  report.leakage_checked = true;
  return report;
}

namespace {

nlohmann::ordered_json metric_json(const MetricSet& m, double fitted_a) {
  nlohmann::ordered_json j;
  j["rmse"] = m.rmse;
  if (m.pearson_r) {
    j["r"] = *m.pearson_r;
  } else {
    j["r"] = nullptr;
  }
  j["bias"] = m.bias;
  j["n"] = m.n;
  if (fitted_a > 0.0) j["fitted_a"] = fitted_a;
  return j;
}

std::string format_metric_row(const std::string& method,
                              const std::string& fold, const MetricSet& m,
                              double fitted_a) {
  char r_str[32] = "missing";
  if (m.pearson_r) std::snprintf(r_str, sizeof(r_str), "%.4f", *m.pearson_r);
  char a_str[32] = "-";
  if (fitted_a > 0.0) std::snprintf(a_str, sizeof(a_str), "%.6f", fitted_a);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %-7s %6d %10.4f %10s %10.4f %12s\n",
                method.c_str(), fold.c_str(), m.n, m.rmse, r_str, m.bias,
                a_str);
  return buf;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["fold_count"] = report.fold_count;
  j["seed"] = report.seed;
  j["leakage_checked"] = report.leakage_checked;

  nlohmann::ordered_json wcm_folds, kg_folds, test_sites, val_sites;
  for (const FoldResult& f : report.folds) {
    const std::string key = std::to_string(f.fold);
    wcm_folds[key] = metric_json(f.wcm.metrics, f.wcm.fitted_a);
    kg_folds[key] = metric_json(f.kg_lstm.metrics, f.kg_lstm.fitted_a);
    test_sites[key] = f.test_sites;
    val_sites[key] = f.val_sites;
  }
  j["methods"]["wcm"]["folds"] = wcm_folds;
  j["methods"]["wcm"]["pooled"] = metric_json(report.pooled_wcm, 0.0);
  j["methods"]["kg_lstm"]["folds"] = kg_folds;
  j["methods"]["kg_lstm"]["pooled"] = metric_json(report.pooled_kg, 0.0);
  j["test_sites"] = test_sites;
  j["val_sites"] = val_sites;
  return j.dump(2) + "\n";
}

std::string report_summary(const EvalReport& report) {
  std::string out =
      "method   fold         n       rmse          r       bias     fitted_a\n";
  for (const FoldResult& f : report.folds) {
    out += format_metric_row("wcm", std::to_string(f.fold), f.wcm.metrics,
                             f.wcm.fitted_a);
  }
  out += format_metric_row("wcm", "pooled", report.pooled_wcm, 0.0);
  for (const FoldResult& f : report.folds) {
    out += format_metric_row("kg_lstm", std::to_string(f.fold),
                             f.kg_lstm.metrics, f.kg_lstm.fitted_a);
  }
  out += format_metric_row("kg_lstm", "pooled", report.pooled_kg, 0.0);
  return out;
}

void export_report(const EvalReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir + "'");

  auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
  };

  write_file("report.json", report_json(report));
  write_file("summary.txt", report_summary(report));

  for (const FoldResult& f : report.folds) {
    for (const bool kg : {false, true}) {
      const MethodFoldResult& m = kg ? f.kg_lstm : f.wcm;
      std::string csv = "predicted,observed\n";
      for (std::size_t i = 0; i < m.predicted.size(); ++i) {
        csv += format_double(m.predicted[i]);
        csv += ',';
        csv += format_double(m.observed[i]);
        csv += '\n';
      }
      write_file("scatter_fold" + std::to_string(f.fold) + "_" +
                     (kg ? "kg_lstm" : "wcm") + ".csv",
                 csv);
    }
  }
}

}  // namespace wcmkg
