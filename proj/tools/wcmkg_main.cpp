// Command-line entry point: simulate, calibrate, train, predict and
// crossval subcommands over one declarative config file.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcmkg/checkpoint.hpp"
#include "wcmkg/config.hpp"
#include "wcmkg/crossval.hpp"
#include "wcmkg/rng.hpp"

namespace {

namespace fs = std::filesystem;
using namespace wcmkg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;  // optional --out override
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "Run configuration file (INI)")
      ->required();
  cmd->add_option("--set", args.overrides,
                  "Override a config key: section.key=value (repeatable)");
  cmd->add_option("-o,--out", args.out_dir, "Override output.dir");
}

RunConfig load_config(const CommonArgs& args,
                      const std::vector<std::string>& extra = {}) {
  std::vector<std::string> overrides = args.overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (!args.out_dir.empty()) overrides.push_back("output.dir=" + args.out_dir);
  return load_run_config(args.config_path, overrides);
}

std::vector<SiteSeries> load_sites(const RunConfig& cfg) {
  if (!cfg.csv_path.empty()) {
    if (!fs::exists(cfg.csv_path)) {
      throw ConfigError("data.csv: path '" + cfg.csv_path + "' does not exist");
    }
    return load_csv(cfg.csv_path);
  }
  if (cfg.synthetic_enabled) {
    return generate_synthetic(cfg.synthetic).sites;
  }
  throw ConfigError("data.csv: no dataset configured (set data.csv or enable "
                    "data.synthetic)");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

int cmd_simulate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  if (!cfg.synthetic_enabled) {
    throw ConfigError(
        "data.synthetic.enabled: simulate requires the synthetic generator");
  }
  const SyntheticDataset dataset = generate_synthetic(cfg.synthetic);

  ensure_out_dir(cfg.output_dir);
  const fs::path csv = fs::path(cfg.output_dir) / "synthetic.csv";
  write_csv(dataset.sites, csv.string());
  write_text(fs::path(cfg.output_dir) / "synthetic_truth.json",
             synthetic_truth_json(dataset.truth));

  std::size_t samples = 0;
  double sm_lo = 1.0, sm_hi = 0.0;
  for (const SiteSeries& s : dataset.sites) {
    samples += s.size();
    for (const auto& sm : s.sm_ref) {
      if (!sm) continue;
      sm_lo = std::min(sm_lo, *sm);
      sm_hi = std::max(sm_hi, *sm);
    }
  }
  std::fprintf(stderr,
               "simulated %zu sites, %zu samples, reference SM range "
               "[%.3f, %.3f] m^3/m^3\n",
               dataset.sites.size(), samples, sm_lo, sm_hi);
  std::fprintf(stderr, "wrote %s and synthetic_truth.json\n",
               csv.string().c_str());
  return kExitOk;
}

CalibrationProblem make_problem(const std::vector<SiteSeries>& sites,
                                const PhysicsContext& physics,
                                double clamp_floor) {
  CalibrationProblem problem;
  problem.fixed_b = physics.b;
  problem.clamp_floor = clamp_floor;
  for (const SiteSeries& s : sites) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.sm_ref[i]) continue;
      problem.observations.push_back({s.sigma_obs_db[i],
                                      physics.vwc(s.ndvi[i]),
                                      physics.theta_rad(s.incidence_deg[i]),
                                      *s.sm_ref[i]});
    }
  }
  if (problem.observations.empty()) {
    throw ConfigError("data.csv: calibration needs rows with sm_ref present");
  }
  return problem;
}

int cmd_calibrate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::vector<SiteSeries> sites = load_sites(cfg);

  CalibrationSettings settings;
  settings.default_theta = deg_to_rad(cfg.physics.theta_default_deg);
  const CalibrationResult result = calibrate_wcm(
      make_problem(sites, cfg.physics, cfg.training.clamp_floor), settings);

  ensure_out_dir(cfg.output_dir);
  const fs::path out = fs::path(cfg.output_dir) / "calibration.json";
  write_text(out, calibration_result_json(result));

  std::fprintf(stderr,
               "calibrated a=%.6f c=%.3f dB d=%.3f dB/(m^3/m^3), objective "
               "%.3e, %d iterations%s\n",
               result.params.a, result.params.c, result.params.d,
               result.objective, result.iterations,
               result.converged ? "" : " (did not converge)");
  if (result.low_a_sensitivity) {
    std::fprintf(stderr,
                 "warning: attenuation spread %.4f < 0.01; A is weakly "
                 "identified by this dataset\n",
                 result.gamma2_stddev);
  }
  std::fprintf(stderr, "wrote %s\n", out.string().c_str());
  return result.converged ? kExitOk : kExitNonConvergence;
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::vector<SiteSeries> sites = load_sites(cfg);

  TrainConfig tc = cfg.training;
  if (!cfg.calibration_path.empty()) {
    if (!fs::exists(cfg.calibration_path)) {
      throw ConfigError("training.calibration: path '" + cfg.calibration_path +
                        "' does not exist");
    }
    std::ifstream in(cfg.calibration_path);
    std::stringstream ss;
    ss << in.rdbuf();
    tc.init_a = calibration_result_from_json(ss.str()).params.a;
    std::fprintf(stderr, "warm start: init_a = %.6f from %s\n", tc.init_a,
                 cfg.calibration_path.c_str());
  }

  // Site-level split for early stopping.
  std::vector<int> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(tc.seed, 77));
  std::shuffle(order.begin(), order.end(), rng.engine());
  const int n_val = std::max(
      1, static_cast<int>(cfg.train_val_fraction *
                          static_cast<double>(sites.size())));
  if (n_val >= static_cast<int>(sites.size())) {
    throw TooFewSites("training needs at least two sites for a validation split");
  }
  std::vector<const SiteSeries*> val_sites, fit_sites;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (static_cast<int>(i) < n_val ? val_sites : fit_sites)
        .push_back(&sites[order[i]]);
  }

  const StandardizationStats stats = compute_standardization(
      fit_sites, tc.features, cfg.physics, tc.init_a, tc.clamp_floor);
  const SequenceBatch fit_windows =
      build_windows(fit_sites, tc.window, tc.features, stats, cfg.physics);
  const SequenceBatch val_windows =
      build_windows(val_sites, tc.window, tc.features, stats, cfg.physics);

  const TrainResult result =
      train(fit_windows, val_windows, stats, cfg.physics, tc);

  ensure_out_dir(cfg.output_dir);
  const fs::path ckpt = fs::path(cfg.output_dir) / "checkpoint.json";
  save_checkpoint(result.model, ckpt.string());
  write_text(fs::path(cfg.output_dir) / "training_log.jsonl",
             training_log_jsonl(result.log));

  std::fprintf(stderr,
               "trained %d epochs (best %d, val soil MSE %.3e, a=%.6f); wrote "
               "%s and training_log.jsonl\n",
               static_cast<int>(result.log.size()) - 1, result.model.best_epoch,
               result.model.best_val_soil_mse,
               std::exp(result.model.params.log_a), ckpt.string().c_str());
  return kExitOk;
}

int cmd_predict(const CommonArgs& args, const std::string& checkpoint_path) {
  const RunConfig cfg = load_config(args);
  if (cfg.csv_path.empty() && !cfg.synthetic_enabled) {
    throw ConfigError("data.csv: predict needs a dataset");
  }
  const std::vector<SiteSeries> sites = load_sites(cfg);
  const TrainedModel model = load_checkpoint(checkpoint_path);

  std::string csv = "site_id,timestamp,sm_pred\n";
  for (const SiteSeries& s : sites) {
    for (const SitePrediction& p : predict(model, s)) {
      csv += p.site_id;
      csv += ',';
      csv += format_date(p.time);
      csv += ',';
      csv += format_double(p.sm_pred);
      csv += '\n';
    }
  }

  ensure_out_dir(cfg.output_dir);
  const fs::path out = fs::path(cfg.output_dir) / "predictions.csv";
  write_text(out, csv);
  std::fprintf(stderr, "wrote %s\n", out.string().c_str());
  return kExitOk;
}

int cmd_crossval(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::vector<SiteSeries> sites = load_sites(cfg);

  const FoldAssignment folds =
      assign_spatial_folds(sites, cfg.cv_folds, cfg.cv_seed);
  const EvalReport report =
      run_cross_validation(sites, folds, cfg.cv_config());

  ensure_out_dir(cfg.output_dir);
  export_report(report, cfg.output_dir);
  std::fputs(report_summary(report).c_str(), stderr);
  std::fprintf(stderr, "wrote report.json, summary.txt and %d scatter files to %s\n",
               2 * report.fold_count, cfg.output_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Water cloud model soil-moisture retrieval with a knowledge-guided "
      "LSTM: synthetic scenes, parameter calibration, physics-constrained "
      "training and spatial cross-validation."};
  app.require_subcommand(1);
  app.footer(config_reference());

  CommonArgs sim_args, cal_args, train_args, pred_args, cv_args;
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  int threads = -1;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate a synthetic dataset (CSV + ground-truth sidecar)");
  add_common(sim, sim_args);
  CLI::Option* sim_seed =
      sim->add_option("--seed", seed, "Override data.synthetic.seed");

  CLI::App* cal = app.add_subcommand(
      "calibrate", "Fit the water cloud model parameters (A, C, D)");
  add_common(cal, cal_args);

  CLI::App* trn = app.add_subcommand(
      "train", "Train the knowledge-guided LSTM and write a checkpoint");
  add_common(trn, train_args);
  CLI::Option* trn_seed =
      trn->add_option("--seed", seed, "Override training.seed");

  CLI::App* prd = app.add_subcommand(
      "predict", "Predict soil moisture from a checkpoint and a dataset");
  add_common(prd, pred_args);
  prd->add_option("--checkpoint", checkpoint_path, "Model checkpoint JSON")
      ->required();

  CLI::App* cvc = app.add_subcommand(
      "crossval",
      "Spatial k-fold comparison of the calibrated model and the "
      "knowledge-guided LSTM");
  add_common(cvc, cv_args);
  CLI::Option* cv_seed = cvc->add_option("--seed", seed, "Override cv.seed");
  CLI::Option* cv_threads =
      cvc->add_option("--threads", threads, "Override cv.threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      if (*sim_seed) {
        sim_args.overrides.push_back("data.synthetic.seed=" +
                                     std::to_string(seed));
      }
      return cmd_simulate(sim_args);
    }
    if (cal->parsed()) return cmd_calibrate(cal_args);
    if (trn->parsed()) {
      if (*trn_seed) {
        train_args.overrides.push_back("training.seed=" + std::to_string(seed));
      }
      return cmd_train(train_args);
    }
    if (prd->parsed()) return cmd_predict(pred_args, checkpoint_path);
    if (cvc->parsed()) {
      if (*cv_seed) {
        cv_args.overrides.push_back("cv.seed=" + std::to_string(seed));
      }
      if (*cv_threads) {
        cv_args.overrides.push_back("cv.threads=" + std::to_string(threads));
      }
      return cmd_crossval(cv_args);
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const NonFiniteLoss& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
