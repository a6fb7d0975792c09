#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wcmkg/checkpoint.hpp"
#include "wcmkg/kg_loss.hpp"
#include "wcmkg/synthetic.hpp"
#include "wcmkg/train.hpp"

using namespace wcmkg;

namespace {

struct TrainFixture {
  std::vector<SiteSeries> sites;
  std::vector<const SiteSeries*> fit_sites;
  std::vector<const SiteSeries*> val_sites;
  StandardizationStats stats;
  SequenceBatch fit_windows;
  SequenceBatch val_windows;
  PhysicsContext physics;
  TrainConfig config;
};

TrainFixture make_fixture(bool nonlinear, double noise_db, int n_sites,
                          int n_steps, const TrainConfig& tc,
                          std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n_sites = n_sites;
  cfg.n_timesteps = n_steps;
  cfg.noise_db = noise_db;
  cfg.nonlinear_soil = nonlinear;
  cfg.seed = seed;

  TrainFixture f;
  f.config = tc;
  f.sites = generate_synthetic(cfg).sites;
  f.physics.vwc_coeff = cfg.vwc_coeff;
  const int n_val = std::max(1, n_sites / 5);
  for (int i = 0; i < n_sites; ++i) {
    (i < n_val ? f.val_sites : f.fit_sites).push_back(&f.sites[i]);
  }
  f.stats = compute_standardization(f.fit_sites, tc.features, f.physics,
                                    tc.init_a, tc.clamp_floor);
  f.fit_windows = build_windows(f.fit_sites, tc.window, tc.features, f.stats,
                                f.physics);
  f.val_windows = build_windows(f.val_sites, tc.window, tc.features, f.stats,
                                f.physics);
  return f;
}

TrainConfig quick_config() {
  TrainConfig tc;
  tc.window = 6;
  tc.hidden = 16;
  tc.max_epochs = 200;
  tc.patience = 200;  // no early stop: measure raw convergence
  tc.seed = 3;
  tc.init_a = 0.02;
  return tc;
}

}  // namespace

TEST_CASE("training halves the validation soil MSE on clean data") {
  const TrainConfig tc = quick_config();
  const TrainFixture f = make_fixture(false, 0.0, 8, 40, tc, 61);
  const TrainResult r =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  REQUIRE(r.log.size() >= 2);
  const double epoch0 = r.log.front().val_soil_mse;
  CHECK(r.model.best_val_soil_mse <= 0.5 * epoch0);
  CHECK(r.model.best_epoch > 0);
  // Positivity of the learned vegetation factor, by construction.
  CHECK(std::exp(r.model.params.log_a) > 0.0);
  for (const TrainLogRow& row : r.log) CHECK(row.a > 0.0);
}

TEST_CASE("training is deterministic given the seed") {
  TrainConfig tc = quick_config();
  tc.max_epochs = 12;
  const TrainFixture f = make_fixture(true, 0.4, 6, 24, tc, 62);
  const TrainResult r1 =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);
  const TrainResult r2 =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  CHECK(training_log_jsonl(r1.log) == training_log_jsonl(r2.log));

  std::vector<double> a, b;
  r1.model.params.for_each_block(
      [&](const std::string&, const double* d, std::int64_t n) {
        a.insert(a.end(), d, d + n);
      });
  r2.model.params.for_each_block(
      [&](const std::string&, const double* d, std::int64_t n) {
        b.insert(b.end(), d, d + n);
      });
  CHECK(a == b);
}

TEST_CASE("strong boundary pressure keeps predictions inside [0,1]") {
  TrainConfig tc = quick_config();
  tc.lambda = 10.0;
  tc.max_epochs = 120;
  const TrainFixture f = make_fixture(true, 0.5, 8, 40, tc, 63);
  const TrainResult r =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  const Eigen::VectorXd pred = kg_predict(f.val_windows, r.model.params,
                                          f.stats, tc.clamp_floor);
  int outside = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0.0 || pred[i] > 1.0) ++outside;
  }
  CHECK(static_cast<double>(outside) / pred.size() < 0.01);
}

TEST_CASE("early stopping returns the best-validation checkpoint") {
  TrainConfig tc = quick_config();
  tc.max_epochs = 60;
  tc.patience = 5;
  const TrainFixture f = make_fixture(true, 0.6, 6, 30, tc, 64);
  const TrainResult r =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  double best = r.log.front().val_soil_mse;
  for (const TrainLogRow& row : r.log) best = std::min(best, row.val_soil_mse);
  CHECK(r.model.best_val_soil_mse == best);

  const Eigen::VectorXd pred = kg_predict(f.val_windows, r.model.params,
                                          f.stats, tc.clamp_floor);
  CHECK(baseline_mse_loss(pred, f.val_windows.targets) ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("exploding steps abort with a non-finite-loss diagnostic") {
  TrainConfig tc = quick_config();
  tc.adam.learning_rate = 1e200;  // one Adam step puts the head near 1e200
  tc.clip_norm = 1e18;
  tc.max_epochs = 50;
  const TrainFixture f = make_fixture(false, 0.0, 6, 20, tc, 65);
  CHECK_THROWS_AS(train(f.fit_windows, f.val_windows, f.stats, f.physics, tc),
                  NonFiniteLoss);
}

TEST_CASE("train input validation") {
  TrainConfig tc = quick_config();
  const TrainFixture f = make_fixture(false, 0.0, 6, 20, tc, 66);
  CHECK_THROWS_AS(train(SequenceBatch{}, f.val_windows, f.stats, f.physics, tc),
                  EmptyBatch);
  TrainConfig bad = tc;
  bad.window = 0;
  CHECK_THROWS_AS(train(f.fit_windows, f.val_windows, f.stats, f.physics, bad),
                  InvariantViolation);
}

TEST_CASE("predict: alignment, padding flags and training consistency") {
  TrainConfig tc = quick_config();
  tc.max_epochs = 30;
  const TrainFixture f = make_fixture(false, 0.2, 6, 25, tc, 67);
  const TrainResult r =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  const SiteSeries& site = *f.fit_sites.front();
  const std::vector<SitePrediction> preds = predict(r.model, site);
  REQUIRE(preds.size() == site.size());  // aligned 1:1 with acquisitions
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].time == site.timestamps[i]);
    CHECK(preds[i].site_id == site.site_id);
  }
  // Early windows are padded, late ones are not.
  CHECK(preds.front().padded);
  CHECK_FALSE(preds.back().padded);

  // Predictions agree with a direct forward pass over training-style windows.
  const SequenceBatch windows =
      build_windows(site, tc.window, tc.features, f.stats, f.physics,
                    WindowMode::kAllTimestamps);
  const Eigen::VectorXd direct = kg_predict(windows, r.model.params, f.stats,
                                            tc.clamp_floor);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].sm_pred == direct[static_cast<int>(i)]);
  }
}

TEST_CASE("constant input series give constant predictions") {
  SiteSeries site;
  site.site_id = "const";
  site.soil = {0.3, 0.4, 0.2, 0.15};
  for (int i = 0; i < 12; ++i) {
    site.timestamps.push_back(parse_date("2019-01-01") +
                              std::chrono::days{12 * i});
    site.sigma_obs_db.push_back(-18.0);
    site.incidence_deg.push_back(40.0);
    site.ndvi.push_back(0.5);
    site.albedo.push_back(0.2);
    site.sm_ref.push_back(0.25);
  }

  TrainConfig tc = quick_config();
  tc.window = 4;
  PhysicsContext physics;
  const StandardizationStats stats = compute_standardization(
      {&site}, tc.features, physics, tc.init_a, tc.clamp_floor);

  TrainedModel model;
  model.params = LstmParams::init({tc.features.dim(), tc.hidden}, 5, tc.init_a);
  model.stats = stats;
  model.config = tc;
  model.physics = physics;
  model.optimizer = AdamState::zeros(model.params.dims());

  const std::vector<SitePrediction> preds = predict(model, site);
  REQUIRE(preds.size() == 12);
  // Once windows contain no padding the inputs repeat exactly; doy features
  // differ across the year, so compare two dates one full cycle apart would
  // be needed for exact equality. Instead drop the seasonal features.
  TrainConfig flat = tc;
  flat.features.aux = {"ndvi", "albedo", "clay", "sand", "silt", "awc"};
  const StandardizationStats flat_stats = compute_standardization(
      {&site}, flat.features, physics, flat.init_a, flat.clamp_floor);
  TrainedModel flat_model;
  flat_model.params =
      LstmParams::init({flat.features.dim(), flat.hidden}, 5, flat.init_a);
  flat_model.stats = flat_stats;
  flat_model.config = flat;
  flat_model.physics = physics;
  flat_model.optimizer = AdamState::zeros(flat_model.params.dims());
  const std::vector<SitePrediction> flat_preds = predict(flat_model, site);
  for (std::size_t i = 4; i < flat_preds.size(); ++i) {
    CHECK(flat_preds[i].sm_pred ==
          doctest::Approx(flat_preds[3].sm_pred).epsilon(1e-14));
  }
}

TEST_CASE("checkpoint round-trip preserves the model bit-for-bit") {
  TrainConfig tc = quick_config();
  tc.max_epochs = 10;
  const TrainFixture f = make_fixture(true, 0.4, 6, 20, tc, 68);
  const TrainResult r =
      train(f.fit_windows, f.val_windows, f.stats, f.physics, tc);

  const std::string path =
      (std::filesystem::temp_directory_path() / "wcmkg_ckpt.json").string();
  save_checkpoint(r.model, path);
  const TrainedModel back = load_checkpoint(path);

  std::vector<double> a, b;
  r.model.params.for_each_block(
      [&](const std::string&, const double* d, std::int64_t n) {
        a.insert(a.end(), d, d + n);
      });
  back.params.for_each_block(
      [&](const std::string&, const double* d, std::int64_t n) {
        b.insert(b.end(), d, d + n);
      });
  CHECK(a == b);
  CHECK(back.stats.mean == r.model.stats.mean);
  CHECK(back.stats.source_sites == r.model.stats.source_sites);
  CHECK(back.config.window == tc.window);
  CHECK(back.optimizer.step == r.model.optimizer.step);
  CHECK(back.best_epoch == r.model.best_epoch);

  // Identical predictions through the reloaded model.
  const Eigen::VectorXd before = kg_predict(f.val_windows, r.model.params,
                                            r.model.stats, tc.clamp_floor);
  const Eigen::VectorXd after =
      kg_predict(f.val_windows, back.params, back.stats, back.config.clamp_floor);
  CHECK(before == after);

  // Version tag is enforced.
  std::string text = checkpoint_json(r.model);
  const auto pos = text.find(kCheckpointFormat);
  text.replace(pos, std::string(kCheckpointFormat).size(), "wcmkg.checkpoint.v0");
  CHECK_THROWS_AS(checkpoint_from_json(text), VersionMismatch);

  std::remove(path.c_str());
}
