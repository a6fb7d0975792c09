#include <doctest.h>

#include <string>

#include "wcmkg/config.hpp"

using namespace wcmkg;

namespace {

const std::string kMinimal = R"(
# comment line
[data.synthetic]
enabled = true
n_sites = 10          ; inline comment
noise_db = 0.5

[training]
window = 12
lambda = 2.0

[cv]
folds = 3
)";

}  // namespace

TEST_CASE("parsing picks up values and fills defaults") {
  const RunConfig cfg = parse_run_config(kMinimal);
  CHECK(cfg.synthetic_enabled);
  CHECK(cfg.synthetic.n_sites == 10);
  CHECK(cfg.synthetic.noise_db == 0.5);
  CHECK(cfg.synthetic.n_timesteps == 90);  // default
  CHECK(cfg.training.window == 12);
  CHECK(cfg.training.lambda == 2.0);
  CHECK(cfg.training.hidden == 32);       // default
  CHECK(cfg.training.batch_size == 32);   // default
  CHECK(cfg.training.max_epochs == 500);  // default
  CHECK(cfg.training.patience == 20);     // default
  CHECK(cfg.cv_folds == 3);
  CHECK(cfg.cv_seed == 42);  // default
  CHECK(cfg.physics.b == 0.084);
  CHECK(cfg.physics.theta_default_deg == 40.0);
  CHECK(cfg.output_dir == "out");
  // Generation follows the retrieval conventions.
  CHECK(cfg.synthetic.true_params.b == cfg.physics.b);
  CHECK(cfg.synthetic.vwc_coeff == cfg.physics.vwc_coeff);
}

TEST_CASE("overrides win over file values") {
  const RunConfig cfg = parse_run_config(
      kMinimal, {"training.window=4", "cv.seed=7", "output.dir=elsewhere"});
  CHECK(cfg.training.window == 4);
  CHECK(cfg.cv_seed == 7);
  CHECK(cfg.output_dir == "elsewhere");
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config("[data]\nbogus = 1\n"),
                       doctest::Contains("data.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[nowhere]\nx = 1\n"),
                       doctest::Contains("nowhere.x"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(kMinimal, {"training.bogus=1"}), ConfigError);
}

TEST_CASE("validation errors name the key path") {
  CHECK_THROWS_WITH_AS(
      parse_run_config("[data.synthetic]\nenabled = true\nnoise_db = -1\n"),
      doctest::Contains("data.synthetic.noise_db"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[training]\nwindow = 0\n"),
                       doctest::Contains("training.window"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[training]\nlearning_rate = -0.5\n"),
                       doctest::Contains("training.learning_rate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[wcm]\ntheta_default_deg = 95\n"),
                       doctest::Contains("wcm.theta_default_deg"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[cv]\nfolds = 1\n"),
                       doctest::Contains("cv.folds"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config("[data.synthetic]\nstart_date = 2019-13-01\n"),
      doctest::Contains("data.synthetic.start_date"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config("[training]\naux_features = ndvi, bogus\n"),
      doctest::Contains("training.aux_features"), ConfigError);
}

TEST_CASE("malformed syntax is rejected with line numbers") {
  CHECK_THROWS_WITH_AS(parse_run_config("[data\ncsv = x\n"),
                       doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[data]\nno equals sign\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("key = outside\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(kMinimal, {"no-dot=1"}), ConfigError);
}

TEST_CASE("typed parsing errors") {
  CHECK_THROWS_AS(parse_run_config("[training]\nwindow = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[training]\nlambda = 1..2\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config("[data.synthetic]\nnonlinear_soil = maybe\n"),
      ConfigError);
}

TEST_CASE("aux feature list parsing") {
  const RunConfig cfg = parse_run_config(
      "[training]\naux_features = ndvi, albedo, doy_sin, doy_cos\n");
  CHECK(cfg.training.features.aux ==
        std::vector<std::string>{"ndvi", "albedo", "doy_sin", "doy_cos"});
  CHECK(cfg.training.features.dim() == 5);
}

TEST_CASE("config reference documents every section") {
  const std::string ref = config_reference();
  for (const char* key :
       {"data.synthetic", "noise_db", "vwc_coeff", "learning_rate", "lambda",
        "clamp_floor", "folds", "val_fraction", "aux_features", "threads",
        "m^3/m^3", "dB"}) {
    CHECK(ref.find(key) != std::string::npos);
  }
}

TEST_CASE("cv_config carries the training and physics sections") {
  const RunConfig cfg = parse_run_config(kMinimal, {"cv.threads=2"});
  const CvConfig cv = cfg.cv_config();
  CHECK(cv.training.window == 12);
  CHECK(cv.training.lambda == 2.0);
  CHECK(cv.physics.b == 0.084);
  CHECK(cv.threads == 2);
  CHECK(cv.seed == 42);
}
