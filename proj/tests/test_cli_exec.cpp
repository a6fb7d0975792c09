// End-to-end checks of the command-line binary: exit codes, artifacts and
// reproducibility. The binary path arrives through the WCMKG_CLI environment
// variable set by CTest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

const char* cli_path() {
  const char* p = std::getenv("WCMKG_CLI");
  REQUIRE_MESSAGE(p != nullptr, "WCMKG_CLI must point at the built binary");
  return p;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "wcmkg_cli_test";
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path log = work_dir() / "cli_output.log";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

int line_count(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

const std::string kSimConfig = R"([data.synthetic]
enabled = true
n_sites = 6
n_timesteps = 20
noise_db = 0
seed = 3
)";

}  // namespace

TEST_CASE("usage errors exit nonzero, --help documents the config keys") {
  CHECK(run_cli("").exit_code != 0);
  CHECK(run_cli("bogus-subcommand").exit_code != 0);

  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  for (const char* key : {"simulate", "calibrate", "train", "predict",
                          "crossval", "noise_db", "learning_rate", "lambda",
                          "vwc_coeff", "aux_features"}) {
    CHECK(help.output.find(key) != std::string::npos);
  }
}

TEST_CASE("simulate: artifacts, determinism and validation") {
  const fs::path dir = work_dir();
  write_file(dir / "sim.ini", kSimConfig);
  const std::string out1 = (dir / "out1").string();
  const std::string out2 = (dir / "out2").string();

  const RunResult r1 =
      run_cli("simulate --config " + (dir / "sim.ini").string() + " --out " + out1);
  CHECK(r1.exit_code == 0);
  CHECK(fs::exists(fs::path(out1) / "synthetic.csv"));
  CHECK(fs::exists(fs::path(out1) / "synthetic_truth.json"));
  // Header plus n_sites * n_timesteps rows.
  CHECK(line_count(slurp(fs::path(out1) / "synthetic.csv")) == 1 + 6 * 20);

  const RunResult r2 =
      run_cli("simulate --config " + (dir / "sim.ini").string() + " --out " + out2);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(fs::path(out1) / "synthetic.csv") ==
        slurp(fs::path(out2) / "synthetic.csv"));

  // A different seed changes the data.
  const RunResult r3 = run_cli("simulate --config " + (dir / "sim.ini").string() +
                               " --seed 4 --out " + out2);
  CHECK(r3.exit_code == 0);
  CHECK(slurp(fs::path(out1) / "synthetic.csv") !=
        slurp(fs::path(out2) / "synthetic.csv"));

  // Config validation failure names the key and leaves no partial output.
  const std::string out3 = (dir / "out3").string();
  const RunResult bad =
      run_cli("simulate --config " + (dir / "sim.ini").string() +
              " --set data.synthetic.noise_db=-1 --out " + out3);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("data.synthetic.noise_db") != std::string::npos);
  CHECK_FALSE(fs::exists(fs::path(out3) / "synthetic.csv"));

  // Missing config file is an I/O failure.
  CHECK(run_cli("simulate --config /nonexistent/cfg.ini").exit_code == 3);
}

TEST_CASE("calibrate recovers the generating parameters through the CLI") {
  const fs::path dir = work_dir();
  write_file(dir / "cal.ini", kSimConfig);
  const std::string out = (dir / "cal_out").string();
  const RunResult r =
      run_cli("calibrate --config " + (dir / "cal.ini").string() + " --out " + out);
  CHECK(r.exit_code == 0);

  const auto j = nlohmann::json::parse(slurp(fs::path(out) / "calibration.json"));
  CHECK(std::abs(j["a"].get<double>() - 0.02) / 0.02 <= 0.01);
  CHECK(std::abs(j["c"].get<double>() - (-25.0)) / 25.0 <= 0.01);
  CHECK(std::abs(j["d"].get<double>() - 30.0) / 30.0 <= 0.01);
  CHECK(j["theta_deg"].get<double>() == doctest::Approx(40.0));
  CHECK(j["converged"].get<bool>());

  // A dataset without reference SM cannot be calibrated.
  const RunResult unlabeled =
      run_cli("calibrate --config " + (dir / "cal.ini").string() +
              " --set data.synthetic.label_fraction=0 --out " + out);
  CHECK(unlabeled.exit_code == 1);
}

TEST_CASE("train, predict and the exit-code contract") {
  const fs::path dir = work_dir();
  write_file(dir / "train.ini", kSimConfig + R"(
[training]
window = 4
hidden = 8
max_epochs = 12
patience = 12
seed = 1
)");
  const std::string out = (dir / "train_out").string();
  const RunResult r =
      run_cli("train --config " + (dir / "train.ini").string() + " --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(fs::path(out) / "checkpoint.json"));
  CHECK(fs::exists(fs::path(out) / "training_log.jsonl"));
  // One log record per epoch, plus the untrained epoch 0.
  CHECK(line_count(slurp(fs::path(out) / "training_log.jsonl")) == 13);

  // Predict over the same synthetic dataset: one row per acquisition.
  const RunResult p = run_cli(
      "predict --config " + (dir / "train.ini").string() + " --checkpoint " +
      (fs::path(out) / "checkpoint.json").string() + " --out " + out);
  CHECK(p.exit_code == 0);
  const std::string csv = slurp(fs::path(out) / "predictions.csv");
  CHECK(line_count(csv) == 1 + 6 * 20);
  CHECK(csv.rfind("site_id,timestamp,sm_pred\n", 0) == 0);
  CHECK(csv.find("2019-01-01") != std::string::npos);

  // A checkpoint with a foreign format tag is refused.
  std::string ckpt = slurp(fs::path(out) / "checkpoint.json");
  const auto pos = ckpt.find("wcmkg.checkpoint.v1");
  ckpt.replace(pos, std::string("wcmkg.checkpoint.v1").size(), "wcmkg.checkpoint.v9");
  write_file(dir / "old_checkpoint.json", ckpt);
  const RunResult stale = run_cli(
      "predict --config " + (dir / "train.ini").string() + " --checkpoint " +
      (dir / "old_checkpoint.json").string() + " --out " + out);
  CHECK(stale.exit_code == 1);
  CHECK(stale.output.find("wcmkg.checkpoint.v9") != std::string::npos);

  // Numerical blow-ups map to exit code 2.
  const RunResult blowup =
      run_cli("train --config " + (dir / "train.ini").string() +
              " --set training.learning_rate=1e200 --set training.clip_norm=1e18" +
              " --out " + out);
  CHECK(blowup.exit_code == 2);
}

TEST_CASE("crossval produces the report set and honors the seed") {
  const fs::path dir = work_dir();
  write_file(dir / "cv.ini", kSimConfig + R"(
[data.synthetic]
n_sites = 8
n_timesteps = 16
noise_db = 0.3
nonlinear_soil = true

[training]
window = 4
hidden = 8
max_epochs = 8
patience = 8

[cv]
folds = 4
seed = 2
)");
  const std::string out1 = (dir / "cv_out1").string();
  const std::string out2 = (dir / "cv_out2").string();

  const RunResult r1 =
      run_cli("crossval --config " + (dir / "cv.ini").string() + " --out " + out1);
  CHECK(r1.exit_code == 0);
  CHECK(fs::exists(fs::path(out1) / "report.json"));
  CHECK(fs::exists(fs::path(out1) / "summary.txt"));
  for (int f = 0; f < 4; ++f) {
    CHECK(fs::exists(fs::path(out1) /
                     ("scatter_fold" + std::to_string(f) + "_wcm.csv")));
    CHECK(fs::exists(fs::path(out1) /
                     ("scatter_fold" + std::to_string(f) + "_kg_lstm.csv")));
  }
  const auto j = nlohmann::json::parse(slurp(fs::path(out1) / "report.json"));
  CHECK(j["fold_count"] == 4);
  CHECK(j["methods"]["wcm"]["pooled"]["n"].get<int>() > 0);
  CHECK(j["methods"]["kg_lstm"]["folds"].size() == 4);

  // Same seed reproduces the report byte-for-byte; a new seed does not.
  const RunResult r2 =
      run_cli("crossval --config " + (dir / "cv.ini").string() + " --out " + out2);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(fs::path(out1) / "report.json") ==
        slurp(fs::path(out2) / "report.json"));

  const RunResult r3 = run_cli("crossval --config " + (dir / "cv.ini").string() +
                               " --seed 77 --out " + out2);
  CHECK(r3.exit_code == 0);
  CHECK(slurp(fs::path(out1) / "report.json") !=
        slurp(fs::path(out2) / "report.json"));
}
