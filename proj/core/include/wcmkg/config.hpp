#pragma once

#include <string>
#include <vector>

#include "wcmkg/context.hpp"
#include "wcmkg/crossval.hpp"
#include "wcmkg/synthetic.hpp"
#include "wcmkg/train.hpp"

namespace wcmkg {

/// Declarative run configuration: one INI-style file with nested sections
/// ([data], [data.synthetic], [wcm], [training], [cv], [output]) plus
/// per-key overrides of the form "section.key=value". Unknown keys are
/// rejected; every validation error names the offending key path.
struct RunConfig {
  // [data]
  std::string csv_path;  ///< empty when the run is synthetic
  bool synthetic_enabled = false;
  SyntheticConfig synthetic;

  // [wcm]
  PhysicsContext physics;

  // [training]
  TrainConfig training;
  double train_val_fraction = 0.2;   ///< site share held out by cmd train
  std::string calibration_path;      ///< optional warm start for cmd train

  // [cv]
  int cv_folds = 4;
  std::uint64_t cv_seed = 42;
  double cv_val_fraction = 0.2;
  int cv_threads = 0;

  // [output]
  std::string output_dir = "out";

  CvConfig cv_config() const;
};

RunConfig parse_run_config(const std::string& text,
                           const std::vector<std::string>& overrides = {});

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

/// Human-readable reference of every config key with units and defaults.
std::string config_reference();

}  // namespace wcmkg
