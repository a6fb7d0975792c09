#include "wcmkg/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wcmkg {

namespace {

using nlohmann::ordered_json;

ordered_json params_to_json(const LstmParams& p) {
  ordered_json j;
  p.for_each_block([&](const std::string& name, const double* data,
                       std::int64_t n) {
    j[name] = std::vector<double>(data, data + n);
  });
  return j;
}

void params_from_json(const nlohmann::json& j, LstmParams& p) {
  p.for_each_block([&](const std::string& name, double* data, std::int64_t n) {
    const auto& arr = j.at(name);
    if (static_cast<std::int64_t>(arr.size()) != n) {
      throw SchemaError("checkpoint block '" + name + "' has " +
                        std::to_string(arr.size()) + " values, expected " +
                        std::to_string(n));
    }
    for (std::int64_t i = 0; i < n; ++i) data[i] = arr[i].get<double>();
  });
}

}  // namespace

std::string checkpoint_json(const TrainedModel& model) {
  const LstmDims dims = model.params.dims();
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["dims"] = {{"input", dims.input}, {"hidden", dims.hidden}};
  j["params"] = params_to_json(model.params);
  j["optimizer"] = {{"step", model.optimizer.step},
                    {"m", params_to_json(model.optimizer.m)},
                    {"v", params_to_json(model.optimizer.v)}};
  j["stats"] = {{"names", model.stats.names},
                {"mean", model.stats.mean},
                {"stddev", model.stats.stddev},
                {"source_sites", model.stats.source_sites},
                {"reference_a", model.stats.reference_a},
                {"clamp_floor", model.stats.clamp_floor}};
  j["config"] = {{"window", model.config.window},
                 {"hidden", model.config.hidden},
                 {"lambda", model.config.lambda},
                 {"clamp_floor", model.config.clamp_floor},
                 {"learning_rate", model.config.adam.learning_rate},
                 {"beta1", model.config.adam.beta1},
                 {"beta2", model.config.adam.beta2},
                 {"epsilon", model.config.adam.epsilon},
                 {"clip_norm", model.config.clip_norm},
                 {"batch_size", model.config.batch_size},
                 {"max_epochs", model.config.max_epochs},
                 {"patience", model.config.patience},
                 {"seed", model.config.seed},
                 {"init_a", model.config.init_a},
                 {"aux_features", model.config.features.aux}};
  j["physics"] = {{"b", model.physics.b},
                  {"theta_default_deg", model.physics.theta_default_deg},
                  {"vwc_coeff", model.physics.vwc_coeff}};
  j["best_epoch"] = model.best_epoch;
  j["best_val_soil_mse"] = model.best_val_soil_mse;
  return j.dump(2) + "\n";
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << checkpoint_json(model);
  if (!out) throw IoError("failed while writing checkpoint '" + path + "'");
}

TrainedModel checkpoint_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }

  const std::string format = j.value("format", "");
  if (format != kCheckpointFormat) {
    throw VersionMismatch("checkpoint format '" + format + "' not supported (expected '" +
                          std::string(kCheckpointFormat) + "')");
  }

  try {
    TrainedModel model;
    const LstmDims dims{j.at("dims").at("input").get<int>(),
                        j.at("dims").at("hidden").get<int>()};
    model.params = LstmParams::zeros(dims);
    params_from_json(j.at("params"), model.params);

    model.optimizer = AdamState::zeros(dims);
    model.optimizer.step = j.at("optimizer").at("step").get<long>();
    params_from_json(j.at("optimizer").at("m"), model.optimizer.m);
    params_from_json(j.at("optimizer").at("v"), model.optimizer.v);

    const auto& s = j.at("stats");
    model.stats.names = s.at("names").get<std::vector<std::string>>();
    model.stats.mean = s.at("mean").get<std::vector<double>>();
    model.stats.stddev = s.at("stddev").get<std::vector<double>>();
    model.stats.source_sites =
        s.at("source_sites").get<std::vector<std::string>>();
    model.stats.reference_a = s.at("reference_a").get<double>();
    model.stats.clamp_floor = s.at("clamp_floor").get<double>();

    const auto& c = j.at("config");
    model.config.window = c.at("window").get<int>();
    model.config.hidden = c.at("hidden").get<int>();
    model.config.lambda = c.at("lambda").get<double>();
    model.config.clamp_floor = c.at("clamp_floor").get<double>();
    model.config.adam.learning_rate = c.at("learning_rate").get<double>();
    model.config.adam.beta1 = c.at("beta1").get<double>();
    model.config.adam.beta2 = c.at("beta2").get<double>();
    model.config.adam.epsilon = c.at("epsilon").get<double>();
    model.config.clip_norm = c.at("clip_norm").get<double>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.max_epochs = c.at("max_epochs").get<int>();
    model.config.patience = c.at("patience").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.init_a = c.at("init_a").get<double>();
    model.config.features.aux =
        c.at("aux_features").get<std::vector<std::string>>();

    const auto& p = j.at("physics");
    model.physics.b = p.at("b").get<double>();
    model.physics.theta_default_deg = p.at("theta_default_deg").get<double>();
    model.physics.vwc_coeff = p.at("vwc_coeff").get<double>();

    model.best_epoch = j.at("best_epoch").get<int>();
    model.best_val_soil_mse = j.at("best_val_soil_mse").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace wcmkg
