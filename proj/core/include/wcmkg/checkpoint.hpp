#pragma once

#include <string>

#include "wcmkg/train.hpp"

namespace wcmkg {

inline constexpr const char* kCheckpointFormat = "wcmkg.checkpoint.v1";

/// Serializes the full model: weights, log_a, optimizer moments,
/// standardization statistics, training config echo and physics context,
/// under a version tag.
std::string checkpoint_json(const TrainedModel& model);
void save_checkpoint(const TrainedModel& model, const std::string& path);

/// Throws VersionMismatch when the format tag differs.
TrainedModel checkpoint_from_json(const std::string& text);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace wcmkg
