#pragma once

#include "ztbench/harness.hpp"

#include "json.hpp"

#include <filesystem>

namespace ztbench {

/// Overlays a JSON document onto a RunConfig. Keys left out keep their
/// current values; unknown keys raise ConfigError. The result is validated.
void apply_config(RunConfig& config, const nlohmann::json& doc);

RunConfig run_config_from_json(const nlohmann::json& doc);

/// Reads a JSON config file, or the config section of a run manifest.
/// A missing file or malformed JSON raises ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved configuration, readable back by apply_config.
nlohmann::json to_json(const RunConfig& config);

} // namespace ztbench
