#pragma once

#include "lsmc/harness.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace lsmc {

inline constexpr int kSchemaVersion = 1;

// Strict parse: unknown keys, wrong types and out-of-range values raise
// ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
// Reads and parses a config file. Malformed JSON is a ConfigError.
nlohmann::json read_config_json(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const ExperimentConfig& config);

// Applies "dotted.key=value" to the raw document. The value is parsed as JSON
// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

} // namespace lsmc
