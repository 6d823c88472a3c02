#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cgboost/eval/pipeline.hpp"

namespace cgb::cli {

// Parses a JSON run config. Missing keys keep their defaults; unknown keys,
// wrong types and out-of-range values throw ConfigError naming the key path.
eval::PipelineConfig parse_run_config(std::string_view text);
eval::PipelineConfig load_run_config(const std::filesystem::path& path);

// Every field, defaults included; parse_run_config(to_json(c)) == c.
nlohmann::json run_config_to_json(const eval::PipelineConfig& cfg);

// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const eval::PipelineConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace cgb::cli
