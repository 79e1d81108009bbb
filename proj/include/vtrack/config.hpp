#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vtrack/pipeline.hpp"
#include "vtrack/sim.hpp"

namespace vtrack {

/// Ordered `key=value` entries. Blank lines and `#` comments are ignored;
/// surrounding whitespace is trimmed.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> entries;
};

/// Throws ParseError naming `source` and the line for malformed lines, and
/// ConfigError for duplicate keys.
KeyValues parse_key_values(std::string_view text, std::string_view source = "<config>");
KeyValues read_key_values(const std::string& path);

/// Defaults overridden by the recognised keys. Throws ConfigError for an
/// unknown key or a bad value.
PipelineConfig pipeline_config_from(const KeyValues& kv);
PipelineConfig load_pipeline_config(const std::string& path);
/// key=value text reproducing `cfg`.
std::string to_key_values(const PipelineConfig& cfg);

/// Scenario from `preset=` (tableI, mixed, three, single; jittered by seed)
/// and/or explicit duration, scan_rate, sensor.* and vehicle.<id>.* keys.
/// Throws ConfigError for unknown keys or bad values, InvalidSpec for an
/// invalid scenario.
ScenarioSpec scenario_from(const KeyValues& kv, std::uint64_t seed);
ScenarioSpec load_scenario(const std::string& path, std::uint64_t seed);

}  // namespace vtrack
