#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eitsim/experiments.hpp"

namespace eitsim {

inline constexpr int kSchemaVersion = 1;

struct Config {
  int schema_version = kSchemaVersion;
  Scenario scenario;
  std::string output_dir = "eitsim-out";
};

/// Parses a JSON document. Missing keys take defaults; unknown keys, keys
/// lacking their unit suffix and out-of-range values are all collected and
/// reported together in one ConfigError.
Config parse_config(std::string_view text);

/// Canonical JSON form (every key, units as in the schema).
std::string config_to_json(const Config& c);

/// Built-in named configurations.
std::vector<std::string> preset_names();
/// Document text of a preset; throws ConfigError for an unknown name.
std::string preset_document(std::string_view name);

/// A preset name or a path to a JSON file.
Config load_config(const std::string& name_or_path);

}  // namespace eitsim
