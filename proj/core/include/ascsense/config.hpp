#pragma once

#include <string>

#include "ascsense/harness.hpp"

namespace ascsense {

/// Parses a JSON experiment description. Absent keys keep their defaults; unknown keys and
/// ill-typed values are rejected with Errc::format, a missing file with Errc::io.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// Fully resolved configuration as pretty-printed JSON (every field present).
std::string config_to_json(const ExperimentConfig& cfg);

void save_config(const std::string& path, const ExperimentConfig& cfg);

}  // namespace ascsense
