#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tcsim/scenario.hpp"

namespace tcsim {

/// Parses and validates a scenario from JSON text. Missing fields take their defaults; unknown
/// fields and type errors are rejected with std::invalid_argument naming the field path.
Scenario parse_scenario(std::string_view json_text);

/// Reads and parses a scenario file. I/O failures raise std::runtime_error.
Scenario load_scenario(const std::filesystem::path& path);

/// Full JSON echo of a scenario, every field explicit. parse_scenario(scenario_to_json(s)) == s.
std::string scenario_to_json(const Scenario& scenario, int indent = 2);

}  // namespace tcsim
