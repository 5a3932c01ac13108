#pragma once

#include "gridhier/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace gridhier {

/// Scenario documents are JSON objects with keys "system" {"M","D"},
/// "fleet" {"tau","droop","capacity","cost_a","cost_b","cost_c"},
/// optional "secondary" {"tau_z","beta","k"[,"enforce_unit_sum"]}, "x_star",
/// "demand_schedule" [[t,d],...], "d_hat", "horizon" and "dt".
/// Structural problems raise Error(ParseError); parameter values are not
/// checked here (see validate).
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

Scenario parse_scenario(const std::string& text);
/// Error(IoError) when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace gridhier
