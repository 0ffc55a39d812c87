#pragma once

#include <filesystem>

#include "tcsim/monte_carlo.hpp"
#include "tcsim/scenario.hpp"
#include "tcsim/simulation.hpp"

namespace tcsim {

/// Writes scenario.json (full echo with defaults filled in).
void write_scenario_echo(const Scenario& scenario, const std::filesystem::path& dir);

/// Writes truth.csv, local_tracks.csv, consensus.csv, attack_events.csv, planner_trace.csv,
/// run.json and, when measurements were recorded, measurements.csv. Creates `dir`.
void write_run(const RunResult& run, const std::filesystem::path& dir);

/// Writes cardinality_mean.csv, ospa_samples.csv, ecdf.csv and summary.json. Creates `dir`.
void write_aggregate(const AggregateResult& aggregate, const std::filesystem::path& dir);

/// Directory name used for a per-run output, e.g. "stealthy_007".
std::string run_directory_name(Condition condition, int run_index);

}  // namespace tcsim
