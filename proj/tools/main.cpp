// tcsim: run single simulations, Monte Carlo batches, or validate scenario files.

#include <array>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tcsim/monte_carlo.hpp"
#include "tcsim/report.hpp"
#include "tcsim/scenario_io.hpp"
#include "tcsim/simulation.hpp"

namespace fs = std::filesystem;

namespace {

void print_times(const tcsim::StageTimes& t) {
  auto show = [](const char* name, const std::optional<int>& k) {
    std::cout << ' ' << name << '=' << (k ? std::to_string(*k) : std::string("-"));
  };
  std::cout << "stages:";
  show("k0", t.k0);
  show("k1", t.k1);
  show("k2", t.k2);
  show("k3", t.k3);
  show("reentry", t.reentry);
  std::cout << '\n';
}

int cmd_run(const std::string& scenario_path, const std::string& condition_name, std::uint64_t seed,
            const std::string& out_dir, bool dump_measurements, bool no_fusion) {
  const tcsim::Scenario scenario = tcsim::load_scenario(scenario_path);
  const tcsim::Condition condition = tcsim::parse_condition(condition_name);
  tcsim::RunOptions options;
  options.record_measurements = dump_measurements;
  options.fusion_enabled = !no_fusion;
  const tcsim::RunResult run = tcsim::run_once(scenario, condition, seed, options);
  tcsim::write_scenario_echo(scenario, out_dir);
  tcsim::write_run(run, out_dir);
  std::cout << "condition=" << tcsim::to_string(condition) << " seed=" << seed
            << " hijack_success=" << (run.hijack_success ? "true" : "false") << '\n';
  if (condition != tcsim::Condition::nominal) print_times(run.stage_times);
  return 0;
}

int cmd_mc(const std::string& scenario_path, int runs, const std::string& out_dir, unsigned threads, bool per_run) {
  const tcsim::Scenario scenario = tcsim::load_scenario(scenario_path);
  constexpr std::array conditions{tcsim::Condition::nominal, tcsim::Condition::hard_switch,
                                  tcsim::Condition::stealthy};
  tcsim::MonteCarloOptions options;
  options.runs = runs;
  options.threads = threads;
  if (per_run) {
    options.on_run = [&](const tcsim::RunResult& r, int m) {
      tcsim::write_run(r, fs::path(out_dir) / "runs" / tcsim::run_directory_name(r.condition, m));
    };
  }
  const tcsim::AggregateResult agg = tcsim::run_monte_carlo(scenario, conditions, options);
  tcsim::write_scenario_echo(scenario, out_dir);
  tcsim::write_aggregate(agg, out_dir);
  for (const auto& c : agg.conditions) {
    std::cout << tcsim::to_string(c.condition) << ": runs=" << c.runs << " hijack_success_rate=" << c.success_rate()
              << " attack_failures=" << c.attack_failures << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& scenario_path) {
  const tcsim::Scenario scenario = tcsim::load_scenario(scenario_path);
  std::cout << "ok: " << scenario.name << " (" << scenario.nodes.size() << " nodes, " << scenario.targets.size()
            << " targets, N=" << scenario.horizon << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Track-consensus tracking simulator with label-hijacking adversary"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Simulate one run and write per-run CSVs");
  std::string condition = "nominal";
  std::uint64_t seed = 1;
  bool dump_measurements = false;
  bool no_fusion = false;
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--condition", condition, "nominal | hard | stealthy")
      ->check(CLI::IsMember({"nominal", "hard", "hard_switch", "stealthy"}));
  run->add_option("--seed", seed, "Run seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--dump-measurements", dump_measurements, "Also write measurements.csv");
  run->add_flag("--no-fusion", no_fusion, "Skip consensus (local tracking only)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo over nominal, hard-switch and stealthy conditions");
  int runs = 100;
  unsigned threads = 0;
  bool no_per_run = false;
  mc->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  mc->add_option("--runs", runs, "Runs per condition (M)")->check(CLI::PositiveNumber);
  mc->add_option("--out", out_dir, "Output directory")->required();
  mc->add_option("--threads", threads, "Worker threads (0 = all cores)");
  mc->add_flag("--no-per-run", no_per_run, "Skip per-run CSV directories");

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, condition, seed, out_dir, dump_measurements, no_fusion);
    if (*mc) return cmd_mc(scenario_path, runs, out_dir, threads, !no_per_run);
    if (*validate) return cmd_validate(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
