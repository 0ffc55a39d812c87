#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcsim/attacker.hpp"
#include "tcsim/consensus.hpp"
#include "tcsim/mpc.hpp"
#include "tcsim/scenario.hpp"
#include "tcsim/sensing.hpp"

namespace tcsim {

enum class Condition { nominal, hard_switch, stealthy };

std::string to_string(Condition condition);
/// Accepts "nominal", "hard", "hard_switch", "stealthy". Throws std::invalid_argument otherwise.
Condition parse_condition(const std::string& text);

struct RunOptions {
  bool fusion_enabled = true;
  bool record_measurements = false;
};

struct TruthRecord {
  TimeIndex time = 0;
  int target_id = 0;
  KinematicState state;
  bool observable = false;  // inside the FoV of at least one node
};

struct LocalTrackRecord {
  TimeIndex time = 0;
  NodeId node = 0;
  LocalLabel label = 0;
  KinematicState state;

  friend bool operator==(const LocalTrackRecord&, const LocalTrackRecord&) = default;
};

struct RunResult {
  Condition condition = Condition::nominal;
  std::uint64_t seed = 0;
  int horizon = 0;
  NodeId evaluation_node = 0;

  std::vector<TruthRecord> truth;
  std::vector<LocalTrackRecord> local_tracks;
  std::vector<Measurement> measurements;  // only with RunOptions::record_measurements
  std::vector<ConsensusOutput> consensus; // per step, per node, in (time, node) order
  std::vector<LabelEquivalence> final_equivalence;  // per node, in node order

  // Attack bookkeeping (empty for nominal runs).
  std::vector<AttackEvent> attack_events;
  std::vector<PlannerTraceRow> planner_trace;
  StageTimes stage_times;
  bool attack_failed = false;
  std::optional<GlobalLabel> victim_label;    // representative naming the victim at the evaluation node
  std::optional<GlobalLabel> impostor_label;  // label of the impostor's latest item at the evaluation node
  bool hijack_success = false;

  // Evaluation-node series over steps 1..N (index k-1).
  std::vector<int> cardinality;
  std::vector<double> ospa;

  std::size_t covariance_repairs = 0;
};

/// Per-run seed, independent of the condition so that conditions are compared on identical noise.
std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index);

/// One full simulation: truth, sensing, local tracking, forging, exchange and consensus for steps
/// 1..N. Deterministic in (scenario, condition, seed, options).
RunResult run_once(const Scenario& scenario, Condition condition, std::uint64_t seed, const RunOptions& options = {});

}  // namespace tcsim
