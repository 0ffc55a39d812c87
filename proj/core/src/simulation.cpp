#include "tcsim/simulation.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <map>
#include <stdexcept>

#include "tcsim/local_tracker.hpp"
#include "tcsim/ospa.hpp"
#include "tcsim/rng.hpp"

namespace tcsim {

std::string to_string(Condition condition) {
  switch (condition) {
    case Condition::nominal: return "nominal";
    case Condition::hard_switch: return "hard_switch";
    case Condition::stealthy: return "stealthy";
  }
  return "nominal";
}

Condition parse_condition(const std::string& text) {
  if (text == "nominal") return Condition::nominal;
  if (text == "hard" || text == "hard_switch") return Condition::hard_switch;
  if (text == "stealthy") return Condition::stealthy;
  throw std::invalid_argument("unknown condition '" + text + "' (expected nominal, hard or stealthy)");
}

std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return derive_seed({master_seed, 0x72756eULL, run_index});
}

namespace {

// Index of the item closest (in the matching metric) to `target`, if any lies strictly within c.
std::optional<std::size_t> nearest_item(const ConsensusOutput& out, const KinematicState& target,
                                        const OspaParams& params) {
  std::optional<std::size_t> best;
  double best_d = params.c;
  for (std::size_t i = 0; i < out.items.size(); ++i) {
    const double d = base_distance(out.items[i].state, target, params);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void evaluate_hijack(const Scenario& scenario, RunResult& result) {
  const TargetSpec* victim = scenario.target_with_role(TargetRole::victim);
  const TargetSpec* impostor = scenario.target_with_role(TargetRole::impostor);
  if (!victim || !impostor || result.consensus.empty()) return;
  const OspaParams& params = scenario.consensus.ospa;

  for (const auto& out : result.consensus) {
    if (out.node != result.evaluation_node) continue;
    const auto truth = victim->state_at(out.time, scenario.dt);
    if (!truth) continue;
    if (auto i = nearest_item(out, *truth, params)) {
      result.victim_label = out.items[*i].label;
      break;
    }
  }
  for (auto it = result.consensus.rbegin(); it != result.consensus.rend(); ++it) {
    if (it->node != result.evaluation_node) continue;
    const auto truth = impostor->state_at(it->time, scenario.dt);
    if (!truth) continue;
    if (auto i = nearest_item(*it, *truth, params)) {
      result.impostor_label = it->items[*i].label;
      break;
    }
  }
  if (!result.victim_label || !result.impostor_label) return;

  std::size_t eval_index = 0;
  for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
    if (scenario.nodes[i].id == result.evaluation_node) eval_index = i;
  }
  result.hijack_success =
      result.final_equivalence[eval_index].same_class(*result.victim_label, *result.impostor_label);
}

}  // namespace

RunResult run_once(const Scenario& scenario, Condition condition, std::uint64_t seed, const RunOptions& options) {
  scenario.validate();
  RunResult result;
  result.condition = condition;
  result.seed = seed;
  result.horizon = scenario.horizon;
  result.evaluation_node = scenario.consensus.evaluation_node;

  const std::size_t node_count = scenario.nodes.size();
  std::vector<LocalTracker> trackers;
  trackers.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) trackers.emplace_back(scenario.tracker, scenario.sensing.sigma_r, scenario.dt);
  std::vector<std::map<LocalLabel, Track>> histories(node_count);
  std::vector<LabelEquivalence> equivalences(node_count);
  std::map<NodeId, std::size_t> index_of;
  for (std::size_t i = 0; i < node_count; ++i) index_of[scenario.nodes[i].id] = i;

  std::unique_ptr<Attacker> attacker;
  if (condition != Condition::nominal && !scenario.attack.compromised_nodes.empty()) {
    attacker = std::make_unique<Attacker>(
        condition == Condition::hard_switch ? AttackVariant::hard_switch : AttackVariant::stealthy, scenario);
  }

  OspaParams eval_params = scenario.consensus.ospa;
  eval_params.p = 1.0;

  for (TimeIndex k = 1; k <= scenario.horizon; ++k) {
    const auto truth = truth_at(scenario, k);
    for (const auto& [id, state] : truth) {
      const bool observable =
          std::any_of(scenario.nodes.begin(), scenario.nodes.end(), [&](const SensorNode& n) { return in_fov(n, state.p); });
      result.truth.push_back({k, id, state, observable});
    }

    // Sensing and local tracking; each node's nominal message carries the full history of every
    // track it reports at k.
    std::vector<std::vector<Track>> nominal(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
      const SensorNode& node = scenario.nodes[i];
      Rng rng(sensing_seed(seed, node.id, k));
      const std::vector<Measurement> z = sense(node, k, truth, scenario.sensing, rng);
      if (options.record_measurements) result.measurements.insert(result.measurements.end(), z.begin(), z.end());
      for (const auto& est : trackers[i].step(k, z)) {
        result.local_tracks.push_back({k, node.id, est.label, est.state});
        Track& h = histories[i][est.label];
        h.label = GlobalLabel{node.id, est.label};
        h.states[k] = est.state;
        nominal[i].push_back(h);
      }
    }

    std::vector<std::vector<Track>> messages = nominal;
    if (attacker) {
      for (std::size_t i = 0; i < node_count; ++i) attacker->observe(k, scenario.nodes[i].id, nominal[i]);
      attacker->act(k);
      for (std::size_t i = 0; i < node_count; ++i) messages[i] = attacker->forge(scenario.nodes[i].id, k, nominal[i]);
    }

    if (!options.fusion_enabled) continue;

    for (std::size_t i = 0; i < node_count; ++i) {
      const SensorNode& node = scenario.nodes[i];
      std::map<NodeId, std::vector<Track>> neighbor_tracks;
      for (NodeId nb : node.neighbors) neighbor_tracks[nb] = messages[index_of.at(nb)];
      ConsensusOutput out = network_consensus(node.id, k, nominal[i], neighbor_tracks, scenario.consensus, equivalences[i]);

      if (node.id == result.evaluation_node) {
        std::vector<KinematicState> estimates;
        for (const auto& item : out.items) estimates.push_back(item.state);
        std::vector<KinematicState> observable;
        for (const auto& [id, state] : truth) {
          if (std::any_of(scenario.nodes.begin(), scenario.nodes.end(),
                          [&](const SensorNode& n) { return in_fov(n, state.p); })) {
            observable.push_back(state);
          }
        }
        result.cardinality.push_back(static_cast<int>(out.items.size()));
        result.ospa.push_back(ospa(observable, estimates, eval_params));
      }
      result.consensus.push_back(std::move(out));
    }
  }

  for (const auto& t : trackers) result.covariance_repairs += t.covariance_repairs();
  result.final_equivalence = std::move(equivalences);
  if (attacker) {
    result.attack_events = attacker->events();
    result.planner_trace = attacker->planner_trace();
    result.stage_times = attacker->times();
    result.attack_failed = attacker->failed();
  }
  if (options.fusion_enabled) evaluate_hijack(scenario, result);
  return result;
}

}  // namespace tcsim
