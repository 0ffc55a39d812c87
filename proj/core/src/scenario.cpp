#include "tcsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcsim {

std::optional<KinematicState> TargetSpec::state_at(TimeIndex k, double dt) const {
  if (waypoints.empty() || k < waypoints.front().time || k > waypoints.back().time) return std::nullopt;
  if (waypoints.size() == 1) return KinematicState(waypoints.front().position, Vec2::Zero());
  // Segment [i, i+1] holds k; at an interior waypoint the outgoing segment's velocity applies.
  std::size_t i = 0;
  while (i + 2 < waypoints.size() && k >= waypoints[i + 1].time) ++i;
  const Waypoint& a = waypoints[i];
  const Waypoint& b = waypoints[i + 1];
  const Vec2 velocity = (b.position - a.position) / (static_cast<double>(b.time - a.time) * dt);
  return KinematicState(a.position + static_cast<double>(k - a.time) * dt * velocity, velocity);
}

namespace {

void fail(const std::string& path, const std::string& what) { throw std::invalid_argument(path + ": " + what); }

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

void check_params(const std::string& prefix, const auto& params) {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    fail(prefix, e.what());
  }
}

}  // namespace

void Scenario::validate() const {
  check(!nodes.empty(), "nodes", "at least one node is required");
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string path = "nodes[" + std::to_string(i) + "]";
    check(ids.insert(n.id).second, path + ".id", "duplicate node id " + std::to_string(n.id));
    check(n.position.allFinite(), path + ".position", "must be finite");
    check(n.boresight.allFinite() && std::abs(n.boresight.norm() - 1.0) < 1e-9, path + ".boresight",
          "must be a unit vector");
    check(n.half_angle_deg > 0.0 && n.half_angle_deg <= 180.0, path + ".half_angle_deg", "must be in (0, 180]");
    check(n.range > 0.0, path + ".range", "must be > 0");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId nb : nodes[i].neighbors) {
      const std::string path = "nodes[" + std::to_string(i) + "].neighbors";
      check(ids.count(nb) != 0, path, "unknown node id " + std::to_string(nb));
      check(nb != nodes[i].id, path, "a node cannot neighbor itself");
      const auto& other = node(nb).neighbors;
      check(std::find(other.begin(), other.end(), nodes[i].id) != other.end(), path,
            "link to node " + std::to_string(nb) + " is not symmetric");
    }
  }

  std::set<int> target_ids;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const std::string path = "targets[" + std::to_string(i) + "]";
    check(target_ids.insert(t.id).second, path + ".id", "duplicate target id");
    check(!t.waypoints.empty(), path + ".waypoints", "at least one waypoint is required");
    for (std::size_t w = 0; w < t.waypoints.size(); ++w) {
      const std::string wp = path + ".waypoints[" + std::to_string(w) + "]";
      check(t.waypoints[w].position.allFinite(), wp + ".position", "must be finite");
      check(t.waypoints[w].time >= 1 && t.waypoints[w].time <= horizon, wp + ".time", "must be in [1, horizon]");
      if (w > 0) check(t.waypoints[w].time > t.waypoints[w - 1].time, wp + ".time", "must be strictly increasing");
    }
  }
  check(area.min.allFinite() && area.max.allFinite() && (area.max.array() > area.min.array()).all(), "area",
        "max must exceed min on both axes");
  check(horizon >= 1, "horizon", "must be >= 1");
  check(dt > 0.0, "dt", "must be > 0");
  check(sensing.detection_probability >= 0.0 && sensing.detection_probability <= 1.0,
        "sensing.detection_probability", "must be in [0, 1]");
  check(sensing.sigma_r >= 0.0, "sensing.sigma_r", "must be >= 0");
  check(sensing.clutter_rate >= 0.0, "sensing.clutter_rate", "must be >= 0");
  check(tracker.sigma_v >= 0.0, "tracker.sigma_v", "must be >= 0");
  check(tracker.gate > 0.0, "tracker.gate", "must be > 0");
  check(tracker.confirm_window >= 1, "tracker.confirm_window", "must be >= 1");
  check(tracker.confirm_hits >= 1 && tracker.confirm_hits <= tracker.confirm_window, "tracker.confirm_hits",
        "must be in [1, confirm_window]");
  check(tracker.max_misses >= 1, "tracker.max_misses", "must be >= 1");
  check(tracker.init_velocity_sigma > 0.0, "tracker.init_velocity_sigma", "must be > 0");
  check(tracker.covariance_floor > 0.0, "tracker.covariance_floor", "must be > 0");
  check_params("consensus", consensus);
  check(ids.count(consensus.evaluation_node) != 0, "consensus.evaluation_node", "unknown node id");
  for (NodeId id : attack.compromised_nodes) {
    check(ids.count(id) != 0, "attack.compromised_nodes", "unknown node id " + std::to_string(id));
  }
  check(attack.compromised_nodes.count(consensus.evaluation_node) == 0, "consensus.evaluation_node",
        "must not be compromised");
  check(attack.start_step >= 1, "attack.start_step", "must be >= 1");
  check(attack.impostor_min_reports >= 1, "attack.impostor_min_reports", "must be >= 1");
  check(attack.visibility_timeout >= 1, "attack.visibility_timeout", "must be >= 1");
  check(attack.association_gate > 0.0, "attack.association_gate", "must be > 0");
  if (attack.rendezvous) check(attack.rendezvous->allFinite(), "attack.rendezvous", "must be finite");
  check_params("attack.mpc", attack.mpc);
  check(std::abs(attack.mpc.dt - dt) < 1e-12, "attack.mpc.dt", "must equal dt");
}

const SensorNode& Scenario::node(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw std::out_of_range("unknown node id " + std::to_string(id));
}

std::set<NodeId> Scenario::honest_nodes() const {
  std::set<NodeId> out;
  for (const auto& n : nodes) {
    if (attack.compromised_nodes.count(n.id) == 0) out.insert(n.id);
  }
  return out;
}

const TargetSpec* Scenario::target_with_role(TargetRole role) const {
  for (const auto& t : targets) {
    if (t.role == role) return &t;
  }
  return nullptr;
}

Vec2 Scenario::rendezvous_point() const {
  if (attack.rendezvous) return *attack.rendezvous;
  const TargetSpec* impostor = target_with_role(TargetRole::impostor);
  if (!impostor || impostor->waypoints.empty()) return Vec2::Zero();
  const std::set<NodeId> honest = honest_nodes();
  std::vector<Vec2> blind;
  for (TimeIndex k = impostor->waypoints.front().time; k <= impostor->waypoints.back().time; ++k) {
    const Vec2 p = impostor->state_at(k, dt)->p;
    if (!blind_region_test(nodes, p, honest)) break;
    blind.push_back(p);
  }
  if (blind.empty()) return impostor->waypoints.front().position;
  return 0.5 * (blind.front() + blind.back());
}

std::vector<std::pair<int, KinematicState>> truth_at(const Scenario& scenario, TimeIndex k) {
  std::vector<std::pair<int, KinematicState>> out;
  for (const auto& t : scenario.targets) {
    if (auto s = t.state_at(k, scenario.dt)) out.emplace_back(t.id, *s);
  }
  return out;
}

std::string to_string(TargetRole role) {
  switch (role) {
    case TargetRole::victim: return "victim";
    case TargetRole::impostor: return "impostor";
    case TargetRole::other: return "other";
  }
  return "other";
}

std::string to_string(VictimSelector selector) {
  return selector == VictimSelector::earliest ? "earliest" : "nearest";
}

}  // namespace tcsim
