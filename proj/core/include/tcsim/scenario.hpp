#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcsim/consensus.hpp"
#include "tcsim/geometry.hpp"
#include "tcsim/mpc.hpp"
#include "tcsim/types.hpp"

namespace tcsim {

enum class TargetRole { victim, impostor, other };

struct Waypoint {
  TimeIndex time = 0;
  Vec2 position = Vec2::Zero();
};

/// A ground-truth target moving at piecewise constant velocity between waypoints. It exists from
/// the first waypoint's time to the last one's, inclusive.
struct TargetSpec {
  int id = 0;
  TargetRole role = TargetRole::other;
  std::vector<Waypoint> waypoints;  // strictly increasing times

  std::optional<KinematicState> state_at(TimeIndex k, double dt) const;
};

struct SensingParams {
  double detection_probability = 0.98;
  double sigma_r = 2.0;        // measurement noise std per axis, metres
  double clutter_rate = 2.0;   // expected false alarms per node per step
};

struct TrackerParams {
  double sigma_v = 5.0;                  // process noise std (white-noise acceleration), m/s^2
  double gate = 9.21034037197618;        // Mahalanobis^2 gate, chi-square(2) 99% quantile
  int confirm_hits = 3;                  // M of ...
  int confirm_window = 4;                // ... N
  int max_misses = 4;                    // consecutive misses before a confirmed track dies
  double init_velocity_sigma = 30.0;     // prior velocity std of a newborn track, m/s
  double covariance_floor = 1e-9;        // eigenvalue floor used when repairing covariances
};

enum class VictimSelector { earliest, nearest };

struct AttackParams {
  std::set<NodeId> compromised_nodes;
  TimeIndex start_step = 5;                  // earliest step the attack may begin
  VictimSelector victim_selector = VictimSelector::earliest;
  Vec2 victim_point = Vec2::Zero();          // used by VictimSelector::nearest
  int impostor_min_reports = 3;
  std::optional<Vec2> rendezvous;            // default: midpoint of the impostor's blind inbound path
  int visibility_timeout = 3;                // h
  double association_gate = 30.0;            // metres
  MpcParams mpc;
};

struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

struct Scenario {
  std::string name = "scenario";
  std::vector<SensorNode> nodes;
  std::vector<TargetSpec> targets;
  Rect area;
  int horizon = 80;  // N
  double dt = 1.0;
  SensingParams sensing;
  TrackerParams tracker;
  ConsensusParams consensus;
  AttackParams attack;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument with a field path such as "nodes[1].range: must be > 0".
  void validate() const;

  const SensorNode& node(NodeId id) const;
  std::set<NodeId> honest_nodes() const;
  const TargetSpec* target_with_role(TargetRole role) const;

  /// Rendezvous point: configured value, else the midpoint of the part of the impostor's path that is
  /// blind to honest nodes before it first becomes visible. Falls back to the impostor's first
  /// waypoint.
  Vec2 rendezvous_point() const;
};

/// True target states at step k, as (target id, state) for targets that exist at k.
std::vector<std::pair<int, KinematicState>> truth_at(const Scenario& scenario, TimeIndex k);

std::string to_string(TargetRole role);
std::string to_string(VictimSelector selector);

}  // namespace tcsim
