#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tcsim/geometry.hpp"
#include "tcsim/rng.hpp"
#include "tcsim/scenario.hpp"

namespace tcsim {

struct Measurement {
  Vec2 z = Vec2::Zero();
  NodeId origin_node = 0;
  TimeIndex time = 0;
  int target_id = -1;  // generating target, -1 for clutter (simulation bookkeeping only)

  bool is_clutter() const { return target_id < 0; }
};

/// Position measurements at one node and step: each in-FoV target is detected with probability
/// P_D and observed with isotropic Gaussian noise; a Poisson number of clutter points is drawn
/// uniformly over the FoV sector. Detections come first, in input order.
std::vector<Measurement> sense(const SensorNode& node, TimeIndex k,
                               std::span<const std::pair<int, KinematicState>> truth, const SensingParams& params,
                               Rng& rng);

/// Stream seed for (run seed, node, step).
std::uint64_t sensing_seed(std::uint64_t run_seed, NodeId node, TimeIndex k);

}  // namespace tcsim
