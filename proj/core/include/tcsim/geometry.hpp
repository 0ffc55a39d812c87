#pragma once

#include <set>
#include <span>
#include <vector>

#include "tcsim/types.hpp"

namespace tcsim {

/// A fixed sensor with a conical field of view: everything within `range` metres whose bearing
/// deviates from `boresight` by at most `half_angle_deg`.
struct SensorNode {
  NodeId id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 boresight = Vec2(0.0, 1.0);  // unit vector
  double half_angle_deg = 60.0;     // (0, 180]
  double range = 800.0;             // > 0
  std::vector<NodeId> neighbors;    // undirected links, kept sorted
};

/// True iff p lies inside the node's FoV cone. Boundaries are inclusive and the node's own
/// position counts as inside.
bool in_fov(const SensorNode& node, const Vec2& p);

/// True iff no node in `honest` sees p. An empty honest set makes every point blind.
bool blind_region_test(std::span<const SensorNode> nodes, const Vec2& p, const std::set<NodeId>& honest);

/// Uniform sample from the FoV sector given two uniforms in [0, 1).
Vec2 sample_in_fov(const SensorNode& node, double u_radius, double u_angle);

/// Area of the FoV sector in m^2.
double fov_area(const SensorNode& node);

}  // namespace tcsim
