#include "tcsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tcsim {

std::string to_string(const GlobalLabel& label) {
  return std::to_string(label.local_label) + "@" + std::to_string(label.node_id);
}

namespace {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

bool in_fov(const SensorNode& node, const Vec2& p) {
  const Vec2 d = p - node.position;
  const double dist = d.norm();
  if (dist > node.range) return false;
  if (dist == 0.0) return true;
  const double cos_angle = std::clamp(d.dot(node.boresight) / (dist * node.boresight.norm()), -1.0, 1.0);
  return std::acos(cos_angle) <= deg2rad(node.half_angle_deg);
}

bool blind_region_test(std::span<const SensorNode> nodes, const Vec2& p, const std::set<NodeId>& honest) {
  return std::none_of(nodes.begin(), nodes.end(),
                      [&](const SensorNode& n) { return honest.count(n.id) != 0 && in_fov(n, p); });
}

Vec2 sample_in_fov(const SensorNode& node, double u_radius, double u_angle) {
  const double r = node.range * std::sqrt(u_radius);
  const double theta = (2.0 * u_angle - 1.0) * deg2rad(node.half_angle_deg);
  const Vec2 axis = node.boresight.normalized();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Vec2 dir(c * axis.x() - s * axis.y(), s * axis.x() + c * axis.y());
  return node.position + r * dir;
}

double fov_area(const SensorNode& node) { return deg2rad(node.half_angle_deg) * node.range * node.range; }

}  // namespace tcsim
