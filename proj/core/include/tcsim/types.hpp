#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace tcsim {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;

/// Discrete time index. The evaluation window is {1, ..., horizon}.
using TimeIndex = int;
using NodeId = int;
using LocalLabel = std::uint64_t;

/// Planar single-object state: position (m) and velocity (m/s).
struct KinematicState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();

  KinematicState() = default;
  KinematicState(const Vec2& position, const Vec2& velocity) : p(position), v(velocity) {}
  KinematicState(double x, double y, double vx, double vy) : p(x, y), v(vx, vy) {}

  static KinematicState from_vector(const Vec4& x) { return {x.head<2>(), x.tail<2>()}; }
  Vec4 to_vector() const {
    Vec4 x;
    x << p, v;
    return x;
  }
  bool finite() const { return p.allFinite() && v.allFinite(); }

  friend bool operator==(const KinematicState& a, const KinematicState& b) {
    return a.p == b.p && a.v == b.v;
  }
};

/// Network-wide track identity: a node-scoped label augmented with the node that issued it.
/// Ordering is lexicographic on (node_id, local_label).
struct GlobalLabel {
  NodeId node_id = 0;
  LocalLabel local_label = 0;

  auto operator<=>(const GlobalLabel&) const = default;
  bool operator==(const GlobalLabel&) const = default;
};

/// "local@node", e.g. "3@1".
std::string to_string(const GlobalLabel& label);

/// Time-indexed sequence of state estimates. The existence domain is the key set of `states`.
struct Track {
  GlobalLabel label;
  std::map<TimeIndex, KinematicState> states;

  bool empty() const { return states.empty(); }
  std::size_t length() const { return states.size(); }
  bool exists_at(TimeIndex k) const { return states.count(k) != 0; }
  const KinematicState& at(TimeIndex k) const { return states.at(k); }
  std::optional<KinematicState> state_at(TimeIndex k) const {
    auto it = states.find(k);
    if (it == states.end()) return std::nullopt;
    return it->second;
  }
  TimeIndex first_time() const { return states.begin()->first; }
  TimeIndex last_time() const { return states.rbegin()->first; }
};

/// Constant-velocity extrapolation.
inline KinematicState propagate_cv(const KinematicState& x, double elapsed_seconds) {
  return {x.p + elapsed_seconds * x.v, x.v};
}

}  // namespace tcsim
