#include "tcsim/sensing.hpp"

namespace tcsim {

std::vector<Measurement> sense(const SensorNode& node, TimeIndex k,
                               std::span<const std::pair<int, KinematicState>> truth, const SensingParams& params,
                               Rng& rng) {
  std::vector<Measurement> out;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (const auto& [id, state] : truth) {
    if (!in_fov(node, state.p)) continue;
    if (uniform(rng) >= params.detection_probability) continue;
    const double ex = noise(rng);
    const double ey = noise(rng);
    out.push_back({state.p + params.sigma_r * Vec2(ex, ey), node.id, k, id});
  }

  if (params.clutter_rate > 0.0) {
    std::poisson_distribution<int> count(params.clutter_rate);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const double ur = uniform(rng);
      const double ua = uniform(rng);
      out.push_back({sample_in_fov(node, ur, ua), node.id, k, -1});
    }
  }
  return out;
}

std::uint64_t sensing_seed(std::uint64_t run_seed, NodeId node, TimeIndex k) {
  return derive_seed({run_seed, 0x5e75ULL, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(k)});
}

}  // namespace tcsim
