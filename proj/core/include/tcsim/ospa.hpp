#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tcsim/types.hpp"

namespace tcsim {

enum class BaseDistance { manhattan, euclidean };
enum class StateSpace { position, full_state };

struct OspaParams {
  double c = 100.0;  // cut-off
  double p = 1.0;    // order
  BaseDistance base = BaseDistance::manhattan;
  StateSpace space = StateSpace::position;

  /// Throws std::invalid_argument unless c > 0 and p >= 1.
  void validate() const;
};

/// Inclusive time range [first, last].
struct TimeWindow {
  TimeIndex first = 0;
  TimeIndex last = 0;
  bool contains(TimeIndex k) const { return k >= first && k <= last; }
};

/// Untruncated base distance between two states.
double base_distance(const KinematicState& a, const KinematicState& b, const OspaParams& params);

/// OSPA distance of order p between two finite sets. 0 when both are empty, c when exactly one is.
double ospa(std::span<const KinematicState> x, std::span<const KinematicState> y, const OspaParams& params);

/// Track-to-track distance: per-step singleton OSPA averaged over the union of the existence
/// domains (order forced to 1). Steps where only one track exists contribute c. 0 when both domains
/// are empty. When `window` is given, only steps inside it are considered.
double ospa2(const Track& t, const Track& u, const OspaParams& params, std::optional<TimeWindow> window = std::nullopt);

struct TrackMatch {
  struct Pair {
    std::size_t a = 0;
    std::size_t b = 0;
    double cost = 0.0;
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;
};

/// Optimal assignment on the ospa2 cost matrix, keeping only pairs with cost strictly below c.
TrackMatch match_track_sets(std::span<const Track> a, std::span<const Track> b, const OspaParams& params,
                            std::optional<TimeWindow> window = std::nullopt);

}  // namespace tcsim
