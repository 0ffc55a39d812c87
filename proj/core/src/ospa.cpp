#include "tcsim/ospa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcsim/assignment.hpp"

namespace tcsim {

void OspaParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("ospa.c must be a positive finite number");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("ospa.p must be >= 1");
}

double base_distance(const KinematicState& a, const KinematicState& b, const OspaParams& params) {
  if (params.space == StateSpace::position) {
    const Vec2 d = a.p - b.p;
    return params.base == BaseDistance::manhattan ? d.lpNorm<1>() : d.norm();
  }
  const Vec4 d = a.to_vector() - b.to_vector();
  return params.base == BaseDistance::manhattan ? d.lpNorm<1>() : d.norm();
}

double ospa(std::span<const KinematicState> x, std::span<const KinematicState> y, const OspaParams& params) {
  if (x.empty() && y.empty()) return 0.0;
  if (x.empty() || y.empty()) return params.c;
  if (x.size() > y.size()) std::swap(x, y);

  const auto n = static_cast<Eigen::Index>(x.size());
  const auto m = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd cost(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      cost(i, j) = std::pow(std::min(params.c, base_distance(x[i], y[j], params)), params.p);
    }
  }
  const double localisation = assign(cost).total_cost;
  const double cardinality = std::pow(params.c, params.p) * static_cast<double>(m - n);
  return std::pow((localisation + cardinality) / static_cast<double>(m), 1.0 / params.p);
}

double ospa2(const Track& t, const Track& u, const OspaParams& params, std::optional<TimeWindow> window) {
  double sum = 0.0;
  std::size_t count = 0;
  auto in_window = [&](TimeIndex k) { return !window || window->contains(k); };

  // Merge-walk the two ordered domains.
  auto it = t.states.begin();
  auto jt = u.states.begin();
  while (it != t.states.end() || jt != u.states.end()) {
    TimeIndex k;
    double step;
    if (jt == u.states.end() || (it != t.states.end() && it->first < jt->first)) {
      k = it->first;
      step = params.c;
      ++it;
    } else if (it == t.states.end() || jt->first < it->first) {
      k = jt->first;
      step = params.c;
      ++jt;
    } else {
      k = it->first;
      step = std::min(params.c, base_distance(it->second, jt->second, params));
      ++it;
      ++jt;
    }
    if (!in_window(k)) continue;
    sum += step;
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

TrackMatch match_track_sets(std::span<const Track> a, std::span<const Track> b, const OspaParams& params,
                            std::optional<TimeWindow> window) {
  TrackMatch match;
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  std::vector<char> b_taken(b.size(), 0);

  if (n > 0 && m > 0) {
    Eigen::MatrixXd cost(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) cost(i, j) = ospa2(a[i], b[j], params, window);
    }
    const Assignment assignment = assign(cost);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = assignment.row_to_col[static_cast<std::size_t>(i)];
      if (j >= 0 && cost(i, j) < params.c) {
        match.pairs.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), cost(i, j)});
        b_taken[static_cast<std::size_t>(j)] = 1;
      } else {
        match.unmatched_a.push_back(static_cast<std::size_t>(i));
      }
    }
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) match.unmatched_a.push_back(i);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!b_taken[j]) match.unmatched_b.push_back(j);
  }
  return match;
}

}  // namespace tcsim
