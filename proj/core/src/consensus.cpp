#include "tcsim/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>

namespace tcsim {

void ConsensusParams::validate() const {
  ospa.validate();
  if (matching_window < 0) throw std::invalid_argument("consensus.matching_window must be >= 0");
}

std::optional<TimeWindow> ConsensusParams::window_at(TimeIndex now) const {
  if (matching_window <= 0) return std::nullopt;
  return TimeWindow{now - matching_window + 1, now};
}

FusedTrack fuse_tracks(const FusedTrack& a, const FusedTrack& b, double w_a, double w_b) {
  FusedTrack out;
  out.track.label = a.track.label;
  out.members = a.members;
  out.members.insert(out.members.end(), b.members.begin(), b.members.end());
  out.matched = true;
  out.track.states = a.track.states;
  for (const auto& [k, xb] : b.track.states) {
    auto it = out.track.states.find(k);
    if (it == out.track.states.end()) {
      out.track.states.emplace(k, xb);
    } else {
      const KinematicState xa = it->second;
      it->second = KinematicState(w_a * xa.p + w_b * xb.p, w_a * xa.v + w_b * xb.v);
    }
  }
  return out;
}

namespace {

FusedTrack singleton(const Track& t) { return FusedTrack{t, {t.label}, false}; }

std::vector<Track> tracks_of(const std::vector<FusedTrack>& items) {
  std::vector<Track> out;
  out.reserve(items.size());
  for (const auto& f : items) out.push_back(f.track);
  return out;
}

// One fold: matches `acc` against `incoming`, fuses matches in place and appends unmatched incoming
// tracks. No retention is applied here.
void fold(std::vector<FusedTrack>& acc, std::span<const Track> incoming, double w_acc, double w_in,
          const ConsensusParams& params, TimeIndex now, std::vector<LabelPair>& matched_pairs) {
  const std::vector<Track> acc_tracks = tracks_of(acc);
  const TrackMatch match = match_track_sets(acc_tracks, incoming, params.ospa, params.window_at(now));
  for (const auto& pair : match.pairs) {
    const FusedTrack in = singleton(incoming[pair.b]);
    matched_pairs.emplace_back(acc[pair.a].members.front(), in.track.label);
    acc[pair.a] = fuse_tracks(acc[pair.a], in, w_acc, w_in);
  }
  for (std::size_t j : match.unmatched_b) acc.push_back(singleton(incoming[j]));
}

bool retained(const FusedTrack& f, const ConsensusParams& params) {
  return f.matched || f.track.length() >= params.retention_length;
}

std::vector<Track> live_at(std::span<const Track> tracks, TimeIndex now) {
  std::vector<Track> out;
  for (const auto& t : tracks) {
    if (t.exists_at(now)) out.push_back(t);
  }
  return out;
}

}  // namespace

PairwiseResult pairwise_consensus(std::span<const Track> a, std::span<const Track> b, double w_a, double w_b,
                                  const ConsensusParams& params, TimeIndex now) {
  if (w_a < 0.0 || w_b < 0.0 || std::abs(w_a + w_b - 1.0) > 1e-12) {
    throw std::invalid_argument("pairwise_consensus: weights must be non-negative and sum to 1");
  }
  PairwiseResult result;
  std::vector<FusedTrack> acc;
  for (const auto& t : a) acc.push_back(singleton(t));
  fold(acc, b, w_a, w_b, params, now, result.matched_pairs);

  for (auto& f : acc) {
    if (!retained(f, params)) continue;
    if (f.matched) {
      // Name the fused track after its longer-lived member.
      std::optional<std::tuple<TimeIndex, GlobalLabel>> best;
      auto consider = [&](std::span<const Track> side) {
        for (const auto& t : side) {
          if (t.empty() || std::find(f.members.begin(), f.members.end(), t.label) == f.members.end()) continue;
          const auto key = std::tuple(t.first_time(), t.label);
          if (!best || key < *best) best = key;
        }
      };
      consider(a);
      consider(b);
      if (best) f.track.label = std::get<1>(*best);
    }
    result.tracks.push_back(std::move(f));
  }
  return result;
}

ConsensusOutput network_consensus(NodeId node, TimeIndex now, std::span<const Track> own,
                                  const std::map<NodeId, std::vector<Track>>& neighbor_tracks,
                                  const ConsensusParams& params, LabelEquivalence& equivalence) {
  ConsensusOutput out;
  out.time = now;
  out.node = node;

  const std::vector<Track> own_live = live_at(own, now);
  for (const auto& t : own_live) equivalence.observe(t.label, now);
  for (const auto& [_, tracks] : neighbor_tracks) {
    for (const auto& t : tracks) {
      if (t.exists_at(now)) equivalence.observe(t.label, now);
    }
  }

  std::vector<FusedTrack> acc;
  for (const auto& t : own_live) acc.push_back(singleton(t));

  if (neighbor_tracks.empty()) {
    for (const auto& f : acc) out.items.push_back({f.track.label, f.track.at(now), f.members});
    std::sort(out.items.begin(), out.items.end(), [](const auto& x, const auto& y) { return x.label < y.label; });
    return out;
  }

  for (const auto& [neighbor, tracks] : neighbor_tracks) {
    if (neighbor == node) continue;
    const std::vector<Track> incoming = live_at(tracks, now);
    fold(acc, incoming, 0.5, 0.5, params, now, out.matched_pairs);
  }
  update_label_equivalence(equivalence, out.matched_pairs, now);

  std::vector<FusedTrack> kept;
  for (auto& f : acc) {
    if (retained(f, params)) kept.push_back(std::move(f));
  }

  // Earliest-born member of each item, used both for naming and for resolving shared
  // representatives.
  auto earliest_member = [&](const FusedTrack& f) {
    return *std::min_element(f.members.begin(), f.members.end(), [&](const GlobalLabel& x, const GlobalLabel& y) {
      return std::tuple(equivalence.birth(x), x) < std::tuple(equivalence.birth(y), y);
    });
  };
  std::vector<std::size_t> order(kept.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<GlobalLabel> firsts(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) firsts[i] = earliest_member(kept[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::tuple(equivalence.birth(firsts[x]), firsts[x]) < std::tuple(equivalence.birth(firsts[y]), firsts[y]);
  });

  std::set<GlobalLabel> used;
  for (std::size_t i : order) {
    GlobalLabel label = equivalence.representative(firsts[i]);
    if (!used.insert(label).second) {
      label = firsts[i];
      used.insert(label);
    }
    out.items.push_back({label, kept[i].track.at(now), kept[i].members});
  }
  std::sort(out.items.begin(), out.items.end(), [](const auto& x, const auto& y) { return x.label < y.label; });
  return out;
}

}  // namespace tcsim
