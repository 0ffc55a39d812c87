#include "doctest.h"
#include "oracles.hpp"
#include "tcsim/consensus.hpp"

using namespace tcsim;

namespace {

GlobalLabel L(LocalLabel local, NodeId node) { return {node, local}; }

Track line(GlobalLabel label, TimeIndex first, TimeIndex last, double y) {
  Track t;
  t.label = label;
  for (TimeIndex k = first; k <= last; ++k) t.states[k] = KinematicState(10.0 * k, y, 10, 0);
  return t;
}

}  // namespace

TEST_CASE("fusion averages the overlap and keeps the rest") {
  FusedTrack a{line(L(1, 1), 1, 5, 0), {L(1, 1)}, false};
  FusedTrack b{line(L(1, 2), 4, 8, 20), {L(1, 2)}, false};
  const FusedTrack f = fuse_tracks(a, b, 0.5, 0.5);
  CHECK(f.track.first_time() == 1);
  CHECK(f.track.last_time() == 8);
  CHECK(f.track.at(2).p.y() == 0.0);
  CHECK(f.track.at(4).p.y() == 10.0);
  CHECK(f.track.at(7).p.y() == 20.0);
  CHECK(f.members == std::vector<GlobalLabel>{L(1, 1), L(1, 2)});
  CHECK(f.matched);

  const FusedTrack g = fuse_tracks(a, b, 0.75, 0.25);
  CHECK(g.track.at(5).p.y() == 5.0);
}

TEST_CASE("pairwise consensus") {
  ConsensusParams p;
  const std::vector<Track> a{line(L(1, 1), 1, 10, 0), line(L(2, 1), 8, 10, 500)};
  const std::vector<Track> b{line(L(7, 2), 3, 10, 4), line(L(8, 2), 1, 10, 900), line(L(9, 2), 9, 10, 300)};
  const auto r = pairwise_consensus(a, b, 0.5, 0.5, p, 10);
  REQUIRE(r.matched_pairs.size() == 1);
  CHECK(r.matched_pairs[0] == LabelPair{L(1, 1), L(7, 2)});
  // The fused track plus the long unmatched 8@2; 2@1 and 9@2 are too short to be retained.
  REQUIRE(r.tracks.size() == 2);
  CHECK(r.tracks[0].track.label == L(1, 1));
  CHECK(r.tracks[0].track.at(5).p.y() == 2.0);
  CHECK(r.tracks[0].track.at(1).p.y() == 0.0);
  CHECK(r.tracks[1].track.label == L(8, 2));

  // Naming follows the longer-lived member regardless of side.
  const auto s = pairwise_consensus(b, a, 0.5, 0.5, p, 10);
  bool found = false;
  for (const auto& t : s.tracks) found = found || t.track.label == L(1, 1);
  CHECK(found);

  CHECK_THROWS_AS(pairwise_consensus(a, b, 0.7, 0.7, p, 10), std::invalid_argument);
  CHECK_THROWS_AS(pairwise_consensus(a, b, -0.5, 1.5, p, 10), std::invalid_argument);
}

TEST_CASE("pairwise consensus with identical inputs is idempotent") {
  ConsensusParams p;
  const std::vector<Track> a{line(L(1, 1), 1, 10, 0), line(L(2, 1), 1, 10, 400)};
  const auto r = pairwise_consensus(a, a, 0.5, 0.5, p, 10);
  REQUIRE(r.tracks.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.tracks[i].track.states.size() == a[i].states.size());
    for (const auto& [k, x] : a[i].states) CHECK(r.tracks[i].track.at(k) == x);
  }
}

TEST_CASE("network consensus names items by class representative") {
  ConsensusParams p;
  LabelEquivalence eq;
  const std::vector<Track> own{line(L(4, 3), 6, 10, 2)};
  const std::map<NodeId, std::vector<Track>> nb{{1, {line(L(1, 1), 1, 10, 0)}}, {2, {line(L(3, 2), 3, 10, 6)}}};
  // Register births as they would have been seen in earlier steps.
  eq.observe(L(1, 1), 1);
  eq.observe(L(3, 2), 3);
  const auto out = network_consensus(3, 10, own, nb, p, eq);
  REQUIRE(out.items.size() == 1);
  CHECK(out.items[0].label == L(1, 1));
  CHECK(out.items[0].members.size() == 3);
  // Fold order: own with node 1 (average 1), then with node 2: (1 + 6) / 2.
  CHECK(out.items[0].state.p.y() == 3.5);
  CHECK(eq.same_class(L(4, 3), L(3, 2)));
  CHECK(out.matched_pairs.size() == 2);
}

TEST_CASE("network consensus applies retention after the fold") {
  ConsensusParams p;
  LabelEquivalence eq;
  // A short track from node 1 that later matches a long one from node 2 survives.
  const std::vector<Track> own;
  const std::map<NodeId, std::vector<Track>> nb{{1, {line(L(1, 1), 8, 10, 0)}}, {2, {line(L(1, 2), 1, 10, 5)}}};
  const auto out = network_consensus(3, 10, own, nb, p, eq);
  REQUIRE(out.items.size() == 1);

  // Short and unmatched: dropped. Tracks not alive at the current step never take part.
  const std::map<NodeId, std::vector<Track>> nb2{{1, {line(L(2, 1), 8, 10, 0)}}, {2, {line(L(2, 2), 1, 9, 300)}}};
  LabelEquivalence eq2;
  CHECK(network_consensus(3, 10, own, nb2, p, eq2).items.empty());
}

TEST_CASE("network consensus without neighbors echoes the node's own tracks") {
  ConsensusParams p;
  LabelEquivalence eq;
  const std::vector<Track> own{line(L(2, 1), 9, 10, 0), line(L(1, 1), 1, 10, 300)};
  const auto out = network_consensus(1, 10, own, {}, p, eq);
  REQUIRE(out.items.size() == 2);
  CHECK(out.items[0].label == L(1, 1));
  CHECK(out.items[1].label == L(2, 1));
  CHECK(out.matched_pairs.empty());
}

TEST_CASE("items carry distinct labels") {
  ConsensusParams p;
  LabelEquivalence eq;
  // 1@1 and 1@2 were merged earlier but now report two separate objects.
  eq.unite(L(1, 1), L(1, 2), 1);
  const std::vector<Track> own;
  const std::map<NodeId, std::vector<Track>> nb{{1, {line(L(1, 1), 1, 10, 0)}}, {2, {line(L(1, 2), 1, 10, 600)}}};
  const auto out = network_consensus(3, 10, own, nb, p, eq);
  REQUIRE(out.items.size() == 2);
  CHECK(out.items[0].label != out.items[1].label);
}
