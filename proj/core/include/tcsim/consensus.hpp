#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tcsim/label_equivalence.hpp"
#include "tcsim/ospa.hpp"
#include "tcsim/types.hpp"

namespace tcsim {

struct ConsensusParams {
  OspaParams ospa;
  std::size_t retention_length = 5;  // minimum domain length for an unmatched track to survive
  int matching_window = 0;           // steps of history used for matching; 0 means all
  NodeId evaluation_node = 3;

  void validate() const;
  std::optional<TimeWindow> window_at(TimeIndex now) const;
};

/// A track produced by fusing one or more reported tracks. `track.label` is the member chosen to
/// name it; `members` lists every contributing label in the order they joined.
struct FusedTrack {
  Track track;
  std::vector<GlobalLabel> members;
  bool matched = false;
};

using LabelPair = std::pair<GlobalLabel, GlobalLabel>;

/// Weighted fusion of two histories: w_a*a + w_b*b where both exist, the available state elsewhere.
FusedTrack fuse_tracks(const FusedTrack& a, const FusedTrack& b, double w_a, double w_b);

struct PairwiseResult {
  std::vector<FusedTrack> tracks;
  std::vector<LabelPair> matched_pairs;
};

/// Matches Ta against Tb, fuses matched pairs with weights (w_a, w_b) and keeps unmatched tracks
/// whose domain length reaches the retention threshold. A fused track is named after its
/// longer-lived member (earlier first report, then the smaller label).
PairwiseResult pairwise_consensus(std::span<const Track> a, std::span<const Track> b, double w_a, double w_b,
                                  const ConsensusParams& params, TimeIndex now);

struct ConsensusItem {
  GlobalLabel label;
  KinematicState state;
  std::vector<GlobalLabel> members;
};

struct ConsensusOutput {
  TimeIndex time = 0;
  NodeId node = 0;
  std::vector<ConsensusItem> items;  // sorted by label
  std::vector<LabelPair> matched_pairs;
};

/// Network consensus at one node: folds the neighbors' tracks into the node's own tracks in
/// ascending neighbor id with equal weights, records every match in `equivalence`, and names each
/// resulting item by its class representative. Retention is applied once, after the fold, to items
/// that never matched. Only tracks with a state at `now` take part.
ConsensusOutput network_consensus(NodeId node, TimeIndex now, std::span<const Track> own,
                                  const std::map<NodeId, std::vector<Track>>& neighbor_tracks,
                                  const ConsensusParams& params, LabelEquivalence& equivalence);

}  // namespace tcsim
