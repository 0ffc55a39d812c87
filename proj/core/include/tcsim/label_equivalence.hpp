#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tcsim/types.hpp"

namespace tcsim {

/// Union-find over global labels. Each class is represented by its longest-lived member: the one
/// with the earliest birth time, ties broken by (node id, local label) ascending.
/// Classes only ever merge.
class LabelEquivalence {
 public:
  /// Registers a label seen at step k. The first call fixes the label's birth time.
  void observe(const GlobalLabel& label, TimeIndex k);

  /// Merges the classes of a and b. Labels not yet observed are registered with birth time `k`.
  void unite(const GlobalLabel& a, const GlobalLabel& b, TimeIndex k);

  bool known(const GlobalLabel& label) const { return parent_.count(label) != 0; }
  TimeIndex birth(const GlobalLabel& label) const { return birth_.at(label); }

  /// Class representative. Unknown labels are their own representative.
  GlobalLabel representative(const GlobalLabel& label) const;
  bool same_class(const GlobalLabel& a, const GlobalLabel& b) const;

  /// All classes, each sorted, ordered by representative.
  std::vector<std::vector<GlobalLabel>> classes() const;
  std::size_t size() const { return parent_.size(); }

  /// Total number of mutating calls across all instances in this process.
  static std::uint64_t mutation_count();

 private:
  bool precedes(const GlobalLabel& a, const GlobalLabel& b) const;
  GlobalLabel find(const GlobalLabel& label) const;

  std::map<GlobalLabel, GlobalLabel> parent_;
  std::map<GlobalLabel, TimeIndex> birth_;
};

/// Unites every matched pair.
void update_label_equivalence(LabelEquivalence& equivalence, std::span<const std::pair<GlobalLabel, GlobalLabel>> pairs,
                              TimeIndex k);

}  // namespace tcsim
