#include "tcsim/label_equivalence.hpp"

#include <algorithm>
#include <atomic>
#include <tuple>

namespace tcsim {

namespace {

std::atomic<std::uint64_t> g_mutations{0};

}  // namespace

std::uint64_t LabelEquivalence::mutation_count() { return g_mutations.load(std::memory_order_relaxed); }

void LabelEquivalence::observe(const GlobalLabel& label, TimeIndex k) {
  g_mutations.fetch_add(1, std::memory_order_relaxed);
  if (parent_.emplace(label, label).second) birth_.emplace(label, k);
}

bool LabelEquivalence::precedes(const GlobalLabel& a, const GlobalLabel& b) const {
  return std::tuple(birth_.at(a), a) < std::tuple(birth_.at(b), b);
}

GlobalLabel LabelEquivalence::find(const GlobalLabel& label) const {
  auto it = parent_.find(label);
  if (it == parent_.end()) return label;
  GlobalLabel cur = label;
  while (true) {
    const GlobalLabel& up = parent_.at(cur);
    if (up == cur) return cur;
    cur = up;
  }
}

void LabelEquivalence::unite(const GlobalLabel& a, const GlobalLabel& b, TimeIndex k) {
  observe(a, k);
  observe(b, k);
  const GlobalLabel ra = find(a);
  const GlobalLabel rb = find(b);
  if (ra == rb) return;
  // Roots are always the class's best member, so linking the worse root under the better one keeps
  // the invariant.
  if (precedes(ra, rb)) {
    parent_[rb] = ra;
  } else {
    parent_[ra] = rb;
  }
  // Flatten both endpoints.
  const GlobalLabel root = find(a);
  parent_[a] = root;
  parent_[b] = root;
}

GlobalLabel LabelEquivalence::representative(const GlobalLabel& label) const { return find(label); }

bool LabelEquivalence::same_class(const GlobalLabel& a, const GlobalLabel& b) const { return find(a) == find(b); }

std::vector<std::vector<GlobalLabel>> LabelEquivalence::classes() const {
  std::map<GlobalLabel, std::vector<GlobalLabel>> by_root;
  for (const auto& [label, _] : parent_) by_root[find(label)].push_back(label);
  std::vector<std::vector<GlobalLabel>> out;
  out.reserve(by_root.size());
  for (auto& [_, members] : by_root) out.push_back(std::move(members));
  return out;
}

void update_label_equivalence(LabelEquivalence& equivalence, std::span<const std::pair<GlobalLabel, GlobalLabel>> pairs,
                              TimeIndex k) {
  for (const auto& [a, b] : pairs) equivalence.unite(a, b, k);
}

}  // namespace tcsim
