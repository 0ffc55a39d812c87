#include <random>

#include "doctest.h"
#include "tcsim/label_equivalence.hpp"

using namespace tcsim;

namespace {

GlobalLabel L(LocalLabel local, NodeId node) { return {node, local}; }

}  // namespace

TEST_CASE("unknown labels are singletons") {
  LabelEquivalence eq;
  CHECK_FALSE(eq.known(L(1, 1)));
  CHECK(eq.representative(L(1, 1)) == L(1, 1));
  CHECK(eq.same_class(L(1, 1), L(1, 1)));
  CHECK_FALSE(eq.same_class(L(1, 1), L(2, 1)));
}

TEST_CASE("birth is fixed by the first observation") {
  LabelEquivalence eq;
  eq.observe(L(4, 2), 7);
  eq.observe(L(4, 2), 3);
  CHECK(eq.birth(L(4, 2)) == 7);
  eq.unite(L(4, 2), L(9, 1), 11);
  CHECK(eq.birth(L(9, 1)) == 11);
}

TEST_CASE("representative is the earliest born member") {
  LabelEquivalence eq;
  eq.observe(L(5, 3), 2);
  eq.observe(L(1, 1), 6);
  eq.unite(L(1, 1), L(5, 3), 6);
  CHECK(eq.representative(L(1, 1)) == L(5, 3));

  // Ties on birth fall back to (node, local).
  LabelEquivalence tie;
  tie.observe(L(9, 2), 1);
  tie.observe(L(2, 3), 1);
  tie.observe(L(7, 2), 1);
  tie.unite(L(2, 3), L(9, 2), 1);
  tie.unite(L(9, 2), L(7, 2), 1);
  CHECK(tie.representative(L(2, 3)) == L(7, 2));
}

TEST_CASE("classes are transitive and only merge") {
  LabelEquivalence eq;
  eq.unite(L(1, 1), L(1, 2), 1);
  eq.unite(L(1, 2), L(1, 3), 2);
  CHECK(eq.same_class(L(1, 1), L(1, 3)));
  eq.unite(L(1, 1), L(1, 3), 3);
  CHECK(eq.classes().size() == 1);
  CHECK(eq.classes()[0] == std::vector<GlobalLabel>{L(1, 1), L(1, 2), L(1, 3)});
}

TEST_CASE("random unions agree with a naive partition") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 29);
  LabelEquivalence eq;
  std::vector<int> group(30);
  for (int i = 0; i < 30; ++i) {
    group[i] = i;
    eq.observe(L(i, 1 + i % 3), pick(rng));
  }
  for (int step = 0; step < 25; ++step) {
    const int a = pick(rng), b = pick(rng);
    eq.unite(L(a, 1 + a % 3), L(b, 1 + b % 3), 40);
    const int ga = group[a], gb = group[b];
    for (int& g : group) {
      if (g == gb) g = ga;
    }
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 30; ++j) CHECK(eq.same_class(L(i, 1 + i % 3), L(j, 1 + j % 3)) == (group[i] == group[j]));
    }
  }
  for (const auto& cls : eq.classes()) {
    const GlobalLabel rep = eq.representative(cls.front());
    for (const auto& m : cls) {
      CHECK(eq.representative(m) == rep);
      CHECK(std::tuple(eq.birth(rep), rep) <= std::tuple(eq.birth(m), m));
    }
  }
}

TEST_CASE("mutation counter moves only on mutating calls") {
  LabelEquivalence eq;
  const auto before = LabelEquivalence::mutation_count();
  eq.observe(L(1, 1), 1);
  eq.unite(L(1, 1), L(2, 1), 1);
  const std::vector<std::pair<GlobalLabel, GlobalLabel>> pairs{{L(3, 1), L(4, 1)}};
  update_label_equivalence(eq, pairs, 2);
  const auto after = LabelEquivalence::mutation_count();
  CHECK(after > before);
  (void)eq.same_class(L(1, 1), L(2, 1));
  (void)eq.classes();
  CHECK(LabelEquivalence::mutation_count() == after);
}
