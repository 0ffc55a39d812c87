#include "doctest.h"
#include "oracles.hpp"
#include "tcsim/attacker.hpp"
#include "tcsim/label_equivalence.hpp"
#include "tcsim/simulation.hpp"

using namespace tcsim;

namespace {

GlobalLabel L(LocalLabel local, NodeId node) { return {node, local}; }

// Track reported at step k with history 1..k along a straight line.
Track report(GlobalLabel label, TimeIndex first, TimeIndex k, Vec2 start, Vec2 velocity) {
  Track t;
  t.label = label;
  for (TimeIndex i = first; i <= k; ++i) t.states[i] = KinematicState(start + (i - first) * velocity, velocity);
  return t;
}

}  // namespace

TEST_CASE("visibility inference") {
  InterceptedView view;
  const std::vector<Track> honest{report(L(1, 1), 1, 5, Vec2(0, 0), Vec2(1, 0))};
  const std::vector<Track> forged{report(L(1, 2), 1, 7, Vec2(0, 0), Vec2(1, 0))};
  view.ingest(5, true, honest);
  view.ingest(7, false, forged);
  CHECK(infer_visibility(view, {L(1, 1)}, 5, 3) == Visibility::visible);
  CHECK(infer_visibility(view, {L(1, 1)}, 7, 3) == Visibility::visible);
  CHECK(infer_visibility(view, {L(1, 1)}, 8, 3) == Visibility::blind);
  CHECK(infer_visibility(view, {L(1, 1), L(1, 2)}, 8, 3) == Visibility::blind);
  CHECK(infer_visibility(view, {L(1, 2)}, 7, 3) == Visibility::never_seen);
  CHECK(infer_visibility(view, {}, 7, 3) == Visibility::never_seen);
  CHECK(view.find(L(1, 1))->honest);
  CHECK_FALSE(view.find(L(1, 2))->honest);
  CHECK(view.reported_at(7) == std::vector<GlobalLabel>{L(1, 2)});
}

TEST_CASE("interception covers compromised nodes and their neighbors") {
  Scenario s = oracle::default_scenario();
  Attacker a(AttackVariant::hard_switch, s);
  CHECK(a.intercepts(1));
  CHECK(a.intercepts(2));
  CHECK(a.intercepts(3));
  CHECK(a.spoofing_node() == 2);
  CHECK(a.spoof_label() == L(kSpoofLocalLabel, 2));

  // With a line topology 1-2 and 3 isolated from 2, node 3 is not intercepted.
  s.nodes[0].neighbors = {2};
  s.nodes[1].neighbors = {1};
  s.nodes[2].neighbors = {};
  Attacker b(AttackVariant::hard_switch, s);
  CHECK_FALSE(b.intercepts(3));
}

TEST_CASE("hard switch: copy, silence, copy") {
  const Scenario s = oracle::default_scenario();
  Attacker a(AttackVariant::hard_switch, s);
  const GlobalLabel victim = L(1, 1), impostor = L(2, 3), victim_at_2 = L(5, 2);
  const Vec2 v0(100, 400), vv(10, 0), i0(1500, 700), iv(0, -5);
  const auto before = LabelEquivalence::mutation_count();

  for (TimeIndex k = 1; k <= 12; ++k) {
    std::vector<Track> n1, n2, n3;
    if (k <= 5) n1.push_back(report(victim, 1, k, v0, vv));
    n2.push_back(report(victim_at_2, 1, k, v0 + Vec2(1, 1), vv));
    n3.push_back(report(impostor, 1, k, i0, iv));
    a.observe(k, 1, n1);
    a.observe(k, 2, n2);
    a.observe(k, 3, n3);
    const auto emitted = a.act(k);
    const auto forged = a.forge(2, k, n2);
    const auto pass = a.forge(1, k, n1);
    CHECK(pass.size() == n1.size());

    if (k < 5) {
      CHECK(a.stage() == AttackStage::pending);
      CHECK_FALSE(emitted);
      REQUIRE(forged.size() == 1);
      CHECK(forged[0].label == victim_at_2);
    } else if (k == 5) {
      CHECK(a.stage() == AttackStage::mimicry);
      REQUIRE(emitted);
      CHECK(*emitted == n1[0].at(5));
      // Node 2's own victim track is associated and hidden; the spoof is appended.
      REQUIRE(forged.size() == 1);
      CHECK(forged[0].label == a.spoof_label());
      CHECK(forged[0].at(5) == *emitted);
    } else if (k < 8) {
      CHECK(a.stage() == AttackStage::mimicry);
      CHECK_FALSE(emitted);  // victim not reported by an honest source: nothing to copy
      CHECK(forged.empty());
    } else if (k == 8) {
      CHECK(a.stage() == AttackStage::pull_off);
      CHECK_FALSE(emitted);
      CHECK(forged.empty());
    } else if (k == 9) {
      CHECK(a.stage() == AttackStage::injection);
      REQUIRE(emitted);
      CHECK(*emitted == n3[0].at(9));
    } else {
      CHECK(a.stage() == AttackStage::done);
      CHECK_FALSE(emitted);
    }
  }
  CHECK(a.times().k0 == 5);
  CHECK(a.times().k1 == 8);
  CHECK(a.times().k2 == 9);
  CHECK(a.times().k3 == 10);
  CHECK(a.selected_victim() == victim);
  CHECK(a.selected_impostor() == impostor);
  CHECK(a.victim_labels().count(victim_at_2) == 1);
  CHECK_FALSE(a.failed());
  CHECK(a.planner_trace().empty());
  CHECK(LabelEquivalence::mutation_count() == before);
}

TEST_CASE("impostor tracks on the compromised node are hidden until done") {
  const Scenario s = oracle::default_scenario();
  Attacker a(AttackVariant::hard_switch, s);
  const GlobalLabel victim = L(1, 1), impostor = L(2, 3), impostor_at_2 = L(9, 2);
  for (TimeIndex k = 1; k <= 9; ++k) {
    std::vector<Track> n1, n2, n3;
    if (k <= 5) n1.push_back(report(victim, 1, k, Vec2(100, 400), Vec2(10, 0)));
    n2.push_back(report(impostor_at_2, 1, k, Vec2(1500, 701), Vec2(0, -5)));
    n3.push_back(report(impostor, 1, k, Vec2(1500, 700), Vec2(0, -5)));
    a.observe(k, 1, n1);
    a.observe(k, 2, n2);
    a.observe(k, 3, n3);
    a.act(k);
    const auto forged = a.forge(2, k, n2);
    const bool shown = std::any_of(forged.begin(), forged.end(), [&](const Track& t) { return t.label == impostor_at_2; });
    CHECK(shown == (k < 9));
  }
  CHECK(a.stage() == AttackStage::injection);
}

TEST_CASE("stealthy attack: stages only advance and the spoof is dynamically feasible") {
  const Scenario s = oracle::deterministic_scenario();
  const RunResult r = run_once(s, Condition::stealthy, run_seed(s.seed, 0));
  REQUIRE_FALSE(r.attack_events.empty());
  for (std::size_t i = 1; i < r.attack_events.size(); ++i) {
    CHECK(r.attack_events[i].time == r.attack_events[i - 1].time + 1);
    CHECK(static_cast<int>(r.attack_events[i].stage) >= static_cast<int>(r.attack_events[i - 1].stage));
  }
  const auto& mpc = s.attack.mpc;
  std::optional<KinematicState> prev;
  for (const auto& e : r.attack_events) {
    if (!e.spoof) continue;
    CHECK(e.spoof->v.norm() <= mpc.v_max + 1e-6);
    if (prev) {
      CHECK((e.spoof->v - prev->v).norm() <= mpc.a_max * mpc.dt + 1e-6);
      CHECK((e.spoof->p - (prev->p + mpc.dt * prev->v)).norm() <= 0.5 * mpc.a_max * mpc.dt * mpc.dt + 1e-6);
    }
    prev = e.spoof;
  }
  REQUIRE(r.stage_times.k0);
  REQUIRE(r.stage_times.k1);
  REQUIRE(r.stage_times.k2);
  CHECK(*r.stage_times.k0 < *r.stage_times.k1);
  CHECK(*r.stage_times.k1 < *r.stage_times.k2);
  CHECK_FALSE(r.planner_trace.empty());
}

TEST_CASE("stage names") {
  CHECK(to_string(AttackStage::pull_off) == "pull_off");
  CHECK(to_string(AttackVariant::stealthy) == "stealthy");
}
