#include <set>
#include <vector>

#include "doctest.h"
#include "tcsim/local_tracker.hpp"

using namespace tcsim;

namespace {

Measurement at(double x, double y, TimeIndex k, int target = 1) {
  Measurement m;
  m.z = Vec2(x, y);
  m.time = k;
  m.target_id = target;
  return m;
}

}  // namespace

TEST_CASE("motion model") {
  const auto m = MotionModel::constant_velocity(1.0, 5.0);
  Vec4 x(0, 0, 1, 0);
  CHECK((m.A * x).isApprox(Vec4(1, 0, 1, 0)));
  CHECK(m.Q.isApprox(m.Q.transpose()));
  CHECK(m.Q(0, 0) == doctest::Approx(25.0 / 4.0));
  CHECK(m.Q(0, 2) == doctest::Approx(25.0 / 2.0));
  CHECK(m.Q(2, 2) == doctest::Approx(25.0));
}

TEST_CASE("confirmation needs three hits in four steps") {
  LocalTracker tr(TrackerParams{}, 2.0, 1.0);
  CHECK(tr.step(1, std::vector{at(0, 100, 1)}).empty());
  CHECK(tr.step(2, std::vector{at(10, 100, 2)}).empty());
  const auto out = tr.step(3, std::vector{at(20, 100, 3)});
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == 1);
  CHECK(std::abs(out[0].state.p.x() - 20) < 1.0);
}

TEST_CASE("tentative track without confirmation dies") {
  LocalTracker tr(TrackerParams{}, 2.0, 1.0);
  tr.step(1, std::vector{at(0, 100, 1)});
  for (int k = 2; k <= 4; ++k) tr.step(k, {});
  CHECK(tr.tracks().empty());
}

TEST_CASE("confirmed track dies after the miss budget and labels are not reused") {
  LocalTracker tr(TrackerParams{}, 2.0, 1.0);
  for (int k = 1; k <= 5; ++k) tr.step(k, std::vector{at(10.0 * k, 100, k)});
  REQUIRE(tr.tracks().size() == 1);
  for (int k = 6; k <= 8; ++k) {
    CHECK(tr.step(k, {}).empty());
    CHECK(tr.tracks().size() == 1);
  }
  tr.step(9, {});
  CHECK(tr.tracks().empty());
  for (int k = 10; k <= 12; ++k) tr.step(k, std::vector{at(10.0 * k, 100, k)});
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].label == 2);
}

TEST_CASE("with vanishing noise the reported position equals the measurement") {
  TrackerParams p;
  LocalTracker tr(p, 0.0, 1.0);
  std::vector<LocalEstimate> out;
  for (int k = 1; k <= 60; ++k) out = tr.step(k, std::vector{at(5.0 * k, 200 - 3.0 * k, k)});
  REQUIRE(out.size() == 1);
  CHECK(std::abs(out[0].state.p.x() - 300) < 1e-5);
  CHECK(std::abs(out[0].state.p.y() - 20) < 1e-5);
  CHECK(std::abs(out[0].state.v.x() - 5) < 1e-2);
  CHECK(std::abs(out[0].state.v.y() + 3) < 1e-2);
  const auto& cov = tr.tracks()[0].cov;
  CHECK(cov.isApprox(cov.transpose()));
}

TEST_CASE("well separated targets keep their labels") {
  LocalTracker tr(TrackerParams{}, 2.0, 1.0);
  Rng rng(17);
  std::normal_distribution<double> n(0.0, 2.0);
  std::map<LocalLabel, double> lane;
  for (int k = 1; k <= 40; ++k) {
    std::vector<Measurement> z{at(10.0 * k + n(rng), 100 + n(rng), k, 1), at(10.0 * k + n(rng), 600 + n(rng), k, 2)};
    for (const auto& e : tr.step(k, z)) {
      auto [it, inserted] = lane.emplace(e.label, e.state.p.y());
      if (!inserted) CHECK(std::abs(it->second - e.state.p.y()) < 50);
    }
  }
  CHECK(lane.size() == 2);
}

TEST_CASE("clutter alone rarely confirms") {
  LocalTracker tr(TrackerParams{}, 2.0, 1.0);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 800.0);
  std::size_t confirmed = 0;
  for (int k = 1; k <= 200; ++k) {
    std::vector<Measurement> z{at(u(rng), u(rng), k, -1), at(u(rng), u(rng), k, -1)};
    confirmed += tr.step(k, z).size();
  }
  CHECK(confirmed < 10);
}
