// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit status if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tcsim/assignment.hpp"
#include "tcsim/monte_carlo.hpp"
#include "tcsim/mpc.hpp"
#include "tcsim/ospa.hpp"
#include "tcsim/simulation.hpp"

using namespace tcsim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.empty() ? "" : " | ", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome ospa_oracle() {
  Outcome o;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> card(0, 5);
  const OspaParams params;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto x = oracle::random_set(rng, card(rng), 300);
    const auto y = oracle::random_set(rng, card(rng), 300);
    worst = std::max(worst, std::abs(ospa(x, y, params) - oracle::ospa(x, y, params.c, params.p)));
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-9, "max abs error " + fmt("%.3g", worst));
  o.require(elapsed < 5.0, "runtime " + fmt("%.2f", elapsed) + " s");
  o.detail = o.pass ? "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.3f", elapsed) + " s" : o.detail;
  return o;
}

Outcome ospa2_conventions() {
  Outcome o;
  const OspaParams params;
  const double c = params.c;
  Track a, b;
  o.require(ospa2(a, b, params) == 0.0, "empty/empty != 0");
  a.states[1] = KinematicState(0, 0, 0, 0);
  o.require(ospa2(a, b, params) == c && ospa2(b, a, params) == c, "one-empty != c");
  for (int L = 1; L <= 10; ++L) {
    for (int d = 0; d < 100; d += 7) {
      // The tracks coincide up to d at one step; for the other L - 1 steps only one exists.
      Track t, u;
      t.label = {1, 1};
      u.label = {2, 1};
      t.states[1] = KinematicState(0, 0, 0, 0);
      u.states[1] = KinematicState(d, 0, 0, 0);
      for (int k = 2; k <= L; ++k) u.states[k] = KinematicState(1000.0 + k, 0, 0, 0);
      const double expected = ((L - 1) * c + d) / L;
      const double got = ospa2(t, u, params);
      o.require(got == expected, "L=" + std::to_string(L) + " d=" + std::to_string(d) + " got " + fmt("%.17g", got));
      const std::vector<Track> ta{t}, tb{u};
      const auto m = match_track_sets(ta, tb, params);
      const bool should_match = expected < c;
      o.require((m.pairs.size() == 1) == should_match, "match mismatch at L=" + std::to_string(L));
    }
  }
  return o;
}

Outcome mpc_correctness() {
  Outcome o;
  const MpcParams params;
  const Dynamics dyn = build_dynamics(params.dt);

  // A demanding solve: reference far beyond the speed limit, victim nearby.
  const KinematicState x0(0, 0, 10, 0);
  std::vector<KinematicState> ref;
  std::vector<Vec2> victim;
  for (int k = 1; k <= params.horizon; ++k) {
    ref.emplace_back(60.0 * k, 20.0 * k, 60, 20);
    victim.emplace_back(10.0 * k + 20, 5.0);
  }
  const auto sol = solve_mpc(x0, ref, std::span<const Vec2>(victim), params);
  double residual = 0.0, violation = 0.0;
  for (int k = 0; k < params.horizon; ++k) {
    residual = std::max(residual, (sol.X.col(k + 1) - dyn.step(sol.X.col(k), sol.U.col(k))).cwiseAbs().maxCoeff());
    violation = std::max(violation, sol.U.col(k).norm() - params.a_max);
    violation = std::max(violation, sol.X.col(k + 1).tail<2>().norm() - params.v_max);
  }
  o.require(residual == 0.0, "dynamics residual " + fmt("%.3g", residual));
  o.require(violation <= 1e-6, "constraint violation " + fmt("%.3g", violation));

  // Gradient against central differences at random feasible points.
  const MpcProblem problem(x0, ref, std::span<const Vec2>(victim), params);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd U(2 * params.horizon);
    for (Eigen::Index i = 0; i < U.size(); ++i) U(i) = u(rng);
    U = problem.make_feasible(U);
    const Eigen::VectorXd g = problem.gradient(U);
    const Eigen::VectorXd fd =
        oracle::finite_difference([&](const Eigen::VectorXd& v) { return problem.objective(v); }, U, 1e-3);
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  o.require(worst < 1e-4, "gradient relative error " + fmt("%.3g", worst));

  // One-step problem against its closed form.
  MpcParams one = params;
  one.horizon = 1;
  const KinematicState y0(3, -2, 1, 4);
  const std::vector<KinematicState> r1{KinematicState(10, 5, 2, 0)};
  const Vec2 expected = oracle::one_step_control(y0, r1[0], one.alpha_p, one.alpha_v, one.gamma_p, one.gamma_v, one.dt);
  const auto s1 = solve_mpc(y0, r1, std::nullopt, one);
  const double err = (s1.U.col(0) - expected).norm();
  o.require(err <= 1e-6, "closed-form error " + fmt("%.3g", err));

  // Full receding-horizon run against a moving reference and victim.
  const auto t0 = Clock::now();
  const auto xs = spoof_track(
      KinematicState(0, 400, 20, 0), 80,
      [](TimeIndex k) {
        return NetworkSample{KinematicState(1500.0 - 5.0 * k, 700, -5, 0), KinematicState(20.0 * k, 400, 20, 0)};
      },
      params);
  const double elapsed = seconds_since(t0);
  o.require(xs.size() == 81, "spoof_track length");
  o.require(elapsed < 2.0, "spoof_track " + fmt("%.2f", elapsed) + " s");
  if (o.pass) {
    o.detail = "gradient rel err " + fmt("%.2g", worst) + ", closed-form err " + fmt("%.2g", err) + ", spoof_track " +
               fmt("%.3f", elapsed) + " s";
  }
  return o;
}

// Success as stated for the deterministic setting: the impostor's item at the evaluation node
// carries the victim's class label at the end of the run.
bool label_transferred(const RunResult& r, const Scenario& s) {
  if (!r.hijack_success || !r.victim_label || !r.impostor_label) return false;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    if (s.nodes[i].id == r.evaluation_node) idx = i;
  }
  return *r.impostor_label == r.final_equivalence[idx].representative(*r.victim_label);
}

Outcome deterministic_hijack(const Scenario& s) {
  Outcome o;
  int hard = 0, stealthy = 0;
  for (int m = 0; m < 20; ++m) {
    const std::uint64_t seed = run_seed(s.seed, static_cast<std::uint64_t>(m));
    hard += label_transferred(run_once(s, Condition::hard_switch, seed), s) ? 1 : 0;
    stealthy += label_transferred(run_once(s, Condition::stealthy, seed), s) ? 1 : 0;
  }
  o.require(hard == 20, "hard_switch " + std::to_string(hard) + "/20");
  o.require(stealthy == 20, "stealthy " + std::to_string(stealthy) + "/20");
  if (o.pass) o.detail = "hard_switch 20/20, stealthy 20/20";
  return o;
}

double mean_gap(const ConditionAggregate& attack, const ConditionAggregate& nominal, int first, int last) {
  double sum = 0.0;
  int n = 0;
  for (int k = std::max(first, 1); k <= last; ++k) {
    sum += attack.mean_cardinality[k - 1] - nominal.mean_cardinality[k - 1];
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

Outcome monte_carlo(const Scenario& s) {
  Outcome o;
  const std::vector<Condition> conds{Condition::nominal, Condition::hard_switch, Condition::stealthy};
  MonteCarloOptions opts;
  opts.runs = 100;
  opts.threads = 0;
  const auto t0 = Clock::now();
  const auto agg = run_monte_carlo(s, conds, opts);
  const double elapsed = seconds_since(t0);
  const auto& nominal = *agg.find(Condition::nominal);
  const auto& hard = *agg.find(Condition::hard_switch);
  const auto& stealthy = *agg.find(Condition::stealthy);

  o.require(elapsed < 300.0, "runtime " + fmt("%.1f", elapsed) + " s");

  // (a) silence interval [k1, k2)
  if (hard.median_k1 && hard.median_k2) {
    const int a = static_cast<int>(std::ceil(*hard.median_k1));
    const int b = static_cast<int>(std::ceil(*hard.median_k2)) - 1;
    const double gap = -mean_gap(hard, nominal, a, b);
    o.require(gap > 0.1, "(a) hard_switch underestimation gap " + fmt("%.3f", gap));
    o.detail += "(a) gap " + fmt("%.3f", gap);
  } else {
    o.require(false, "(a) hard_switch never reached injection");
  }
  // (b) attack interval [k1, k3]
  if (stealthy.median_k1 && stealthy.median_k3) {
    const int a = static_cast<int>(std::ceil(*stealthy.median_k1));
    const int b = static_cast<int>(std::floor(*stealthy.median_k3));
    const double gap = mean_gap(stealthy, nominal, a, b);
    o.require(gap > 0.1, "(b) stealthy overestimation gap " + fmt("%.3f", gap));
    o.detail += ", (b) gap " + fmt("%.3f", gap);
  } else {
    o.require(false, "(b) stealthy never completed");
  }
  // (c) median OSPA
  const double mn = *median(nominal.ospa_samples);
  const double mh = *median(hard.ospa_samples);
  const double ms = *median(stealthy.ospa_samples);
  o.require(mh > mn, "(c) hard_switch median OSPA " + fmt("%.3f", mh) + " <= nominal " + fmt("%.3f", mn));
  o.require(ms > mn, "(c) stealthy median OSPA " + fmt("%.3f", ms) + " <= nominal " + fmt("%.3f", mn));
  o.detail += ", (c) median OSPA nominal " + fmt("%.3f", mn) + " hard " + fmt("%.3f", mh) + " stealthy " + fmt("%.3f", ms);
  // (d) success rates
  o.require(hard.success_rate() > 0.5, "(d) hard_switch success rate " + fmt("%.2f", hard.success_rate()));
  o.require(stealthy.success_rate() > 0.5, "(d) stealthy success rate " + fmt("%.2f", stealthy.success_rate()));
  o.detail += ", (d) success hard " + fmt("%.2f", hard.success_rate()) + " stealthy " +
              fmt("%.2f", stealthy.success_rate()) + ", " + fmt("%.1f", elapsed) + " s";
  return o;
}

Outcome fusion_independence(const Scenario& s) {
  Outcome o;
  RunOptions off;
  off.fusion_enabled = false;
  for (Condition c : {Condition::nominal, Condition::hard_switch, Condition::stealthy}) {
    for (int m = 0; m < 5; ++m) {
      const std::uint64_t seed = run_seed(s.seed, static_cast<std::uint64_t>(m));
      const auto a = run_once(s, c, seed);
      const auto b = run_once(s, c, seed, off);
      o.require(a.local_tracks == b.local_tracks, to_string(c) + " run " + std::to_string(m) + " differs");
    }
  }
  return o;
}

Outcome sensitivity(const Scenario& base) {
  Outcome o;
  for (double c : {50.0, 100.0, 200.0}) {
    const Scenario s = oracle::with_cutoff(base, c);
    const Outcome inner = deterministic_hijack(s);
    o.require(inner.pass, "c=" + fmt("%g", c) + ": " + inner.detail);
  }
  return o;
}

}  // namespace

int main() {
  const Scenario noisy = oracle::default_scenario();
  const Scenario deterministic = oracle::deterministic_scenario();

  report("assignment/OSPA oracle equivalence", ospa_oracle);
  report("OSPA2 conventions and short-overlap construction", ospa2_conventions);
  report("MPC correctness", mpc_correctness);
  report("deterministic hijack", [&] { return deterministic_hijack(deterministic); });
  report("Monte Carlo with nominal sensing noise", [&] { return monte_carlo(noisy); });
  report("consensus independence", [&] { return fusion_independence(noisy); });
  report("cut-off sensitivity sweep", [&] { return sensitivity(deterministic); });
  return failures == 0 ? 0 : 1;
}
