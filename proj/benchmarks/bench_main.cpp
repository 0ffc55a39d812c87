#include <random>

#include <benchmark/benchmark.h>

#include "tcsim/assignment.hpp"
#include "tcsim/mpc.hpp"
#include "tcsim/ospa.hpp"
#include "tcsim/scenario_io.hpp"
#include "tcsim/simulation.hpp"

using namespace tcsim;

static void BM_Assign(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost(i) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(assign(cost).total_cost);
}
BENCHMARK(BM_Assign)->Arg(5)->Arg(20)->Arg(100);

static void BM_Ospa2(benchmark::State& state) {
  Track a, b;
  for (int k = 1; k <= state.range(0); ++k) {
    a.states[k] = KinematicState(10.0 * k, 0, 10, 0);
    b.states[k + 3] = KinematicState(10.0 * k, 5, 10, 0);
  }
  const OspaParams params;
  for (auto _ : state) benchmark::DoNotOptimize(ospa2(a, b, params));
}
BENCHMARK(BM_Ospa2)->Arg(20)->Arg(80);

static void BM_SolveMpc(benchmark::State& state) {
  const MpcParams params;
  const KinematicState x0(0, 0, 10, 0);
  std::vector<KinematicState> ref;
  std::vector<Vec2> victim;
  for (int k = 1; k <= params.horizon; ++k) {
    ref.emplace_back(60.0 * k, 20.0 * k, 60, 20);
    victim.emplace_back(10.0 * k + 20, 5.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_mpc(x0, ref, std::span<const Vec2>(victim), params).objective);
}
BENCHMARK(BM_SolveMpc)->Unit(benchmark::kMillisecond);

static void BM_RunOnce(benchmark::State& state) {
  const Scenario s = load_scenario(std::string(TCSIM_SCENARIO_DIR) + "/default.json");
  const auto condition = static_cast<Condition>(state.range(0));
  std::uint64_t m = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_once(s, condition, run_seed(s.seed, m++)).hijack_success);
  state.SetLabel(to_string(condition));
}
BENCHMARK(BM_RunOnce)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
