#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tcsim/simulation.hpp"

namespace tcsim {

/// Empirical CDF over sorted distinct sample values: F[i] = fraction of samples <= x[i].
struct Ecdf {
  std::vector<double> x;
  std::vector<double> F;

  /// Right-continuous step function; 0 left of the smallest sample.
  double operator()(double value) const;
};

Ecdf make_ecdf(std::vector<double> samples);

/// Median of the values (mean of the two middle ones for even counts); empty input gives nullopt.
std::optional<double> median(std::vector<double> values);

struct ConditionAggregate {
  Condition condition = Condition::nominal;
  int runs = 0;
  int successes = 0;
  int attack_failures = 0;
  std::vector<double> mean_cardinality;  // index k-1
  std::vector<double> ospa_samples;      // run-major, step-minor
  Ecdf ecdf;
  std::vector<StageTimes> stage_times;   // per run
  std::optional<double> median_k0, median_k1, median_k2, median_k3, median_reentry;

  double success_rate() const { return runs == 0 ? 0.0 : static_cast<double>(successes) / runs; }
};

struct AggregateResult {
  int runs = 0;
  int horizon = 0;
  std::uint64_t master_seed = 0;
  std::vector<ConditionAggregate> conditions;

  const ConditionAggregate* find(Condition condition) const;
};

struct MonteCarloOptions {
  int runs = 100;
  unsigned threads = 1;  // 0 selects the hardware concurrency
  RunOptions run_options;
  /// Called once per run, in (condition, run index) order, after all runs finished.
  std::function<void(const RunResult&, int run_index)> on_run;
};

/// M runs per condition with seeds run_seed(scenario.seed, m). Runs may execute in parallel; the
/// result is identical to sequential execution.
AggregateResult run_monte_carlo(const Scenario& scenario, std::span<const Condition> conditions,
                                const MonteCarloOptions& options);

/// Folds one run into an aggregate (used by run_monte_carlo; exposed for testing).
void accumulate_run(ConditionAggregate& aggregate, const RunResult& run, int horizon);
/// Finalises means, ECDF and medians after all runs were accumulated.
void finalize_aggregate(ConditionAggregate& aggregate);

}  // namespace tcsim
