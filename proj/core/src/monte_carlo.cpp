#include "tcsim/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace tcsim {

double Ecdf::operator()(double value) const {
  const auto it = std::upper_bound(x.begin(), x.end(), value);
  if (it == x.begin()) return 0.0;
  return F[static_cast<std::size_t>(it - x.begin()) - 1];
}

Ecdf make_ecdf(std::vector<double> samples) {
  Ecdf e;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    e.x.push_back(samples[i]);
    e.F.push_back(static_cast<double>(i + 1) / n);
  }
  return e;
}

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const ConditionAggregate* AggregateResult::find(Condition condition) const {
  for (const auto& c : conditions) {
    if (c.condition == condition) return &c;
  }
  return nullptr;
}

void accumulate_run(ConditionAggregate& aggregate, const RunResult& run, int horizon) {
  if (aggregate.mean_cardinality.empty()) aggregate.mean_cardinality.assign(static_cast<std::size_t>(horizon), 0.0);
  ++aggregate.runs;
  if (run.hijack_success) ++aggregate.successes;
  if (run.attack_failed) ++aggregate.attack_failures;
  for (std::size_t k = 0; k < run.cardinality.size() && k < aggregate.mean_cardinality.size(); ++k) {
    aggregate.mean_cardinality[k] += run.cardinality[k];
  }
  aggregate.ospa_samples.insert(aggregate.ospa_samples.end(), run.ospa.begin(), run.ospa.end());
  aggregate.stage_times.push_back(run.stage_times);
}

void finalize_aggregate(ConditionAggregate& aggregate) {
  if (aggregate.runs > 0) {
    for (double& v : aggregate.mean_cardinality) v /= aggregate.runs;
  }
  aggregate.ecdf = make_ecdf(aggregate.ospa_samples);
  auto collect = [&](auto member) {
    std::vector<double> values;
    for (const auto& t : aggregate.stage_times) {
      if (t.*member) values.push_back(*(t.*member));
    }
    return median(values);
  };
  aggregate.median_k0 = collect(&StageTimes::k0);
  aggregate.median_k1 = collect(&StageTimes::k1);
  aggregate.median_k2 = collect(&StageTimes::k2);
  aggregate.median_k3 = collect(&StageTimes::k3);
  aggregate.median_reentry = collect(&StageTimes::reentry);
}

AggregateResult run_monte_carlo(const Scenario& scenario, std::span<const Condition> conditions,
                                const MonteCarloOptions& options) {
  if (options.runs < 0) throw std::invalid_argument("run_monte_carlo: runs must be >= 0");
  scenario.validate();
  AggregateResult agg;
  agg.runs = options.runs;
  agg.horizon = scenario.horizon;
  agg.master_seed = scenario.seed;

  const std::size_t per_condition = static_cast<std::size_t>(options.runs);
  const std::size_t total = conditions.size() * per_condition;
  std::vector<RunResult> results(total);

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      try {
        const Condition c = conditions[job / per_condition];
        const auto m = static_cast<std::uint64_t>(job % per_condition);
        results[job] = run_once(scenario, c, run_seed(scenario.seed, m), options.run_options);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    ConditionAggregate c;
    c.condition = conditions[ci];
    c.mean_cardinality.assign(static_cast<std::size_t>(scenario.horizon), 0.0);
    for (std::size_t m = 0; m < per_condition; ++m) {
      const RunResult& r = results[ci * per_condition + m];
      if (options.on_run) options.on_run(r, static_cast<int>(m));
      accumulate_run(c, r, scenario.horizon);
    }
    finalize_aggregate(c);
    agg.conditions.push_back(std::move(c));
  }
  return agg;
}

}  // namespace tcsim
