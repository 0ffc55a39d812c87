#include "tcsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "tcsim/scenario_io.hpp"

namespace tcsim {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed: " + path_.string());
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << fields, first = false), ...);
    out_ << '\n';
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

nlohmann::json times_json(const StageTimes& t) {
  auto opt = [](const std::optional<TimeIndex>& k) { return k ? nlohmann::json(*k) : nlohmann::json(nullptr); };
  return {{"k0", opt(t.k0)}, {"k1", opt(t.k1)}, {"k2", opt(t.k2)}, {"k3", opt(t.k3)}, {"reentry", opt(t.reentry)}};
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string run_directory_name(Condition condition, int run_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", run_index);
  return to_string(condition) + "_" + buf;
}

void write_scenario_echo(const Scenario& scenario, const fs::path& dir) {
  ensure_dir(dir);
  write_text(dir / "scenario.json", scenario_to_json(scenario));
}

void write_run(const RunResult& run, const fs::path& dir) {
  ensure_dir(dir);
  {
    CsvFile f(dir / "truth.csv", "time,target_id,x,y,vx,vy,observable");
    for (const auto& r : run.truth) {
      f.row(r.time, r.target_id, num(r.state.p.x()), num(r.state.p.y()), num(r.state.v.x()), num(r.state.v.y()),
            r.observable ? 1 : 0);
    }
  }
  {
    CsvFile f(dir / "local_tracks.csv", "time,node,label,x,y,vx,vy");
    for (const auto& r : run.local_tracks) {
      f.row(r.time, r.node, r.label, num(r.state.p.x()), num(r.state.p.y()), num(r.state.v.x()), num(r.state.v.y()));
    }
  }
  {
    CsvFile f(dir / "consensus.csv", "time,node,label_node,label_local,x,y,vx,vy,members");
    for (const auto& out : run.consensus) {
      for (const auto& item : out.items) {
        std::string members;
        for (const auto& m : item.members) members += (members.empty() ? "" : ";") + to_string(m);
        f.row(out.time, out.node, item.label.node_id, item.label.local_label, num(item.state.p.x()),
              num(item.state.p.y()), num(item.state.v.x()), num(item.state.v.y()), members);
      }
    }
  }
  {
    CsvFile f(dir / "attack_events.csv", "time,stage,x,y,vx,vy");
    for (const auto& e : run.attack_events) {
      if (e.spoof) {
        f.row(e.time, to_string(e.stage), num(e.spoof->p.x()), num(e.spoof->p.y()), num(e.spoof->v.x()),
              num(e.spoof->v.y()));
      } else {
        f.row(e.time, to_string(e.stage), "SILENCE", "SILENCE", "SILENCE", "SILENCE");
      }
    }
  }
  {
    CsvFile f(dir / "planner_trace.csv",
              "step,objective,iterations,converged,min_victim_distance,ux,uy,reference_gap,victim_gap");
    for (const auto& r : run.planner_trace) {
      f.row(r.step, num(r.objective), r.iterations, r.converged ? 1 : 0,
            std::isfinite(r.min_victim_distance) ? num(r.min_victim_distance) : std::string("inf"),
            num(r.applied_control.x()), num(r.applied_control.y()), r.reference_gap ? 1 : 0, r.victim_gap ? 1 : 0);
    }
  }
  if (!run.measurements.empty()) {
    CsvFile f(dir / "measurements.csv", "time,node,x,y,is_clutter");
    for (const auto& m : run.measurements) f.row(m.time, m.origin_node, num(m.z.x()), num(m.z.y()), m.is_clutter() ? 1 : 0);
  }
  {
    CsvFile f(dir / "evaluation.csv", "time,cardinality,ospa");
    for (std::size_t i = 0; i < run.cardinality.size(); ++i) f.row(i + 1, run.cardinality[i], num(run.ospa[i]));
  }

  auto label_json = [](const std::optional<GlobalLabel>& l) {
    return l ? nlohmann::json{{"node", l->node_id}, {"local", l->local_label}} : nlohmann::json(nullptr);
  };
  nlohmann::json j = {{"condition", to_string(run.condition)},
                      {"seed", run.seed},
                      {"horizon", run.horizon},
                      {"evaluation_node", run.evaluation_node},
                      {"stage_times", times_json(run.stage_times)},
                      {"attack_failed", run.attack_failed},
                      {"victim_label", label_json(run.victim_label)},
                      {"impostor_label", label_json(run.impostor_label)},
                      {"hijack_success", run.hijack_success},
                      {"covariance_repairs", run.covariance_repairs}};
  write_text(dir / "run.json", j.dump(2));
}

void write_aggregate(const AggregateResult& agg, const fs::path& dir) {
  ensure_dir(dir);
  {
    std::string header = "time";
    for (const auto& c : agg.conditions) header += "," + to_string(c.condition);
    CsvFile f(dir / "cardinality_mean.csv", header);
    for (int k = 1; k <= (agg.conditions.empty() ? 0 : agg.horizon); ++k) {
      std::string line = std::to_string(k);
      for (const auto& c : agg.conditions) line += "," + num(c.mean_cardinality[static_cast<std::size_t>(k - 1)]);
      f.row(line);
    }
  }
  {
    CsvFile f(dir / "ospa_samples.csv", "condition,run,time,ospa");
    for (const auto& c : agg.conditions) {
      const std::size_t per_run = static_cast<std::size_t>(agg.horizon);
      for (std::size_t i = 0; i < c.ospa_samples.size(); ++i) {
        f.row(to_string(c.condition), per_run ? i / per_run : 0, per_run ? i % per_run + 1 : 0, num(c.ospa_samples[i]));
      }
    }
  }
  {
    CsvFile f(dir / "ecdf.csv", "condition,x,F");
    for (const auto& c : agg.conditions) {
      for (std::size_t i = 0; i < c.ecdf.x.size(); ++i) f.row(to_string(c.condition), num(c.ecdf.x[i]), num(c.ecdf.F[i]));
    }
  }
  nlohmann::json conditions = nlohmann::json::object();
  for (const auto& c : agg.conditions) {
    conditions[to_string(c.condition)] = {{"runs", c.runs},
                                          {"hijack_successes", c.successes},
                                          {"hijack_success_rate", c.success_rate()},
                                          {"attack_failures", c.attack_failures},
                                          {"median_k0", opt_json(c.median_k0)},
                                          {"median_k1", opt_json(c.median_k1)},
                                          {"median_k2", opt_json(c.median_k2)},
                                          {"median_k3", opt_json(c.median_k3)},
                                          {"median_reentry", opt_json(c.median_reentry)},
                                          {"median_ospa", opt_json(median(c.ospa_samples))}};
  }
  nlohmann::json summary = {
      {"runs", agg.runs}, {"horizon", agg.horizon}, {"master_seed", agg.master_seed}, {"conditions", conditions}};
  write_text(dir / "summary.json", summary.dump(2));
}

}  // namespace tcsim
