#include "tcsim/attacker.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "tcsim/ospa.hpp"

namespace tcsim {

std::string to_string(AttackVariant variant) {
  return variant == AttackVariant::hard_switch ? "hard_switch" : "stealthy";
}

std::string to_string(AttackStage stage) {
  switch (stage) {
    case AttackStage::pending: return "pending";
    case AttackStage::mimicry: return "mimicry";
    case AttackStage::pull_off: return "pull_off";
    case AttackStage::injection: return "injection";
    case AttackStage::done: return "done";
  }
  return "pending";
}

// ---------------------------------------------------------------------------------------------
// InterceptedView

void InterceptedView::ingest(TimeIndex k, bool honest, std::span<const Track> tracks) {
  for (const auto& t : tracks) {
    if (!t.exists_at(k)) continue;
    auto [it, inserted] = records_.try_emplace(t.label);
    Record& r = it->second;
    if (inserted) {
      r.honest = honest;
      r.first_report = k;
    }
    r.last_report = k;
    ++r.reports;
    r.track = t;
  }
}

const InterceptedView::Record* InterceptedView::find(const GlobalLabel& label) const {
  auto it = records_.find(label);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<GlobalLabel> InterceptedView::reported_at(TimeIndex k) const {
  std::vector<GlobalLabel> out;
  for (const auto& [label, r] : records_) {
    if (r.last_report == k) out.push_back(label);
  }
  return out;
}

Visibility infer_visibility(const InterceptedView& view, const std::set<GlobalLabel>& labels, TimeIndex now, int h) {
  std::optional<TimeIndex> last;
  for (const auto& label : labels) {
    const auto* r = view.find(label);
    if (!r || !r->honest) continue;
    last = last ? std::max(*last, r->last_report) : r->last_report;
  }
  if (!last) return Visibility::never_seen;
  return now - *last >= h ? Visibility::blind : Visibility::visible;
}

// ---------------------------------------------------------------------------------------------
// Attacker

Attacker::Attacker(AttackVariant variant, const Scenario& scenario)
    : variant_(variant), scenario_(scenario), rendezvous_(scenario.rendezvous_point()) {
  for (NodeId c : scenario.attack.compromised_nodes) {
    intercepted_.insert(c);
    for (NodeId nb : scenario.node(c).neighbors) intercepted_.insert(nb);
  }
  if (!scenario.attack.compromised_nodes.empty()) spoofing_node_ = *scenario.attack.compromised_nodes.begin();
  spoof_.label = spoof_label();
}

void Attacker::observe(TimeIndex k, NodeId source, std::span<const Track> tracks) {
  if (!intercepts(source)) return;
  view_.ingest(k, !is_compromised(source), tracks);
}

std::optional<Attacker::Estimate> Attacker::latest_report(TimeIndex k, const std::set<GlobalLabel>& labels) const {
  // Among reports at step k, honest sources first, then the smallest label.
  std::optional<std::tuple<bool, GlobalLabel>> best;
  std::optional<Estimate> out;
  for (const auto& label : labels) {
    const auto* r = view_.find(label);
    if (!r || r->last_report != k) continue;
    const auto key = std::tuple(!r->honest, label);
    if (!best || key < *best) {
      best = key;
      out = Estimate{r->track.at(k), k};
    }
  }
  return out;
}

std::optional<KinematicState> Attacker::honest_report(TimeIndex k, const std::set<GlobalLabel>& labels,
                                                      std::optional<GlobalLabel> preferred) const {
  auto reported = [&](const GlobalLabel& label) {
    const auto* r = view_.find(label);
    return r && r->honest && r->last_report == k ? r : nullptr;
  };
  if (preferred) {
    if (const auto* r = reported(*preferred)) return r->track.at(k);
  }
  for (const auto& label : labels) {
    if (const auto* r = reported(label)) return r->track.at(k);
  }
  return std::nullopt;
}

void Attacker::associate(TimeIndex k) {
  const double gate = scenario_.attack.association_gate;
  const double dt = scenario_.dt;
  auto near = [&](const std::optional<Estimate>& est, const KinematicState& x) {
    if (!est) return false;
    const KinematicState predicted = propagate_cv(est->state, (k - est->time) * dt);
    return (predicted.p - x.p).norm() <= gate;
  };
  for (const auto& label : view_.reported_at(k)) {
    if (victim_labels_.count(label) || impostor_labels_.count(label)) continue;
    const KinematicState& x = view_.find(label)->track.at(k);
    if (!victim_labels_.empty() && near(victim_estimate_, x)) {
      victim_labels_.insert(label);
    } else if (!impostor_labels_.empty() && near(impostor_estimate_, x)) {
      impostor_labels_.insert(label);
    }
  }
  if (auto e = latest_report(k, victim_labels_)) victim_estimate_ = e;
  if (auto e = latest_report(k, impostor_labels_)) impostor_estimate_ = e;
}

void Attacker::select_victim(TimeIndex k) {
  std::optional<std::tuple<double, TimeIndex, GlobalLabel>> best;
  for (const auto& label : view_.reported_at(k)) {
    const auto* r = view_.find(label);
    if (!r->honest) continue;
    double score = 0.0;
    if (scenario_.attack.victim_selector == VictimSelector::nearest) {
      score = (r->track.at(k).p - scenario_.attack.victim_point).norm();
    }
    const auto key = std::tuple(score, r->first_report, label);
    if (!best || key < *best) best = key;
  }
  if (!best) return;
  selected_victim_ = std::get<2>(*best);
  victim_labels_.insert(*selected_victim_);
  victim_estimate_ = Estimate{view_.find(*selected_victim_)->track.at(k), k};
}

void Attacker::select_impostor(TimeIndex k) {
  std::optional<std::tuple<TimeIndex, GlobalLabel>> best;
  for (const auto& [label, r] : view_.records()) {
    if (!r.honest || r.last_report != k || r.reports < scenario_.attack.impostor_min_reports) continue;
    if (victim_labels_.count(label)) continue;
    const auto key = std::tuple(r.first_report, label);
    if (!best || key < *best) best = key;
  }
  if (!best) return;
  selected_impostor_ = std::get<1>(*best);
  impostor_labels_.insert(*selected_impostor_);
  impostor_estimate_ = Estimate{view_.find(*selected_impostor_)->track.at(k), k};
}

bool Attacker::impostor_reported_honestly(TimeIndex k) const {
  return honest_report(k, impostor_labels_, selected_impostor_).has_value();
}

std::optional<KinematicState> Attacker::act(TimeIndex k) {
  associate(k);
  const int h = scenario_.attack.visibility_timeout;

  if (stage_ == AttackStage::pending && k >= scenario_.attack.start_step) {
    select_victim(k);
    if (selected_victim_) {
      stage_ = AttackStage::mimicry;
      times_.k0 = k;
      associate(k);
      if (variant_ == AttackVariant::stealthy) {
        planner_ = std::make_unique<SpoofPlanner>(victim_estimate_->state, scenario_.attack.mpc);
      }
    }
  }
  if (stage_ == AttackStage::mimicry && infer_visibility(view_, victim_labels_, k, h) != Visibility::visible) {
    stage_ = AttackStage::pull_off;
    times_.k1 = k;
  }
  if (times_.k1 && !times_.reentry && k > *times_.k1 && honest_report(k, victim_labels_, std::nullopt)) {
    times_.reentry = k;
  }
  if (stage_ == AttackStage::pull_off && k > *times_.k1) {
    if (!selected_impostor_) {
      select_impostor(k);
      if (selected_impostor_) associate(k);
    }
    if (selected_impostor_ && impostor_reported_honestly(k)) {
      stage_ = AttackStage::injection;
      times_.k2 = k;
    }
  }
  if (stage_ == AttackStage::injection && times_.k2 && k > *times_.k2 && !spoof_.empty()) {
    for (const auto& label : impostor_labels_) {
      const auto* r = view_.find(label);
      if (!r || !r->honest || r->last_report != k) continue;
      if (ospa2(r->track, spoof_, scenario_.consensus.ospa) < scenario_.consensus.ospa.c) {
        stage_ = AttackStage::done;
        times_.k3 = k;
        break;
      }
    }
  }

  std::optional<KinematicState> emission;
  if (stage_ != AttackStage::pending && stage_ != AttackStage::done) {
    emission = variant_ == AttackVariant::hard_switch ? emit_hard_switch(k) : emit_stealthy(k);
  }
  if (emission) {
    spoof_.states[k] = *emission;
    last_emission_ = k;
  }
  if (stage_ != AttackStage::pending) events_.push_back({k, stage_, emission});
  return emission;
}

std::optional<KinematicState> Attacker::emit_hard_switch(TimeIndex k) const {
  switch (stage_) {
    case AttackStage::mimicry: return honest_report(k, victim_labels_, selected_victim_);
    case AttackStage::injection: return honest_report(k, impostor_labels_, selected_impostor_);
    default: return std::nullopt;
  }
}

std::optional<KinematicState> Attacker::emit_stealthy(TimeIndex k) {
  const KinematicState out = planner_->current();
  auto at_k = [k](const std::optional<Estimate>& e) -> std::optional<KinematicState> {
    if (e && e->time == k) return e->state;
    return std::nullopt;
  };
  switch (stage_) {
    case AttackStage::mimicry:
      planner_->advance(k, at_k(victim_estimate_), std::nullopt, false);
      break;
    case AttackStage::pull_off:
      planner_->advance(k, KinematicState(rendezvous_, Vec2::Zero()), at_k(victim_estimate_), true);
      break;
    case AttackStage::injection:
      planner_->advance(k, at_k(impostor_estimate_), at_k(victim_estimate_), true);
      break;
    default: break;
  }
  return out;
}

std::vector<Track> Attacker::forge(NodeId node, TimeIndex k, std::span<const Track> nominal) const {
  std::vector<Track> out;
  if (!is_compromised(node)) {
    out.assign(nominal.begin(), nominal.end());
    return out;
  }
  const bool hide_victim = stage_ != AttackStage::pending;
  const bool hide_impostor = stage_ != AttackStage::done;
  for (const auto& t : nominal) {
    if (hide_victim && victim_labels_.count(t.label)) continue;
    if (hide_impostor && impostor_labels_.count(t.label)) continue;
    out.push_back(t);
  }
  if (node == spoofing_node_ && last_emission_ == k) out.push_back(spoof_);
  return out;
}

std::vector<PlannerTraceRow> Attacker::planner_trace() const {
  return planner_ ? planner_->trace() : std::vector<PlannerTraceRow>{};
}

}  // namespace tcsim
