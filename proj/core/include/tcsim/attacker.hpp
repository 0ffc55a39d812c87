#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcsim/mpc.hpp"
#include "tcsim/scenario.hpp"

namespace tcsim {

enum class AttackVariant { hard_switch, stealthy };
enum class AttackStage { pending, mimicry, pull_off, injection, done };

std::string to_string(AttackVariant variant);
std::string to_string(AttackStage stage);

/// Recorded stage transition steps: k0 (mimicry starts), k1 (pull-off), k2 (injection), k3 (done),
/// and the step at which an honest node reported the victim again after k1.
struct StageTimes {
  std::optional<TimeIndex> k0, k1, k2, k3, reentry;
};

/// Local label carried by the spoofed track on the spoofing node.
inline constexpr LocalLabel kSpoofLocalLabel = 1'000'000;

/// What the adversary has intercepted so far, per label. A label always originates from a single
/// node, so the record also fixes whether its source is honest.
class InterceptedView {
 public:
  struct Record {
    bool honest = false;
    TimeIndex first_report = 0;
    TimeIndex last_report = 0;
    int reports = 0;
    Track track;  // latest reported history
  };

  void ingest(TimeIndex k, bool honest, std::span<const Track> tracks);

  const std::map<GlobalLabel, Record>& records() const { return records_; }
  const Record* find(const GlobalLabel& label) const;
  /// Labels reported at step k, in label order.
  std::vector<GlobalLabel> reported_at(TimeIndex k) const;

 private:
  std::map<GlobalLabel, Record> records_;
};

enum class Visibility { visible, blind, never_seen };

/// Blind once no honest source has reported any of `labels` for at least h steps; labels never
/// reported by an honest source give never_seen, which callers treat as blind.
Visibility infer_visibility(const InterceptedView& view, const std::set<GlobalLabel>& labels, TimeIndex now, int h);

struct AttackEvent {
  TimeIndex time = 0;
  AttackStage stage = AttackStage::pending;
  std::optional<KinematicState> spoof;  // empty means silence
};

/// The adversary of one run. Per step: `observe` every intercepted message, then `act` once, then
/// `forge` the outgoing message of each compromised node. Messages of step k are visible before the
/// forged message of step k is sent.
class Attacker {
 public:
  Attacker(AttackVariant variant, const Scenario& scenario);

  bool intercepts(NodeId source) const { return intercepted_.count(source) != 0; }
  bool is_compromised(NodeId node) const { return scenario_.attack.compromised_nodes.count(node) != 0; }
  NodeId spoofing_node() const { return spoofing_node_; }
  GlobalLabel spoof_label() const { return {spoofing_node_, kSpoofLocalLabel}; }

  void observe(TimeIndex k, NodeId source, std::span<const Track> tracks);

  /// Evaluates stage transitions for step k, then returns the spoofed state emitted at k (empty for
  /// silence).
  std::optional<KinematicState> act(TimeIndex k);

  /// Outgoing message of a compromised node at step k: nominal tracks minus those associated with
  /// the victim (from k0 on) or the impostor (until done), plus the spoofed track when one is emitted.
  std::vector<Track> forge(NodeId node, TimeIndex k, std::span<const Track> nominal) const;

  AttackVariant variant() const { return variant_; }
  AttackStage stage() const { return stage_; }
  const StageTimes& times() const { return times_; }
  const std::vector<AttackEvent>& events() const { return events_; }
  const std::set<GlobalLabel>& victim_labels() const { return victim_labels_; }
  const std::set<GlobalLabel>& impostor_labels() const { return impostor_labels_; }
  std::optional<GlobalLabel> selected_victim() const { return selected_victim_; }
  std::optional<GlobalLabel> selected_impostor() const { return selected_impostor_; }
  const Track& spoof_track() const { return spoof_; }
  const InterceptedView& view() const { return view_; }
  std::vector<PlannerTraceRow> planner_trace() const;
  Vec2 rendezvous() const { return rendezvous_; }

  /// True when the run ended before the impostor took over the spoofed label.
  bool failed() const { return stage_ != AttackStage::done; }

 private:
  struct Estimate {
    KinematicState state;
    TimeIndex time = 0;
  };

  void associate(TimeIndex k);
  std::optional<KinematicState> honest_report(TimeIndex k, const std::set<GlobalLabel>& labels,
                                              std::optional<GlobalLabel> preferred) const;
  std::optional<Estimate> latest_report(TimeIndex k, const std::set<GlobalLabel>& labels) const;
  void select_victim(TimeIndex k);
  void select_impostor(TimeIndex k);
  bool impostor_reported_honestly(TimeIndex k) const;
  std::optional<KinematicState> emit_hard_switch(TimeIndex k) const;
  std::optional<KinematicState> emit_stealthy(TimeIndex k);

  AttackVariant variant_;
  const Scenario& scenario_;
  std::set<NodeId> intercepted_;
  NodeId spoofing_node_ = 0;
  Vec2 rendezvous_;

  InterceptedView view_;
  AttackStage stage_ = AttackStage::pending;
  StageTimes times_;
  std::set<GlobalLabel> victim_labels_;
  std::set<GlobalLabel> impostor_labels_;
  std::optional<GlobalLabel> selected_victim_;
  std::optional<GlobalLabel> selected_impostor_;
  std::optional<Estimate> victim_estimate_;
  std::optional<Estimate> impostor_estimate_;

  Track spoof_;
  std::unique_ptr<SpoofPlanner> planner_;
  std::vector<AttackEvent> events_;
  TimeIndex last_emission_ = -1;
};

}  // namespace tcsim
