#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tcsim/scenario.hpp"
#include "tcsim/sensing.hpp"

namespace tcsim {

/// Constant-velocity model with discrete white-noise-acceleration process noise.
struct MotionModel {
  Eigen::Matrix4d A;
  Eigen::Matrix4d Q;
  double dt = 1.0;

  static MotionModel constant_velocity(double dt, double sigma_v);
};

enum class TrackStatus { tentative, confirmed, dead };

struct LocalTrackState {
  LocalLabel label = 0;
  Vec4 mean = Vec4::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
  TrackStatus status = TrackStatus::tentative;
  int hits = 0;               // total associated measurements
  int misses = 0;             // consecutive misses
  std::uint32_t history = 0;  // bit i set: hit i steps ago (bit 0 = latest step)
  TimeIndex birth_time = 0;
  bool updated = false;       // associated at the latest step
};

struct LocalEstimate {
  LocalLabel label = 0;
  KinematicState state;
};

/// Global-nearest-neighbour Kalman tracker with M-of-N confirmation. One instance per node and run.
class LocalTracker {
 public:
  LocalTracker(const TrackerParams& params, double sigma_r, double dt);

  /// Processes one step of measurements and returns the confirmed tracks that were updated at this
  /// step, sorted by label.
  std::vector<LocalEstimate> step(TimeIndex k, std::span<const Measurement> measurements);

  /// Live (non-dead) tracks after the latest step.
  const std::vector<LocalTrackState>& tracks() const { return tracks_; }
  /// Number of times a covariance had to be repaired (symmetrised and eigenvalue-clamped).
  std::size_t covariance_repairs() const { return repairs_; }
  const MotionModel& model() const { return model_; }

 private:
  void repair(Eigen::Matrix4d& cov);

  TrackerParams params_;
  MotionModel model_;
  Eigen::Matrix2d R_;
  std::vector<LocalTrackState> tracks_;
  LocalLabel next_label_ = 1;
  std::size_t repairs_ = 0;
};

}  // namespace tcsim
