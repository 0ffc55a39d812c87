#include "tcsim/local_tracker.hpp"

#include <algorithm>
#include <bit>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "tcsim/assignment.hpp"

namespace tcsim {

MotionModel MotionModel::constant_velocity(double dt, double sigma_v) {
  MotionModel m;
  m.dt = dt;
  m.A.setIdentity();
  m.A(0, 2) = dt;
  m.A(1, 3) = dt;
  const double q = sigma_v * sigma_v;
  const double t2 = dt * dt;
  const double t3 = t2 * dt;
  const double t4 = t3 * dt;
  m.Q.setZero();
  for (int axis = 0; axis < 2; ++axis) {
    m.Q(axis, axis) = q * t4 / 4.0;
    m.Q(axis, axis + 2) = q * t3 / 2.0;
    m.Q(axis + 2, axis) = q * t3 / 2.0;
    m.Q(axis + 2, axis + 2) = q * t2;
  }
  return m;
}

namespace {

const Eigen::Matrix<double, 2, 4> kObserve = (Eigen::Matrix<double, 2, 4>() << 1, 0, 0, 0, 0, 1, 0, 0).finished();

}  // namespace

LocalTracker::LocalTracker(const TrackerParams& params, double sigma_r, double dt)
    : params_(params), model_(MotionModel::constant_velocity(dt, params.sigma_v)) {
  // A small floor keeps the innovation covariance invertible for noiseless sensing.
  const double var = std::max(sigma_r * sigma_r, 1e-6);
  R_ = var * Eigen::Matrix2d::Identity();
}

void LocalTracker::repair(Eigen::Matrix4d& cov) {
  cov = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov);
  if (eig.eigenvalues().minCoeff() >= params_.covariance_floor) return;
  const Vec4 clamped = eig.eigenvalues().cwiseMax(params_.covariance_floor);
  cov = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  ++repairs_;
}

std::vector<LocalEstimate> LocalTracker::step(TimeIndex k, std::span<const Measurement> measurements) {
  // Predict.
  for (auto& t : tracks_) {
    t.mean = model_.A * t.mean;
    t.cov = model_.A * t.cov * model_.A.transpose() + model_.Q;
    t.updated = false;
  }

  // Gated association cost (squared Mahalanobis distance).
  const auto n = static_cast<Eigen::Index>(tracks_.size());
  const auto m = static_cast<Eigen::Index>(measurements.size());
  std::vector<int> track_to_meas(tracks_.size(), -1);
  std::vector<char> meas_used(measurements.size(), 0);
  if (n > 0 && m > 0) {
    const double forbidden = 1e3 * params_.gate + 1.0;
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, m, forbidden);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& t = tracks_[static_cast<std::size_t>(i)];
      const Eigen::Matrix2d S = kObserve * t.cov * kObserve.transpose() + R_;
      const Eigen::LDLT<Eigen::Matrix2d> S_ldlt(S);
      for (Eigen::Index j = 0; j < m; ++j) {
        const Vec2 innov = measurements[static_cast<std::size_t>(j)].z - t.mean.head<2>();
        const double d2 = innov.dot(S_ldlt.solve(innov));
        if (d2 <= params_.gate) cost(i, j) = d2;
      }
    }
    const Assignment a = assign(cost);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = a.row_to_col[static_cast<std::size_t>(i)];
      if (j >= 0 && cost(i, j) <= params_.gate) {
        track_to_meas[static_cast<std::size_t>(i)] = j;
        meas_used[static_cast<std::size_t>(j)] = 1;
      }
    }
  }

  // Update (Joseph form) and track management.
  const std::uint32_t window_mask = (params_.confirm_window >= 32) ? ~0u : ((1u << params_.confirm_window) - 1u);
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    auto& t = tracks_[i];
    t.history <<= 1;
    const int j = track_to_meas[i];
    if (j >= 0) {
      const Eigen::Matrix2d S = kObserve * t.cov * kObserve.transpose() + R_;
      const Eigen::Matrix<double, 4, 2> K = t.cov * kObserve.transpose() * S.inverse();
      const Vec2 innov = measurements[static_cast<std::size_t>(j)].z - t.mean.head<2>();
      t.mean += K * innov;
      const Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * kObserve;
      t.cov = IKH * t.cov * IKH.transpose() + K * R_ * K.transpose();
      repair(t.cov);
      t.history |= 1u;
      ++t.hits;
      t.misses = 0;
      t.updated = true;
    } else {
      ++t.misses;
    }

    const int recent_hits = std::popcount(t.history & window_mask);
    const int age = k - t.birth_time + 1;
    if (t.status == TrackStatus::tentative) {
      if (recent_hits >= params_.confirm_hits) {
        t.status = TrackStatus::confirmed;
      } else if (age >= params_.confirm_window) {
        t.status = TrackStatus::dead;
      }
    } else if (t.status == TrackStatus::confirmed && t.misses >= params_.max_misses) {
      t.status = TrackStatus::dead;
    }
  }
  std::erase_if(tracks_, [](const LocalTrackState& t) { return t.status == TrackStatus::dead; });

  // Births from unassigned measurements.
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    if (meas_used[j]) continue;
    LocalTrackState t;
    t.label = next_label_++;
    t.mean << measurements[j].z, 0.0, 0.0;
    t.cov.setZero();
    t.cov.topLeftCorner<2, 2>() = R_;
    const double v2 = params_.init_velocity_sigma * params_.init_velocity_sigma;
    t.cov(2, 2) = v2;
    t.cov(3, 3) = v2;
    t.hits = 1;
    t.history = 1u;
    t.birth_time = k;
    t.updated = true;
    if (params_.confirm_hits <= 1) t.status = TrackStatus::confirmed;
    tracks_.push_back(t);
  }

  std::vector<LocalEstimate> out;
  for (const auto& t : tracks_) {
    if (t.status == TrackStatus::confirmed && t.updated) out.push_back({t.label, KinematicState::from_vector(t.mean)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  return out;
}

}  // namespace tcsim
