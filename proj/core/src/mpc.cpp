#include "tcsim/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace tcsim {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("mpc." + field + " " + what);
}

Vec2 control_at(const Eigen::VectorXd& U, int j) { return U.segment<2>(2 * j); }

}  // namespace

void MpcParams::validate() const {
  require(horizon >= 1, "horizon", "must be >= 1");
  require(alpha_p >= 0.0, "alpha_p", "must be >= 0");
  require(alpha_v >= 0.0, "alpha_v", "must be >= 0");
  require(alpha_c >= 0.0, "alpha_c", "must be >= 0");
  require(gamma_p > 0.0 && gamma_p <= 1.0, "gamma_p", "must be in (0, 1]");
  require(gamma_v > 0.0 && gamma_v <= 1.0, "gamma_v", "must be in (0, 1]");
  require(separation >= 0.0, "separation", "must be >= 0");
  require(v_max > 0.0, "v_max", "must be > 0");
  require(a_max > 0.0, "a_max", "must be > 0");
  require(dt > 0.0, "dt", "must be > 0");
  require(gradient_tolerance > 0.0, "gradient_tolerance", "must be > 0");
  require(max_iterations >= 1, "max_iterations", "must be >= 1");
}

Dynamics build_dynamics(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_dynamics: dt must be > 0");
  Dynamics d;
  d.A.setIdentity();
  d.A(0, 2) = dt;
  d.A(1, 3) = dt;
  d.B.setZero();
  d.B(0, 0) = 0.5 * dt * dt;
  d.B(1, 1) = 0.5 * dt * dt;
  d.B(2, 0) = dt;
  d.B(3, 1) = dt;
  return d;
}

std::vector<KinematicState> predict_cv(const KinematicState& x, int steps, double dt) {
  std::vector<KinematicState> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int i = 1; i <= steps; ++i) out.push_back(propagate_cv(x, i * dt));
  return out;
}

// ---------------------------------------------------------------------------------------------
// MpcProblem

MpcProblem::MpcProblem(const KinematicState& initial, std::span<const KinematicState> reference,
                       std::optional<std::span<const Vec2>> victim, const MpcParams& params)
    : params_(params), dynamics_(build_dynamics(params.dt)), horizon_(params.horizon), x0_(initial.to_vector()) {
  params_.validate();
  if (!initial.finite()) throw std::invalid_argument("solve_mpc: initial state must be finite");
  if (static_cast<int>(reference.size()) != horizon_) {
    throw std::invalid_argument("solve_mpc: reference must have exactly K states");
  }
  reference_.assign(reference.begin(), reference.end());
  if (victim) {
    if (static_cast<int>(victim->size()) != horizon_) {
      throw std::invalid_argument("solve_mpc: victim prediction must have exactly K positions");
    }
    victim_.assign(victim->begin(), victim->end());
    has_victim_ = params_.alpha_c > 0.0 && params_.separation > 0.0;
  }
}

double MpcProblem::discount_p(int k) const { return std::pow(params_.gamma_p, k); }
double MpcProblem::discount_v(int k) const { return std::pow(params_.gamma_v, k); }

Eigen::Matrix<double, 4, Eigen::Dynamic> MpcProblem::rollout(const Eigen::VectorXd& controls) const {
  Eigen::Matrix<double, 4, Eigen::Dynamic> X(4, horizon_ + 1);
  X.col(0) = x0_;
  for (int j = 0; j < horizon_; ++j) X.col(j + 1) = dynamics_.step(X.col(j), control_at(controls, j));
  return X;
}

double MpcProblem::objective(const Eigen::VectorXd& controls) const {
  const auto X = rollout(controls);
  double J = 0.0;
  for (int k = 1; k <= horizon_; ++k) {
    const Vec2 p = X.col(k).head<2>();
    const Vec2 v = X.col(k).tail<2>();
    const KinematicState& r = reference_[k - 1];
    J += params_.alpha_p * discount_p(k) * (p - r.p).squaredNorm();
    J += params_.alpha_v * discount_v(k) * (v - r.v).squaredNorm();
    if (has_victim_) {
      const double s = std::max(params_.separation - (p - victim_[k - 1]).norm(), 0.0);
      J += params_.alpha_c * s * s;
    }
  }
  return J;
}

Eigen::VectorXd MpcProblem::gradient(const Eigen::VectorXd& controls) const {
  const auto X = rollout(controls);
  const double dt = params_.dt;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * horizon_);
  for (int k = 1; k <= horizon_; ++k) {
    const Vec2 p = X.col(k).head<2>();
    const Vec2 v = X.col(k).tail<2>();
    const KinematicState& r = reference_[k - 1];
    Vec2 dJ_dp = 2.0 * params_.alpha_p * discount_p(k) * (p - r.p);
    const Vec2 dJ_dv = 2.0 * params_.alpha_v * discount_v(k) * (v - r.v);
    if (has_victim_) {
      const Vec2 d = p - victim_[k - 1];
      const double dist = d.norm();
      const double s = params_.separation - dist;
      if (s > 0.0 && dist > 0.0) dJ_dp -= 2.0 * params_.alpha_c * s * d / dist;
    }
    // p_k depends on u_j (j < k) through dt^2 (k - j - 1/2), v_k through dt.
    for (int j = 0; j < k; ++j) {
      g.segment<2>(2 * j) += dt * dt * (k - j - 0.5) * dJ_dp + dt * dJ_dv;
    }
  }
  return g;
}

Eigen::MatrixXd MpcProblem::gauss_newton_hessian(const Eigen::VectorXd& controls) const {
  const auto X = rollout(controls);
  const double dt = params_.dt;
  const int n = 2 * horizon_;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k <= horizon_; ++k) {
    Eigen::Matrix2d Wp = 2.0 * params_.alpha_p * discount_p(k) * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d Wv = 2.0 * params_.alpha_v * discount_v(k) * Eigen::Matrix2d::Identity();
    if (has_victim_) {
      const Vec2 d = X.col(k).head<2>() - victim_[k - 1];
      const double dist = d.norm();
      if (dist < params_.separation && dist > 0.0) {
        const Vec2 unit = d / dist;
        Wp += 2.0 * params_.alpha_c * unit * unit.transpose();
      }
    }
    for (int i = 0; i < k; ++i) {
      const double ci = dt * dt * (k - i - 0.5);
      for (int j = 0; j < k; ++j) {
        const double cj = dt * dt * (k - j - 0.5);
        H.block<2, 2>(2 * i, 2 * j) += ci * cj * Wp + dt * dt * Wv;
      }
    }
  }
  return H;
}

double MpcProblem::max_violation(const Eigen::VectorXd& controls) const {
  const auto X = rollout(controls);
  double worst = 0.0;
  for (int j = 0; j < horizon_; ++j) {
    worst = std::max(worst, control_at(controls, j).norm() - params_.a_max);
    worst = std::max(worst, X.col(j + 1).tail<2>().norm() - params_.v_max);
  }
  return worst;
}

Eigen::VectorXd MpcProblem::make_feasible(const Eigen::VectorXd& controls) const {
  Eigen::VectorXd U = controls;
  const double dt = params_.dt;
  Vec4 x = x0_;
  for (int j = 0; j < horizon_; ++j) {
    Vec2 u = control_at(U, j);
    const double un = u.norm();
    if (un > params_.a_max) u *= params_.a_max / un;
    // Projecting the next velocity onto the speed ball moves it towards the current (feasible)
    // velocity, so the adjusted control never grows.
    const Vec2 v_next = x.tail<2>() + dt * u;
    const double vn = v_next.norm();
    if (vn > params_.v_max) u = (v_next * (params_.v_max / vn) - x.tail<2>()) / dt;
    U.segment<2>(2 * j) = u;
    x = dynamics_.step(x, u);
  }
  return U;
}

// ---------------------------------------------------------------------------------------------
// Augmented-Lagrangian solver

namespace {

// Normalised inequality constraints g_i(U) <= 0: ||u_j||^2 / a^2 - 1 and ||v_k||^2 / v^2 - 1.
struct Constraints {
  const MpcProblem& problem;

  int count() const { return 2 * problem.horizon(); }

  Eigen::VectorXd values(const Eigen::VectorXd& U) const {
    const auto& p = problem.params();
    const int K = problem.horizon();
    const auto X = problem.rollout(U);
    Eigen::VectorXd g(2 * K);
    for (int j = 0; j < K; ++j) {
      g(j) = control_at(U, j).squaredNorm() / (p.a_max * p.a_max) - 1.0;
      g(K + j) = X.col(j + 1).tail<2>().squaredNorm() / (p.v_max * p.v_max) - 1.0;
    }
    return g;
  }

  // Adds sum_i w_i * grad g_i to `grad` and sum_i (rho * grad g_i grad g_i^T + w_i * hess g_i)
  // over active terms to `hess`, where w_i = max(0, mu_i + rho g_i).
  void accumulate(const Eigen::VectorXd& U, const Eigen::VectorXd& mu, double rho, Eigen::VectorXd& grad,
                  Eigen::MatrixXd* hess) const {
    const auto& p = problem.params();
    const int K = problem.horizon();
    const double dt = p.dt;
    const auto X = problem.rollout(U);
    const Eigen::VectorXd g = values(U);
    const double ia2 = 1.0 / (p.a_max * p.a_max);
    const double iv2 = 1.0 / (p.v_max * p.v_max);
    for (int j = 0; j < K; ++j) {
      const double w = std::max(0.0, mu(j) + rho * g(j));
      if (w <= 0.0) continue;
      const Vec2 dg = 2.0 * ia2 * control_at(U, j);
      grad.segment<2>(2 * j) += w * dg;
      if (hess) {
        hess->block<2, 2>(2 * j, 2 * j) += rho * dg * dg.transpose() + w * 2.0 * ia2 * Eigen::Matrix2d::Identity();
      }
    }
    for (int k = 1; k <= K; ++k) {
      const double w = std::max(0.0, mu(K + k - 1) + rho * g(K + k - 1));
      if (w <= 0.0) continue;
      const Vec2 v = X.col(k).tail<2>();
      const Vec2 dg_block = 2.0 * iv2 * dt * v;  // identical for every u_j with j < k
      for (int j = 0; j < k; ++j) grad.segment<2>(2 * j) += w * dg_block;
      if (hess) {
        const Eigen::Matrix2d outer = rho * dg_block * dg_block.transpose();
        const Eigen::Matrix2d curv = w * 2.0 * iv2 * dt * dt * Eigen::Matrix2d::Identity();
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) hess->block<2, 2>(2 * i, 2 * j) += outer + curv;
        }
      }
    }
  }
};

struct Merit {
  const MpcProblem& problem;
  const Constraints& constraints;
  const Eigen::VectorXd& mu;
  double rho;

  double value(const Eigen::VectorXd& U) const {
    const Eigen::VectorXd g = constraints.values(U);
    double psi = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double w = std::max(0.0, mu(i) + rho * g(i));
      psi += (w * w - mu(i) * mu(i)) / (2.0 * rho);
    }
    return problem.objective(U) + psi;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& U) const {
    Eigen::VectorXd grad = problem.gradient(U);
    constraints.accumulate(U, mu, rho, grad, nullptr);
    return grad;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& U) const {
    Eigen::MatrixXd H = problem.gauss_newton_hessian(U);
    Eigen::VectorXd unused = Eigen::VectorXd::Zero(U.size());
    constraints.accumulate(U, mu, rho, unused, &H);
    return H;
  }
};

}  // namespace

MpcSolution solve_mpc(const KinematicState& initial, std::span<const KinematicState> reference,
                      std::optional<std::span<const Vec2>> victim, const MpcParams& params,
                      const Eigen::Matrix<double, 2, Eigen::Dynamic>* warm_start) {
  params.validate();
  if (initial.v.norm() > params.v_max * (1.0 + 1e-12)) {
    throw std::invalid_argument("solve_mpc: initial speed exceeds v_max; project the initial velocity first");
  }
  const MpcProblem problem(initial, reference, victim, params);
  const int K = params.horizon;
  const int n = 2 * K;

  Eigen::VectorXd U = Eigen::VectorXd::Zero(n);
  if (warm_start) {
    if (warm_start->cols() != K) throw std::invalid_argument("solve_mpc: warm start must have K columns");
    U = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), n);
  }

  const Constraints constraints{problem};
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(constraints.count());
  double rho = 10.0;
  constexpr double kFeasibilityTolerance = 1e-9;  // on the normalised constraints
  constexpr double kArmijo = 1e-4;
  // Gradient tolerance scaled by the merit magnitude so that large-offset problems can still
  // terminate in double precision.
  auto stationary = [&](const Eigen::VectorXd& grad, double value) {
    return grad.norm() < params.gradient_tolerance * std::max(1.0, std::abs(value));
  };

  MpcSolution sol;
  int iterations = 0;
  bool converged = false;
  double previous_violation = std::numeric_limits<double>::infinity();

  for (int round = 0; iterations < params.max_iterations; ++round) {
    const Merit merit{problem, constraints, mu, rho};
    double value = merit.value(U);
    Eigen::VectorXd grad = merit.gradient(U);
    bool inner_done = stationary(grad, value);
    sol.merit_trace.emplace_back(round, value);

    while (!inner_done && iterations < params.max_iterations) {
      Eigen::MatrixXd H = merit.hessian(U);
      H.diagonal().array() += 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      Eigen::VectorXd dir = H.ldlt().solve(-grad);
      double slope = grad.dot(dir);
      if (!dir.allFinite() || slope >= 0.0) {
        dir = -grad;
        slope = -grad.squaredNorm();
      }
      double step = 1.0;
      bool accepted = false;
      const double previous_value = value;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd trial = U + step * dir;
        const double trial_value = merit.value(trial);
        if (trial_value <= value + kArmijo * step * slope) {
          U = trial;
          value = trial_value;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++iterations;
      if (!accepted) {
        // No representable decrease along a descent direction: stationary to working precision.
        inner_done = true;
        break;
      }
      sol.merit_trace.emplace_back(round, value);
      grad = merit.gradient(U);
      inner_done = stationary(grad, value) || previous_value - value <= 1e-15 * std::abs(value);
    }

    const Eigen::VectorXd g = constraints.values(U);
    const double violation = std::max(0.0, g.maxCoeff());
    if (inner_done && violation <= kFeasibilityTolerance) {
      converged = true;
      break;
    }
    if (iterations >= params.max_iterations) break;
    for (Eigen::Index i = 0; i < g.size(); ++i) mu(i) = std::max(0.0, mu(i) + rho * g(i));
    if (violation > 0.25 * previous_violation) rho = std::min(rho * 10.0, 1e12);
    previous_violation = violation;
    if (!inner_done && violation <= kFeasibilityTolerance) break;  // stalled on a feasible point
  }

  U = problem.make_feasible(U);
  sol.U = Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic>>(U.data(), 2, K);
  sol.X = problem.rollout(U);
  sol.objective = problem.objective(U);
  sol.iterations = iterations;
  sol.converged = converged;
  sol.max_violation = std::max(0.0, problem.max_violation(U));
  return sol;
}

// ---------------------------------------------------------------------------------------------
// Receding horizon

SpoofPlanner::SpoofPlanner(const KinematicState& initial, const MpcParams& params)
    : params_(params), dynamics_(build_dynamics(params.dt)), state_(initial) {
  params_.validate();
  const double speed = state_.v.norm();
  if (speed > params_.v_max) state_.v *= params_.v_max / speed;
  plan_ = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, params_.horizon);
}

void SpoofPlanner::advance(TimeIndex step, const std::optional<KinematicState>& reference,
                           const std::optional<KinematicState>& victim, bool use_victim) {
  PlannerTraceRow row;
  row.step = step;

  if (reference) {
    last_reference_ = reference;
  } else if (last_reference_) {
    last_reference_ = propagate_cv(*last_reference_, params_.dt);
    row.reference_gap = true;
  } else {
    last_reference_ = state_;
    row.reference_gap = true;
  }

  std::optional<std::vector<Vec2>> victim_positions;
  if (use_victim) {
    if (victim) {
      last_victim_ = victim;
    } else if (last_victim_) {
      last_victim_ = propagate_cv(*last_victim_, params_.dt);
      row.victim_gap = true;
    }
    if (last_victim_) {
      victim_positions.emplace();
      for (const auto& s : predict_cv(*last_victim_, params_.horizon, params_.dt)) victim_positions->push_back(s.p);
    }
  } else if (victim) {
    last_victim_ = victim;
  }

  const std::vector<KinematicState> ref = predict_cv(*last_reference_, params_.horizon, params_.dt);
  std::optional<std::span<const Vec2>> victim_span;
  if (victim_positions) victim_span = std::span<const Vec2>(*victim_positions);
  const MpcSolution sol = solve_mpc(state_, ref, victim_span, params_, &plan_);

  const Vec2 u = sol.U.col(0);
  state_ = KinematicState::from_vector(dynamics_.step(state_.to_vector(), u));

  row.objective = sol.objective;
  row.iterations = sol.iterations;
  row.converged = sol.converged;
  row.applied_control = u;
  row.min_victim_distance = std::numeric_limits<double>::infinity();
  if (victim_positions) {
    for (int k = 1; k <= params_.horizon; ++k) {
      row.min_victim_distance =
          std::min(row.min_victim_distance, (sol.X.col(k).head<2>() - (*victim_positions)[k - 1]).norm());
    }
  }
  trace_.push_back(row);

  // Shift the plan for the next warm start, repeating the last control.
  const int K = params_.horizon;
  if (K > 1) plan_.leftCols(K - 1) = sol.U.rightCols(K - 1).eval();
  plan_.col(K - 1) = sol.U.col(K - 1);
}

std::vector<KinematicState> spoof_track(const KinematicState& x0, int steps, const NetworkAccessor& network,
                                        const MpcParams& params, std::vector<PlannerTraceRow>* trace) {
  SpoofPlanner planner(x0, params);
  std::vector<KinematicState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(planner.current());
  for (int n = 0; n < steps; ++n) {
    const NetworkSample sample = network(n);
    planner.advance(n, sample.reference, sample.victim, true);
    out.push_back(planner.current());
  }
  if (trace) *trace = planner.trace();
  return out;
}

}  // namespace tcsim
