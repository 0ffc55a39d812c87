#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tcsim/types.hpp"

namespace tcsim {

struct MpcParams {
  int horizon = 20;  // K
  double alpha_p = 1.0;
  double alpha_v = 0.1;
  double alpha_c = 0.1;
  double gamma_p = 0.99;
  double gamma_v = 0.99;
  double separation = 100.0;  // radius of the victim-separation penalty, metres
  double v_max = 30.0;
  double a_max = 30.0;
  double dt = 1.0;
  double gradient_tolerance = 1e-5;
  int max_iterations = 500;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Double-integrator discretisation: x+ = A x + B u with x = [p; v], u = acceleration.
struct Dynamics {
  Eigen::Matrix4d A;
  Eigen::Matrix<double, 4, 2> B;

  Vec4 step(const Vec4& x, const Vec2& u) const { return A * x + B * u; }
};

Dynamics build_dynamics(double dt);

/// Finite-horizon spoofing problem in condensed form: the decision vector stacks the K controls
/// [u_0; u_1; ...; u_{K-1}] and states are eliminated by rolling out the dynamics.
class MpcProblem {
 public:
  /// `reference` holds the K reference states for steps 1..K; `victim` (optional) the K predicted
  /// victim positions used by the separation penalty.
  MpcProblem(const KinematicState& initial, std::span<const KinematicState> reference,
             std::optional<std::span<const Vec2>> victim, const MpcParams& params);

  int horizon() const { return horizon_; }
  const MpcParams& params() const { return params_; }
  const Dynamics& dynamics() const { return dynamics_; }
  const Vec4& initial() const { return x0_; }

  /// States x_0..x_K as columns.
  Eigen::Matrix<double, 4, Eigen::Dynamic> rollout(const Eigen::VectorXd& controls) const;

  double objective(const Eigen::VectorXd& controls) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& controls) const;

  /// Gauss-Newton approximation of the objective Hessian (exact for the quadratic terms).
  Eigen::MatrixXd gauss_newton_hessian(const Eigen::VectorXd& controls) const;

  /// Largest violation of ||u|| <= a_max and ||v|| <= v_max, in physical units; 0 when feasible.
  double max_violation(const Eigen::VectorXd& controls) const;

  /// Projects each control onto the acceleration ball, then shrinks controls so every velocity of the
  /// rollout stays inside the speed ball. The result satisfies both bounds.
  Eigen::VectorXd make_feasible(const Eigen::VectorXd& controls) const;

 private:
  double discount_p(int k) const;
  double discount_v(int k) const;

  MpcParams params_;
  Dynamics dynamics_;
  int horizon_;
  Vec4 x0_;
  std::vector<KinematicState> reference_;
  std::vector<Vec2> victim_;
  bool has_victim_ = false;
};

struct MpcSolution {
  Eigen::Matrix<double, 2, Eigen::Dynamic> U;  // 2 x K
  Eigen::Matrix<double, 4, Eigen::Dynamic> X;  // 4 x (K+1)
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  /// Merit value after each accepted iterate, tagged with the outer (multiplier) round it belongs to.
  std::vector<std::pair<int, double>> merit_trace;
};

/// Solves the finite-horizon problem with an augmented-Lagrangian method (Newton inner steps with
/// Armijo backtracking) and maps the result onto the feasible set. `warm_start` (2 x K) seeds the
/// controls. Throws std::invalid_argument when ||v_init|| > v_max or on malformed inputs.
MpcSolution solve_mpc(const KinematicState& initial, std::span<const KinematicState> reference,
                      std::optional<std::span<const Vec2>> victim, const MpcParams& params,
                      const Eigen::Matrix<double, 2, Eigen::Dynamic>* warm_start = nullptr);

/// K-step constant-velocity prediction x(k + i*dt), i = 1..K.
std::vector<KinematicState> predict_cv(const KinematicState& x, int steps, double dt);

struct PlannerTraceRow {
  TimeIndex step = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double min_victim_distance = 0.0;  // over the predicted horizon; infinity without a victim
  Vec2 applied_control = Vec2::Zero();
  bool reference_gap = false;
  bool victim_gap = false;
};

/// Receding-horizon spoof generator: each call to `advance` re-plans from the current state, applies
/// only the first control and warm-starts the next solve from the shifted plan.
class SpoofPlanner {
 public:
  /// The initial velocity is clamped to v_max.
  SpoofPlanner(const KinematicState& initial, const MpcParams& params);

  const KinematicState& current() const { return state_; }
  const MpcParams& params() const { return params_; }

  /// Missing `reference` or `victim` values reuse the previous one, propagated at constant velocity,
  /// and are flagged in the trace. Pass `use_victim = false` to drop the separation term.
  void advance(TimeIndex step, const std::optional<KinematicState>& reference,
               const std::optional<KinematicState>& victim, bool use_victim);

  const std::vector<PlannerTraceRow>& trace() const { return trace_; }

 private:
  MpcParams params_;
  Dynamics dynamics_;
  KinematicState state_;
  std::optional<KinematicState> last_reference_;
  std::optional<KinematicState> last_victim_;
  Eigen::Matrix<double, 2, Eigen::Dynamic> plan_;
  std::vector<PlannerTraceRow> trace_;
};

/// What the network provides to the planner at step n: current reference (impostor) and victim
/// states, either of which may be absent.
struct NetworkSample {
  std::optional<KinematicState> reference;
  std::optional<KinematicState> victim;
};
using NetworkAccessor = std::function<NetworkSample(TimeIndex)>;

/// Runs the receding-horizon loop for `steps` steps from x0 and returns [x_0, ..., x_steps].
std::vector<KinematicState> spoof_track(const KinematicState& x0, int steps, const NetworkAccessor& network,
                                        const MpcParams& params, std::vector<PlannerTraceRow>* trace = nullptr);

}  // namespace tcsim
