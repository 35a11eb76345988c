#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "ccvo/chance.hpp"
#include "ccvo/dynamics.hpp"
#include "ccvo/errors.hpp"
#include "ccvo/geometry.hpp"
#include "ccvo/types.hpp"

namespace ccvo {

enum class PlanningMethod {
  Chance,         // probabilistic margins from the velocity covariance
  Deterministic,  // same constraints with zero margin
};

struct PlannerConfig {
  int horizon = 25;
  double dt = 0.05;
  Mat4 state_weight = Vec4(10.0, 10.0, 1.0, 1.0).asDiagonal();
  Mat2 input_weight = Mat2::Identity();
  Vec4 state_lower = Vec4(-kInfinity, -kInfinity, -10.0, -10.0);
  Vec4 state_upper = Vec4(kInfinity, kInfinity, 10.0, 10.0);
  Vec2 input_lower = Vec2(-kInfinity, -kInfinity);
  Vec2 input_upper = Vec2(kInfinity, kInfinity);
  double mass = 1.0;
  double delta_edge = 0.01;  // per-pair collision budget, split across the two normals
  std::optional<std::pair<double, double>> delta_split;  // overrides the symmetric split
  PlanningMethod method = PlanningMethod::Chance;

  int max_sqp_iterations = 30;
  double sqp_step_tolerance = 1e-9;
  double slack_penalty_factor = 1e4;  // times max(diag(state_weight))

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  void validate() const;  // throws ConfigError
  std::pair<double, double> normal_deltas() const;
  double slack_penalty() const;
};

/// Predicted motion of one neighbor over the horizon. The combined radius
/// already folds the host footprint into the neighbor's.
struct NeighborForecast {
  AgentState current;                // estimated state at the planning instant
  std::vector<AgentState> states;    // predicted states at steps 1..N
  double combined_radius = 0.2;
};

/// The pair of deterministic constraints generated for one neighbor at one
/// horizon step, plus which side the solver imposes.
struct PairStepConstraints {
  int neighbor = 0;  // position in the forecast list
  int step = 0;      // constrains the velocity at step+1
  LinearChanceConstraint side_1;
  LinearChanceConstraint side_2;
  int selected = 0;  // 0 -> side_1, 1 -> side_2
};

struct ConstraintBlock {
  std::vector<PairStepConstraints> entries;
  int skipped_overlaps = 0;  // pair-steps with undefined geometry
};

enum class SolverStatus { Optimal, MaxIter, SlackActive, Emergency };

struct HorizonPlan {
  std::vector<Vec4> states;  // x^1..x^N from the exact rollout
  std::vector<Vec2> inputs;  // u^0..u^{N-1}
  double cost = 0.0;
  double slack_total = 0.0;
  SolverStatus status = SolverStatus::Optimal;
  int sqp_iterations = 0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  ConstraintBlock constraints;  // evaluated at the returned trajectory
};

/// Condensed transcription of the horizon problem. The shooting variables
/// are states x^1..x^N and inputs u^0..u^{N-1}; the linear dynamics let the
/// solver eliminate the states exactly, so the quadratic pieces below live
/// in input space while the counts describe the full shooting form.
class PlanningProblem {
 public:
  PlanningProblem(const AgentState& host, std::vector<NeighborForecast> neighbors,
                  std::vector<Vec4> reference, const PlannerConfig& cfg,
                  const Mat2& velocity_covariance);

  const AgentState& host() const { return host_; }
  const std::vector<NeighborForecast>& neighbors() const { return neighbors_; }
  const std::vector<Vec4>& reference() const { return reference_; }
  const PlannerConfig& config() const { return cfg_; }
  const Mat2& velocity_covariance() const { return velocity_covariance_; }

  int horizon() const { return cfg_.horizon; }
  int num_decision_variables() const { return 6 * cfg_.horizon; }
  int num_dynamics_constraints() const { return 4 * cfg_.horizon; }
  int num_cone_constraints() const {
    return 2 * static_cast<int>(neighbors_.size()) * cfg_.horizon;
  }

  /// Tracking cost of a stacked input sequence (exact, quadratic).
  double cost_value(const Eigen::VectorXd& inputs) const;
  /// Analytic gradient of cost_value.
  Eigen::VectorXd cost_gradient(const Eigen::VectorXd& inputs) const;
  /// States at steps 1..N under the nominal dynamics.
  std::vector<Vec4> rollout(const Eigen::VectorXd& inputs) const;

  // Solver-facing pieces.
  const Eigen::MatrixXd& input_to_state() const { return input_to_state_; }
  const Eigen::VectorXd& free_response() const { return free_response_; }
  const Eigen::MatrixXd& hessian() const { return hessian_; }
  const Eigen::VectorXd& gradient_at_zero() const { return gradient0_; }
  const Eigen::MatrixXd& box_rows() const { return box_rows_; }
  const Eigen::VectorXd& box_rhs() const { return box_rhs_; }

 private:
  double cost_constant() const;

  AgentState host_;
  std::vector<NeighborForecast> neighbors_;
  std::vector<Vec4> reference_;
  PlannerConfig cfg_;
  Mat2 velocity_covariance_;

  Eigen::MatrixXd input_to_state_;  // 4N x 2N
  Eigen::VectorXd free_response_;   // 4N
  Eigen::MatrixXd hessian_;         // 2N x 2N, positive definite
  Eigen::VectorXd gradient0_;       // 2N
  Eigen::MatrixXd box_rows_;
  Eigen::VectorXd box_rhs_;
};

/// Assembles the horizon problem. Throws ConfigError on dimension
/// mismatches (short reference or forecasts, invalid config).
PlanningProblem build_problem(const AgentState& host,
                              const std::vector<NeighborForecast>& neighbors,
                              const std::vector<Vec4>& reference, const PlannerConfig& cfg,
                              const Mat2& velocity_covariance);

/// Sequential convexification: freeze the cone normals at the current
/// predicted positions, solve the convex QP (hard first, slack-penalized on
/// infeasibility), line-search on the exact-penalty merit, repeat until the
/// proposed step is below tolerance. Overlapping current positions short-
/// circuit to a braking plan with Emergency status.
HorizonPlan solve_sqp(const PlanningProblem& problem,
                      const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// True states of every agent at the beginning of a simulation step.
struct WorldSnapshot {
  std::vector<AgentState> states;
  std::vector<double> radii;
  int step = 0;
};

/// Straight-line reference from start to goal at a nominal speed, holding
/// position (zero velocity) after arrival.
struct ReferenceTrajectory {
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  double speed = 1.0;
  double dt = 0.05;

  Vec4 state_at(int step) const;
  std::vector<Vec4> horizon_states(int current_step, int n_steps) const;
};

/// Per-agent planning context: neighbor filters, the shifted warm start,
/// and the reference clock. One instance per agent; never shared.
class AgentPlanner {
 public:
  AgentPlanner(int index, const PlannerConfig& cfg, const ReferenceTrajectory& reference,
               const NoiseModel& noise);

  /// Feeds this step's noisy neighbor observations through the filters.
  void update_filters(const std::vector<std::pair<int, AgentState>>& observations);

  /// Plans from the snapshot and returns the first input of the horizon.
  ControlInput plan_step(const WorldSnapshot& snapshot);

  const HorizonPlan& last_plan() const { return last_plan_; }
  const std::map<int, NeighborEstimate>& filters() const { return filters_; }
  int index() const { return index_; }

 private:
  int index_;
  PlannerConfig cfg_;
  ReferenceTrajectory reference_;
  NoiseModel noise_;
  std::map<int, NeighborEstimate> filters_;
  std::optional<Eigen::VectorXd> warm_start_;
  HorizonPlan last_plan_;
};

}  // namespace ccvo
