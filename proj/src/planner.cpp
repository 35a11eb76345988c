#include "ccvo/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccvo/qp.hpp"

namespace ccvo {

void PlannerConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(mass > 0.0)) throw ConfigError("mass must be positive");
  for (int i = 0; i < 4; ++i) {
    if (!(state_lower(i) <= state_upper(i))) throw ConfigError("state bounds are inverted");
  }
  for (int i = 0; i < 2; ++i) {
    if (!(input_lower(i) <= input_upper(i))) throw ConfigError("input bounds are inverted");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> qe(state_weight);
  if (qe.eigenvalues().minCoeff() < -1e-12) throw ConfigError("state weight must be PSD");
  Eigen::SelfAdjointEigenSolver<Mat2> re(input_weight);
  if (re.eigenvalues().minCoeff() <= 0.0) throw ConfigError("input weight must be PD");
  if (delta_split) {
    const auto [d1, d2] = *delta_split;
    if (!(d1 > 0.0 && d1 <= 0.5 && d2 > 0.0 && d2 <= 0.5)) {
      throw ConfigError("explicit delta split must lie in (0, 0.5] per side");
    }
  } else {
    if (!(delta_edge > 0.0 && delta_edge <= 0.25)) {
      throw ConfigError("delta_edge must lie in (0, 0.25]");
    }
  }
  if (max_sqp_iterations < 1) throw ConfigError("max_sqp_iterations must be at least 1");
  if (!(sqp_step_tolerance > 0.0)) throw ConfigError("sqp_step_tolerance must be positive");
  if (!(slack_penalty_factor > 0.0)) throw ConfigError("slack_penalty_factor must be positive");
}

std::pair<double, double> PlannerConfig::normal_deltas() const {
  if (delta_split) return *delta_split;
  return split_budget(delta_edge);
}

double PlannerConfig::slack_penalty() const {
  return slack_penalty_factor * state_weight.diagonal().maxCoeff();
}

// ---------------------------------------------------------------------------
// Problem assembly

PlanningProblem::PlanningProblem(const AgentState& host, std::vector<NeighborForecast> neighbors,
                                 std::vector<Vec4> reference, const PlannerConfig& cfg,
                                 const Mat2& velocity_covariance)
    : host_(host),
      neighbors_(std::move(neighbors)),
      reference_(std::move(reference)),
      cfg_(cfg),
      velocity_covariance_(velocity_covariance) {
  cfg_.validate();
  const int n = cfg_.horizon;
  if (static_cast<int>(reference_.size()) < n) {
    std::ostringstream msg;
    msg << "reference has " << reference_.size() << " entries, horizon needs " << n;
    throw ConfigError(msg.str());
  }
  reference_.resize(static_cast<std::size_t>(n));
  for (const auto& nb : neighbors_) {
    if (static_cast<int>(nb.states.size()) < n) {
      throw ConfigError("neighbor forecast shorter than the horizon");
    }
  }

  const double dt = cfg_.dt;
  Mat4 a = Mat4::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  b(2, 0) = dt / cfg_.mass;
  b(3, 1) = dt / cfg_.mass;

  // Powers of the transition applied to the input map: M_j = A^j B.
  std::vector<Eigen::Matrix<double, 4, 2>> m(static_cast<std::size_t>(n));
  m[0] = b;
  for (int j = 1; j < n; ++j) m[static_cast<std::size_t>(j)] = a * m[static_cast<std::size_t>(j - 1)];

  input_to_state_ = Eigen::MatrixXd::Zero(4 * n, 2 * n);
  for (int k = 1; k <= n; ++k) {
    for (int l = 0; l < k; ++l) {
      input_to_state_.block<4, 2>(4 * (k - 1), 2 * l) = m[static_cast<std::size_t>(k - 1 - l)];
    }
  }

  free_response_.resize(4 * n);
  Vec4 x = host_.as_vector();
  for (int k = 0; k < n; ++k) {
    x = a * x;
    free_response_.segment<4>(4 * k) = x;
  }

  Eigen::VectorXd ref_stack(4 * n);
  for (int k = 0; k < n; ++k) ref_stack.segment<4>(4 * k) = reference_[static_cast<std::size_t>(k)];

  // Cost 0.5 U'HU + g0'U (+ constant): H = 2 (S'QS + R), g0 = 2 S'Q (s0 - ref).
  Eigen::MatrixXd weighted = input_to_state_;  // Q * S, exploiting the block diagonal
  for (int k = 0; k < n; ++k) {
    weighted.middleRows<4>(4 * k) = cfg_.state_weight * weighted.middleRows<4>(4 * k);
  }
  hessian_ = 2.0 * input_to_state_.transpose() * weighted;
  for (int k = 0; k < n; ++k) {
    hessian_.block<2, 2>(2 * k, 2 * k) += 2.0 * cfg_.input_weight;
  }
  Eigen::VectorXd err = free_response_ - ref_stack;
  for (int k = 0; k < n; ++k) {
    err.segment<4>(4 * k) = cfg_.state_weight * err.segment<4>(4 * k);
  }
  gradient0_ = 2.0 * input_to_state_.transpose() * err;

  // Finite box bounds as inequality rows over the stacked inputs.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < 4; ++c) {
      const int idx = 4 * k + c;
      if (std::isfinite(cfg_.state_lower(c))) {
        rows.push_back(input_to_state_.row(idx));
        rhs.push_back(cfg_.state_lower(c) - free_response_(idx));
      }
      if (std::isfinite(cfg_.state_upper(c))) {
        rows.push_back(-input_to_state_.row(idx));
        rhs.push_back(free_response_(idx) - cfg_.state_upper(c));
      }
    }
    for (int c = 0; c < 2; ++c) {
      if (std::isfinite(cfg_.input_lower(c))) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * n);
        row(2 * k + c) = 1.0;
        rows.push_back(row);
        rhs.push_back(cfg_.input_lower(c));
      }
      if (std::isfinite(cfg_.input_upper(c))) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * n);
        row(2 * k + c) = -1.0;
        rows.push_back(row);
        rhs.push_back(-cfg_.input_upper(c));
      }
    }
  }
  box_rows_.resize(static_cast<Eigen::Index>(rows.size()), 2 * n);
  box_rhs_.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    box_rows_.row(static_cast<Eigen::Index>(i)) = rows[i];
    box_rhs_(static_cast<Eigen::Index>(i)) = rhs[i];
  }
}

double PlanningProblem::cost_value(const Eigen::VectorXd& inputs) const {
  return 0.5 * inputs.dot(hessian_ * inputs) + gradient0_.dot(inputs) + cost_constant();
}

Eigen::VectorXd PlanningProblem::cost_gradient(const Eigen::VectorXd& inputs) const {
  return hessian_ * inputs + gradient0_;
}

double PlanningProblem::cost_constant() const {
  const int n = cfg_.horizon;
  double c = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec4 e = free_response_.segment<4>(4 * k) - reference_[static_cast<std::size_t>(k)];
    c += e.dot(cfg_.state_weight * e);
  }
  return c;
}

std::vector<Vec4> PlanningProblem::rollout(const Eigen::VectorXd& inputs) const {
  const int n = cfg_.horizon;
  std::vector<Vec4> states(static_cast<std::size_t>(n));
  AgentState x = host_;
  for (int k = 0; k < n; ++k) {
    x = step_dynamics(x, ControlInput{inputs.segment<2>(2 * k)}, cfg_.dt, cfg_.mass);
    states[static_cast<std::size_t>(k)] = x.as_vector();
  }
  return states;
}

PlanningProblem build_problem(const AgentState& host,
                              const std::vector<NeighborForecast>& neighbors,
                              const std::vector<Vec4>& reference, const PlannerConfig& cfg,
                              const Mat2& velocity_covariance) {
  return PlanningProblem(host, neighbors, reference, cfg, velocity_covariance);
}

// ---------------------------------------------------------------------------
// SQP solve

namespace {

struct ConeRow {
  int neighbor;
  int step;
  Vec2 normal;       // selected side, frozen for the QP
  double rhs;        // normal . v_neighbor + margin
  LinearChanceConstraint side_1;
  LinearChanceConstraint side_2;
  int selected;
};

// Builds both side constraints for every reachable pair-step at the given
// trajectory, choosing `selected` by the larger residual when not pinned.
std::vector<ConeRow> build_cone_rows(const PlanningProblem& problem,
                                     const std::vector<Vec4>& states,
                                     const std::vector<std::vector<int>>* pinned_sides,
                                     int* skipped) {
  const auto& cfg = problem.config();
  const auto [delta_1, delta_2] = cfg.normal_deltas();
  const bool margins = cfg.method == PlanningMethod::Chance;
  // kappa = sqrt(2 N'WN) * erfinv(1-2*delta); the erfinv factor is constant
  // across rows, so hoist it.
  const double z1 = margins ? std::sqrt(2.0) * inverse_erf(1.0 - 2.0 * delta_1) : 0.0;
  const double z2 = margins ? std::sqrt(2.0) * inverse_erf(1.0 - 2.0 * delta_2) : 0.0;
  const Mat2& w = problem.velocity_covariance();

  std::vector<ConeRow> out;
  out.reserve(problem.neighbors().size() * static_cast<std::size_t>(cfg.horizon));
  if (skipped) *skipped = 0;

  for (std::size_t j = 0; j < problem.neighbors().size(); ++j) {
    const auto& nb = problem.neighbors()[j];
    for (int k = 0; k < cfg.horizon; ++k) {
      const Vec4& xk = states[static_cast<std::size_t>(k)];
      const Vec2 p_host(xk(0), xk(1));
      const Vec2 v_host(xk(2), xk(3));
      const AgentState& nb_state = nb.states[static_cast<std::size_t>(k)];

      CollisionCone cone;
      try {
        cone = build_collision_cone(Disk{p_host, 0.0},
                                    Disk{nb_state.position, nb.combined_radius});
      } catch (const OverlapError&) {
        if (skipped) ++*skipped;
        continue;
      }

      ConeRow row;
      row.neighbor = static_cast<int>(j);
      row.step = k;
      const double kappa_1 =
          z1 * std::sqrt(std::max(cone.normal_1.dot(w * cone.normal_1), 0.0));
      const double kappa_2 =
          z2 * std::sqrt(std::max(cone.normal_2.dot(w * cone.normal_2), 0.0));
      row.side_1 = LinearChanceConstraint{cone.normal_1, cone.normal_1.dot(nb_state.velocity),
                                          delta_1, kappa_1};
      row.side_2 = LinearChanceConstraint{cone.normal_2, cone.normal_2.dot(nb_state.velocity),
                                          delta_2, kappa_2};
      if (pinned_sides) {
        row.selected = (*pinned_sides)[j][static_cast<std::size_t>(k)];
      } else {
        // Scale-free comparison so the pick reflects geometry, not |N|.
        const double r1 = row.side_1.residual(v_host) / cone.normal_1.norm();
        const double r2 = row.side_2.residual(v_host) / cone.normal_2.norm();
        row.selected = r2 > r1 ? 1 : 0;
      }
      const auto& chosen = row.selected == 0 ? row.side_1 : row.side_2;
      row.normal = chosen.normal;
      row.rhs = chosen.rhs + chosen.margin;
      out.push_back(row);
    }
  }
  return out;
}

// Exact-penalty merit of a candidate input sequence: tracking cost plus the
// penalty-weighted violation of the selected-side constraints, with the
// geometry rebuilt at the candidate's own trajectory.
double merit_value(const PlanningProblem& problem, const Eigen::VectorXd& inputs,
                   const std::vector<std::vector<int>>& sides) {
  const auto states = problem.rollout(inputs);
  const auto rows = build_cone_rows(problem, states, &sides, nullptr);
  double violation = 0.0;
  for (const auto& row : rows) {
    const Vec4& xk = states[static_cast<std::size_t>(row.step)];
    const Vec2 v_host(xk(2), xk(3));
    const auto& chosen = row.selected == 0 ? row.side_1 : row.side_2;
    violation += std::max(0.0, -chosen.residual(v_host));
  }
  return problem.cost_value(inputs) + problem.config().slack_penalty() * violation;
}

HorizonPlan emergency_plan(const PlanningProblem& problem) {
  const auto& cfg = problem.config();
  HorizonPlan plan;
  plan.status = SolverStatus::Emergency;
  Eigen::VectorXd inputs = Eigen::VectorXd::Zero(2 * cfg.horizon);
  // Full stop in one step, clamped to the input bounds.
  Vec2 brake = -cfg.mass / cfg.dt * problem.host().velocity;
  brake = brake.cwiseMax(cfg.input_lower).cwiseMin(cfg.input_upper);
  inputs.head<2>() = brake;
  plan.inputs.resize(static_cast<std::size_t>(cfg.horizon));
  for (int k = 0; k < cfg.horizon; ++k) plan.inputs[static_cast<std::size_t>(k)] = inputs.segment<2>(2 * k);
  plan.states = problem.rollout(inputs);
  plan.cost = problem.cost_value(inputs);
  return plan;
}

}  // namespace

HorizonPlan solve_sqp(const PlanningProblem& problem,
                      const std::optional<Eigen::VectorXd>& warm_start) {
  const auto& cfg = problem.config();
  const int n_inputs = 2 * cfg.horizon;

  for (const auto& nb : problem.neighbors()) {
    if ((nb.current.position - problem.host().position).norm() <= nb.combined_radius) {
      return emergency_plan(problem);
    }
  }

  Eigen::VectorXd inputs = Eigen::VectorXd::Zero(n_inputs);
  if (warm_start && warm_start->size() == n_inputs) {
    inputs = *warm_start;
  }

  // Constraint sides are picked once per solve, at the warm-start geometry.
  std::vector<std::vector<int>> sides(problem.neighbors().size(),
                                      std::vector<int>(static_cast<std::size_t>(cfg.horizon), 0));
  {
    const auto states = problem.rollout(inputs);
    const auto rows = build_cone_rows(problem, states, nullptr, nullptr);
    for (const auto& row : rows) {
      sides[static_cast<std::size_t>(row.neighbor)][static_cast<std::size_t>(row.step)] =
          row.selected;
    }
  }

  bool converged = false;
  bool used_slack = false;
  int iterations = 0;
  double kkt_residual = 0.0;
  int skipped = 0;

  for (int iter = 0; iter < cfg.max_sqp_iterations; ++iter) {
    iterations = iter + 1;
    const auto states = problem.rollout(inputs);
    const auto cone_rows = build_cone_rows(problem, states, &sides, &skipped);

    const int n_cone = static_cast<int>(cone_rows.size());
    const int n_box = static_cast<int>(problem.box_rows().rows());

    QpProblem qp;
    qp.H = problem.hessian();
    qp.g = problem.gradient_at_zero();
    qp.A_eq.resize(0, n_inputs);
    qp.b_eq.resize(0);
    qp.A_in.resize(n_cone + n_box, n_inputs);
    qp.b_in.resize(n_cone + n_box);
    for (int i = 0; i < n_cone; ++i) {
      const auto& row = cone_rows[static_cast<std::size_t>(i)];
      const int vx = 4 * row.step + 2;
      qp.A_in.row(i) = row.normal.x() * problem.input_to_state().row(vx) +
                       row.normal.y() * problem.input_to_state().row(vx + 1);
      qp.b_in(i) = row.rhs - row.normal.x() * problem.free_response()(vx) -
                   row.normal.y() * problem.free_response()(vx + 1);
    }
    qp.A_in.bottomRows(n_box) = problem.box_rows();
    qp.b_in.tail(n_box) = problem.box_rhs();

    QpResult res = solve_qp(qp);
    bool slack_this_iter = false;
    if (res.status != QpStatus::Optimal) {
      // Soften the cone constraints with penalty-weighted slacks.
      slack_this_iter = true;
      const double w = cfg.slack_penalty();
      const double ridge = 1e-6 * w;
      QpProblem soft;
      const int n_total = n_inputs + n_cone;
      soft.H = Eigen::MatrixXd::Zero(n_total, n_total);
      soft.H.topLeftCorner(n_inputs, n_inputs) = qp.H;
      soft.H.bottomRightCorner(n_cone, n_cone) = ridge * Eigen::MatrixXd::Identity(n_cone, n_cone);
      soft.g.resize(n_total);
      soft.g.head(n_inputs) = qp.g;
      soft.g.tail(n_cone).setConstant(w);
      soft.A_eq.resize(0, n_total);
      soft.b_eq.resize(0);
      soft.A_in = Eigen::MatrixXd::Zero(n_cone + n_box + n_cone, n_total);
      soft.b_in.resize(n_cone + n_box + n_cone);
      soft.A_in.topLeftCorner(n_cone + n_box, n_inputs) = qp.A_in;
      soft.b_in.head(n_cone + n_box) = qp.b_in;
      for (int i = 0; i < n_cone; ++i) {
        soft.A_in(i, n_inputs + i) = 1.0;  // cone row gains its slack
        soft.A_in(n_cone + n_box + i, n_inputs + i) = 1.0;  // slack >= 0
        soft.b_in(n_cone + n_box + i) = 0.0;
      }
      res = solve_qp(soft);
      if (res.status != QpStatus::Optimal) {
        return emergency_plan(problem);  // hard box infeasibility, nothing to do
      }
    }
    used_slack = used_slack || slack_this_iter;
    kkt_residual = res.kkt_residual;

    const Eigen::VectorXd proposal = res.x.head(n_inputs);
    const double step_norm = (proposal - inputs).lpNorm<Eigen::Infinity>();

    // Backtracking on the exact-penalty merit.
    const double merit_here = merit_value(problem, inputs, sides);
    double best_merit = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = proposal;
    for (const double alpha : {1.0, 0.5, 0.25, 0.125}) {
      const Eigen::VectorXd candidate = inputs + alpha * (proposal - inputs);
      const double m = merit_value(problem, candidate, sides);
      if (m < best_merit) {
        best_merit = m;
        best = candidate;
      }
      if (m <= merit_here) {
        break;  // first improving step wins, longest first
      }
    }
    inputs = best;

    if (step_norm < cfg.sqp_step_tolerance) {
      converged = true;
      break;
    }
  }

  HorizonPlan plan;
  plan.sqp_iterations = iterations;
  plan.kkt_residual = kkt_residual;
  plan.states = problem.rollout(inputs);
  plan.inputs.resize(static_cast<std::size_t>(cfg.horizon));
  for (int k = 0; k < cfg.horizon; ++k) {
    plan.inputs[static_cast<std::size_t>(k)] = inputs.segment<2>(2 * k);
  }
  plan.cost = problem.cost_value(inputs);

  // Final constraint audit at the returned trajectory.
  int final_skipped = 0;
  const auto final_rows = build_cone_rows(problem, plan.states, &sides, &final_skipped);
  plan.constraints.skipped_overlaps = final_skipped;
  plan.slack_total = 0.0;
  for (const auto& row : final_rows) {
    PairStepConstraints entry;
    entry.neighbor = row.neighbor;
    entry.step = row.step;
    entry.side_1 = row.side_1;
    entry.side_2 = row.side_2;
    entry.selected = row.selected;
    plan.constraints.entries.push_back(entry);
    const Vec4& xk = plan.states[static_cast<std::size_t>(row.step)];
    const auto& chosen = row.selected == 0 ? row.side_1 : row.side_2;
    plan.slack_total += std::max(0.0, -chosen.residual(Vec2(xk(2), xk(3))));
  }

  plan.max_defect = 0.0;  // states come from the exact rollout
  if (plan.slack_total > 1e-9) {
    plan.status = SolverStatus::SlackActive;
  } else {
    plan.status = converged ? SolverStatus::Optimal : SolverStatus::MaxIter;
  }
  (void)used_slack;
  return plan;
}

// ---------------------------------------------------------------------------
// Receding-horizon context

Vec4 ReferenceTrajectory::state_at(int step) const {
  const Vec2 offset = goal - start;
  const double dist = offset.norm();
  if (dist == 0.0 || speed <= 0.0) {
    return Vec4(start.x(), start.y(), 0.0, 0.0);
  }
  const Vec2 dir = offset / dist;
  const double s = static_cast<double>(step) * dt * speed;
  if (s >= dist) {
    return Vec4(goal.x(), goal.y(), 0.0, 0.0);
  }
  const Vec2 p = start + s * dir;
  const Vec2 v = speed * dir;
  return Vec4(p.x(), p.y(), v.x(), v.y());
}

std::vector<Vec4> ReferenceTrajectory::horizon_states(int current_step, int n_steps) const {
  std::vector<Vec4> out(static_cast<std::size_t>(n_steps));
  for (int k = 1; k <= n_steps; ++k) {
    out[static_cast<std::size_t>(k - 1)] = state_at(current_step + k);
  }
  return out;
}

AgentPlanner::AgentPlanner(int index, const PlannerConfig& cfg,
                           const ReferenceTrajectory& reference, const NoiseModel& noise)
    : index_(index), cfg_(cfg), reference_(reference), noise_(noise) {
  cfg_.validate();
}

void AgentPlanner::update_filters(const std::vector<std::pair<int, AgentState>>& observations) {
  const Mat4 meas_cov = noise_.measurement_covariance();
  const Mat4 process_cov = noise_.state_covariance();
  for (const auto& [j, observed] : observations) {
    auto it = filters_.find(j);
    if (it == filters_.end()) {
      filters_.emplace(j, NeighborEstimate{observed, meas_cov});
      continue;
    }
    NeighborEstimate predicted = kf_predict(it->second, cfg_.dt, process_cov);
    it->second = kf_update(predicted, observed, meas_cov);
  }
}

ControlInput AgentPlanner::plan_step(const WorldSnapshot& snapshot) {
  const int n_agents = static_cast<int>(snapshot.states.size());
  const AgentState& own = snapshot.states[static_cast<std::size_t>(index_)];

  // Neighbors in relative index order, so the constraint layout is
  // invariant under a rotation relabeling of the agents.
  std::vector<NeighborForecast> forecasts;
  forecasts.reserve(filters_.size());
  for (int offset = 1; offset < n_agents; ++offset) {
    const int j = (index_ + offset) % n_agents;
    const auto it = filters_.find(j);
    if (it == filters_.end()) continue;
    NeighborForecast fc;
    fc.current = it->second.mean;
    fc.states = predict_neighbor_horizon(it->second, cfg_.horizon, cfg_.dt);
    fc.combined_radius = snapshot.radii[static_cast<std::size_t>(index_)] +
                         snapshot.radii[static_cast<std::size_t>(j)];
    forecasts.push_back(std::move(fc));
  }

  const auto reference = reference_.horizon_states(snapshot.step, cfg_.horizon);
  PlanningProblem problem(own, std::move(forecasts), reference, cfg_,
                          noise_.velocity_covariance());
  last_plan_ = solve_sqp(problem, warm_start_);

  // Shift the accepted plan one step forward as the next warm start.
  Eigen::VectorXd shifted(2 * cfg_.horizon);
  for (int k = 0; k + 1 < cfg_.horizon; ++k) {
    shifted.segment<2>(2 * k) = last_plan_.inputs[static_cast<std::size_t>(k + 1)];
  }
  shifted.tail<2>() = last_plan_.inputs.back();
  warm_start_ = shifted;

  return ControlInput{last_plan_.inputs.front()};
}

}  // namespace ccvo
