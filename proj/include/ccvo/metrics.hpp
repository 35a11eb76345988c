#pragma once

#include <string>
#include <vector>

#include "ccvo/planner.hpp"
#include "ccvo/scenario.hpp"

namespace ccvo {

struct AgentStepRecord {
  Vec2 input = Vec2::Zero();
  SolverStatus status = SolverStatus::Optimal;
  double solve_time = 0.0;  // seconds spent planning this agent-step
};

/// Closed-loop trace of one run: states at steps 0..T (T = t_run/dt) and
/// the inputs applied over steps 0..T-1.
struct TrajectoryLog {
  double dt = 0.05;
  std::vector<double> radii;
  std::vector<std::vector<AgentState>> states;        // [step][agent]
  std::vector<std::vector<AgentStepRecord>> records;  // [step][agent]

  int n_agents() const { return static_cast<int>(radii.size()); }
  int n_steps() const { return static_cast<int>(records.size()); }
};

struct RunMetrics {
  double min_pairwise_distance = 0.0;  // center-to-center, +inf with < 2 agents
  bool success = false;
  std::vector<double> per_step_solve_time;  // step-major, agent-minor
  std::vector<double> goal_errors;          // meters at t_run, per agent
  double solve_time_median = 0.0;
  double solve_time_p95 = 0.0;
};

/// Safety and timing metrics of a finished run. Success means every agent
/// ends within the goal tolerance and every pair keeps its center distance
/// above the sum of radii at every logged step.
RunMetrics compute_metrics(const TrajectoryLog& log, const ScenarioConfig& cfg);

std::string to_string(SolverStatus status);

}  // namespace ccvo
