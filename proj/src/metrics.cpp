#include "ccvo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccvo {

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::MaxIter: return "max_iter";
    case SolverStatus::SlackActive: return "slack_active";
    case SolverStatus::Emergency: return "emergency";
  }
  return "optimal";
}

namespace {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto idx = static_cast<std::size_t>(
      std::min(n - 1.0, std::max(0.0, std::ceil(p * n) - 1.0)));
  return values[idx];
}

}  // namespace

RunMetrics compute_metrics(const TrajectoryLog& log, const ScenarioConfig& cfg) {
  if (log.states.empty()) throw ConfigError("cannot compute metrics of an empty log");
  const int n = log.n_agents();

  RunMetrics m;
  m.min_pairwise_distance = std::numeric_limits<double>::infinity();
  bool separated = true;
  for (const auto& step_states : log.states) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double d = (step_states[static_cast<std::size_t>(i)].position -
                          step_states[static_cast<std::size_t>(j)].position)
                             .norm();
        m.min_pairwise_distance = std::min(m.min_pairwise_distance, d);
        if (d <= log.radii[static_cast<std::size_t>(i)] + log.radii[static_cast<std::size_t>(j)]) {
          separated = false;
        }
      }
    }
  }

  const auto& final_states = log.states.back();
  m.goal_errors.resize(static_cast<std::size_t>(n));
  bool arrived = true;
  for (int i = 0; i < n; ++i) {
    const double err =
        (final_states[static_cast<std::size_t>(i)].position - cfg.agents[static_cast<std::size_t>(i)].goal)
            .norm();
    m.goal_errors[static_cast<std::size_t>(i)] = err;
    if (err > cfg.goal_tolerance) arrived = false;
  }
  m.success = separated && arrived;

  for (const auto& step_records : log.records) {
    for (const auto& rec : step_records) {
      m.per_step_solve_time.push_back(rec.solve_time);
    }
  }
  m.solve_time_median = percentile(m.per_step_solve_time, 0.5);
  m.solve_time_p95 = percentile(m.per_step_solve_time, 0.95);
  return m;
}

}  // namespace ccvo
