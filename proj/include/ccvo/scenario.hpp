#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccvo/dynamics.hpp"
#include "ccvo/planner.hpp"

namespace ccvo {

enum class ScenarioId { AxisSwap6, OriginSwap6, AxisSwap12, OriginSwap12, Custom };

std::string to_string(ScenarioId id);
ScenarioId scenario_id_from_string(const std::string& name);  // throws ConfigError

struct AgentSpec {
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  double radius = 0.1;
  std::string color = "gray";
};

struct ScenarioConfig {
  std::vector<AgentSpec> agents;
  PlannerConfig planner;
  NoiseModel noise;
  std::uint64_t seed = 1;
  double t_run = 8.0;
  ScenarioId scenario_id = ScenarioId::Custom;
  double nominal_speed = 1.0;
  double goal_tolerance = 0.1;

  int n_steps() const;    // t_run / dt, validated as an integer multiple
  void validate() const;  // throws ConfigError
};

inline constexpr double kDefaultRingRadius = 2.8284271247461903;  // 2*sqrt(2)

/// Builds one of the named benchmark scenarios. Agents sit evenly spaced on
/// a ring through (-2, 2); the second half of the ring is the exact point
/// reflection of the first half. AxisSwap goals reflect each start across
/// the x axis (even agents) or y axis (odd agents); OriginSwap goals are
/// the point reflection through the origin. The named layouts require the
/// matching agent count (6 or 12).
ScenarioConfig make_scenario(ScenarioId id, int n_agents, double radius = 0.1,
                             double ring_radius = kDefaultRingRadius);

/// Ring layout with origin-swap goals for an arbitrary agent count;
/// used by the agent-count benchmark.
ScenarioConfig make_ring_scenario(int n_agents, double radius = 0.1,
                                  double ring_radius = kDefaultRingRadius);

ScenarioConfig load_scenario(const std::string& path);                // throws IoError/ConfigError
void save_scenario(const ScenarioConfig& cfg, const std::string& path);
std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const std::string& text);

}  // namespace ccvo
