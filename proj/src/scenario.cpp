#include "ccvo/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ccvo {

namespace {

using nlohmann::json;

const char* kColors[] = {"green",   "blue", "red",  "orange", "purple", "cyan",
                         "magenta", "olive", "brown", "pink",   "teal",   "navy"};

json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-element array");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

// Bounds may be infinite; encode those as the strings "inf" / "-inf".
json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double bound_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("unrecognized bound string '" + s + "'");
  }
  return j.get<double>();
}

template <typename VecT>
json bounds_to_json(const VecT& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(bound_to_json(v(i)));
  return arr;
}

template <typename VecT>
void bounds_from_json(const json& j, VecT& v) {
  if (!j.is_array() || static_cast<int>(j.size()) != v.size()) {
    throw ConfigError("bound array has the wrong length");
  }
  for (int i = 0; i < v.size(); ++i) v(i) = bound_from_json(j[i]);
}

json planner_to_json(const PlannerConfig& p) {
  json j;
  j["horizon"] = p.horizon;
  j["dt"] = p.dt;
  j["state_weight"] = json::array({p.state_weight(0, 0), p.state_weight(1, 1),
                                   p.state_weight(2, 2), p.state_weight(3, 3)});
  j["input_weight"] = json::array({p.input_weight(0, 0), p.input_weight(1, 1)});
  j["state_lower"] = bounds_to_json(p.state_lower);
  j["state_upper"] = bounds_to_json(p.state_upper);
  j["input_lower"] = bounds_to_json(p.input_lower);
  j["input_upper"] = bounds_to_json(p.input_upper);
  j["mass"] = p.mass;
  j["delta_edge"] = p.delta_edge;
  if (p.delta_split) {
    j["delta_split"] = json::array({p.delta_split->first, p.delta_split->second});
  }
  j["method"] = p.method == PlanningMethod::Chance ? "chance" : "deterministic";
  j["max_sqp_iterations"] = p.max_sqp_iterations;
  j["sqp_step_tolerance"] = p.sqp_step_tolerance;
  j["slack_penalty_factor"] = p.slack_penalty_factor;
  return j;
}

PlannerConfig planner_from_json(const json& j) {
  PlannerConfig p;
  if (j.contains("horizon")) p.horizon = j["horizon"].get<int>();
  if (j.contains("dt")) p.dt = j["dt"].get<double>();
  if (j.contains("state_weight")) {
    Vec4 d;
    for (int i = 0; i < 4; ++i) d(i) = j["state_weight"][static_cast<std::size_t>(i)].get<double>();
    p.state_weight = d.asDiagonal();
  }
  if (j.contains("input_weight")) {
    Vec2 d;
    for (int i = 0; i < 2; ++i) d(i) = j["input_weight"][static_cast<std::size_t>(i)].get<double>();
    p.input_weight = d.asDiagonal();
  }
  if (j.contains("state_lower")) bounds_from_json(j["state_lower"], p.state_lower);
  if (j.contains("state_upper")) bounds_from_json(j["state_upper"], p.state_upper);
  if (j.contains("input_lower")) bounds_from_json(j["input_lower"], p.input_lower);
  if (j.contains("input_upper")) bounds_from_json(j["input_upper"], p.input_upper);
  if (j.contains("mass")) p.mass = j["mass"].get<double>();
  if (j.contains("delta_edge")) p.delta_edge = j["delta_edge"].get<double>();
  if (j.contains("delta_split")) {
    p.delta_split = std::make_pair(j["delta_split"][0].get<double>(),
                                   j["delta_split"][1].get<double>());
  }
  if (j.contains("method")) {
    const std::string m = j["method"].get<std::string>();
    if (m == "chance") {
      p.method = PlanningMethod::Chance;
    } else if (m == "deterministic") {
      p.method = PlanningMethod::Deterministic;
    } else {
      throw ConfigError("unknown planning method '" + m + "'");
    }
  }
  if (j.contains("max_sqp_iterations")) p.max_sqp_iterations = j["max_sqp_iterations"].get<int>();
  if (j.contains("sqp_step_tolerance")) p.sqp_step_tolerance = j["sqp_step_tolerance"].get<double>();
  if (j.contains("slack_penalty_factor")) {
    p.slack_penalty_factor = j["slack_penalty_factor"].get<double>();
  }
  return p;
}

}  // namespace

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::AxisSwap6: return "axisswap6";
    case ScenarioId::OriginSwap6: return "originswap6";
    case ScenarioId::AxisSwap12: return "axisswap12";
    case ScenarioId::OriginSwap12: return "originswap12";
    case ScenarioId::Custom: return "custom";
  }
  return "custom";
}

ScenarioId scenario_id_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "axisswap6") return ScenarioId::AxisSwap6;
  if (s == "originswap6") return ScenarioId::OriginSwap6;
  if (s == "axisswap12") return ScenarioId::AxisSwap12;
  if (s == "originswap12") return ScenarioId::OriginSwap12;
  if (s == "custom") return ScenarioId::Custom;
  throw ConfigError("unknown scenario id '" + name + "'");
}

int ScenarioConfig::n_steps() const {
  const double ratio = t_run / planner.dt;
  const int steps = static_cast<int>(std::llround(ratio));
  if (steps < 0 || std::abs(ratio - steps) > 1e-6) {
    throw ConfigError("t_run must be a nonnegative multiple of dt");
  }
  return steps;
}

void ScenarioConfig::validate() const {
  planner.validate();
  if (agents.empty()) throw ConfigError("scenario needs at least one agent");
  for (const auto& a : agents) {
    if (!(a.radius > 0.0)) throw ConfigError("agent radius must be positive");
    if (!a.start.allFinite() || !a.goal.allFinite()) {
      throw ConfigError("agent start/goal must be finite");
    }
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      const double dist = (agents[i].start - agents[j].start).norm();
      if (dist <= agents[i].radius + agents[j].radius) {
        std::ostringstream msg;
        msg << "agents " << i << " and " << j << " start in contact (distance " << dist << ")";
        throw ConfigError(msg.str());
      }
    }
  }
  if (!(nominal_speed > 0.0)) throw ConfigError("nominal_speed must be positive");
  if (!(goal_tolerance > 0.0)) throw ConfigError("goal_tolerance must be positive");
  n_steps();
}

namespace {

std::vector<Vec2> ring_positions(int n, double ring_radius) {
  std::vector<Vec2> p(static_cast<std::size_t>(n));
  const double start_angle = 3.0 * M_PI / 4.0;  // puts agent 0 at (-2, 2) on the default ring
  if (n % 2 == 0) {
    // Compute one half, mirror the other exactly so antipodal pairs negate
    // without rounding.
    for (int i = 0; i < n / 2; ++i) {
      const double angle = start_angle + 2.0 * M_PI * i / n;
      p[static_cast<std::size_t>(i)] =
          Vec2(ring_radius * std::cos(angle), ring_radius * std::sin(angle));
      p[static_cast<std::size_t>(i + n / 2)] = -p[static_cast<std::size_t>(i)];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double angle = start_angle + 2.0 * M_PI * i / n;
      p[static_cast<std::size_t>(i)] =
          Vec2(ring_radius * std::cos(angle), ring_radius * std::sin(angle));
    }
  }
  return p;
}

ScenarioConfig ring_scenario_base(int n_agents, double radius, double ring_radius) {
  if (n_agents < 1) throw ConfigError("need at least one agent");
  ScenarioConfig cfg;
  const auto starts = ring_positions(n_agents, ring_radius);
  cfg.agents.resize(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    auto& a = cfg.agents[static_cast<std::size_t>(i)];
    a.start = starts[static_cast<std::size_t>(i)];
    a.goal = -a.start;
    a.radius = radius;
    a.color = kColors[i % 12];
  }
  return cfg;
}

}  // namespace

ScenarioConfig make_scenario(ScenarioId id, int n_agents, double radius, double ring_radius) {
  if (id == ScenarioId::Custom) {
    throw ConfigError("custom scenarios come from a config file, not make_scenario");
  }
  const int expected = (id == ScenarioId::AxisSwap6 || id == ScenarioId::OriginSwap6) ? 6 : 12;
  if (n_agents != expected) {
    std::ostringstream msg;
    msg << to_string(id) << " requires " << expected << " agents, got " << n_agents;
    throw ConfigError(msg.str());
  }

  ScenarioConfig cfg = ring_scenario_base(n_agents, radius, ring_radius);
  cfg.scenario_id = id;
  const bool axis_swap = id == ScenarioId::AxisSwap6 || id == ScenarioId::AxisSwap12;
  if (axis_swap) {
    for (int i = 0; i < n_agents; ++i) {
      auto& a = cfg.agents[static_cast<std::size_t>(i)];
      if (i % 2 == 0) {
        a.goal = Vec2(a.start.x(), -a.start.y());  // reflect across the x axis
      } else {
        a.goal = Vec2(-a.start.x(), a.start.y());  // reflect across the y axis
      }
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig make_ring_scenario(int n_agents, double radius, double ring_radius) {
  ScenarioConfig cfg = ring_scenario_base(n_agents, radius, ring_radius);
  cfg.scenario_id = ScenarioId::Custom;
  cfg.validate();
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["scenario_id"] = to_string(cfg.scenario_id);
  j["seed"] = cfg.seed;
  j["t_run"] = cfg.t_run;
  j["nominal_speed"] = cfg.nominal_speed;
  j["goal_tolerance"] = cfg.goal_tolerance;
  j["noise"] = {{"state_covariance_diag",
                 json::array({cfg.noise.state_covariance_diag(0), cfg.noise.state_covariance_diag(1),
                              cfg.noise.state_covariance_diag(2), cfg.noise.state_covariance_diag(3)})},
                {"scale", cfg.noise.scale}};
  j["planner"] = planner_to_json(cfg.planner);
  j["agents"] = json::array();
  for (const auto& a : cfg.agents) {
    j["agents"].push_back({{"start", vec2_to_json(a.start)},
                           {"goal", vec2_to_json(a.goal)},
                           {"radius", a.radius},
                           {"color", a.color}});
  }
  return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("scenario config is not valid JSON: ") + err.what());
  }
  ScenarioConfig cfg;
  if (j.contains("scenario_id")) cfg.scenario_id = scenario_id_from_string(j["scenario_id"]);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("t_run")) cfg.t_run = j["t_run"].get<double>();
  if (j.contains("nominal_speed")) cfg.nominal_speed = j["nominal_speed"].get<double>();
  if (j.contains("goal_tolerance")) cfg.goal_tolerance = j["goal_tolerance"].get<double>();
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    if (n.contains("state_covariance_diag")) {
      for (int i = 0; i < 4; ++i) {
        cfg.noise.state_covariance_diag(i) =
            n["state_covariance_diag"][static_cast<std::size_t>(i)].get<double>();
      }
    }
    if (n.contains("scale")) cfg.noise.scale = n["scale"].get<double>();
  }
  if (j.contains("planner")) cfg.planner = planner_from_json(j["planner"]);
  if (j.contains("agents")) {
    cfg.agents.clear();
    for (const auto& item : j["agents"]) {
      AgentSpec a;
      a.start = vec2_from_json(item.at("start"));
      a.goal = vec2_from_json(item.at("goal"));
      if (item.contains("radius")) a.radius = item["radius"].get<double>();
      if (item.contains("color")) a.color = item["color"].get<std::string>();
      cfg.agents.push_back(a);
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(cfg);
  if (!out) throw IoError("failed writing scenario file: " + path);
}

}  // namespace ccvo
