#include "ccvo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ccvo/rng.hpp"

namespace ccvo {

namespace {

constexpr std::uint64_t kProcessChannel = 1;
constexpr std::uint64_t kMeasurementChannelBase = 256;

Vec2 sample_velocity_noise(RngStream& stream, const NoiseModel& noise) {
  const Vec2 std_dev = (noise.scale * noise.state_covariance_diag.tail<2>()).cwiseSqrt();
  return stream.gaussian_pair().cwiseProduct(std_dev);
}

Vec4 sample_state_noise(RngStream& stream, const NoiseModel& noise) {
  const Vec4 std_dev = (noise.scale * noise.state_covariance_diag).cwiseSqrt();
  return stream.gaussian4().cwiseProduct(std_dev);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

// Minimal parallel map over trial indices; results land in caller-owned
// slots so aggregation order is deterministic.
void parallel_for(int count, const std::function<void(int)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

TrajectoryLog run_receding_horizon(const ScenarioConfig& scenario, std::uint64_t trial) {
  scenario.validate();
  const int n = static_cast<int>(scenario.agents.size());
  const int steps = scenario.n_steps();
  const auto& planner_cfg = scenario.planner;
  const bool noisy = scenario.noise.enabled();

  TrajectoryLog log;
  log.dt = planner_cfg.dt;
  log.radii.resize(static_cast<std::size_t>(n));

  std::vector<AgentState> states(static_cast<std::size_t>(n));
  std::vector<AgentPlanner> planners;
  std::vector<RngStream> process_streams;
  std::vector<std::vector<RngStream>> meas_streams;  // [observer][target]
  planners.reserve(static_cast<std::size_t>(n));
  process_streams.reserve(static_cast<std::size_t>(n));
  meas_streams.resize(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    const auto& spec = scenario.agents[static_cast<std::size_t>(i)];
    log.radii[static_cast<std::size_t>(i)] = spec.radius;
    states[static_cast<std::size_t>(i)] = AgentState{spec.start, Vec2::Zero()};
    ReferenceTrajectory ref{spec.start, spec.goal, scenario.nominal_speed, planner_cfg.dt};
    planners.emplace_back(i, planner_cfg, ref, scenario.noise);
    process_streams.emplace_back(
        derive_stream_key(scenario.seed, trial, static_cast<std::uint64_t>(i), kProcessChannel));
    auto& row = meas_streams[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      row.emplace_back(derive_stream_key(scenario.seed, trial, static_cast<std::uint64_t>(i),
                                         kMeasurementChannelBase + static_cast<std::uint64_t>(j)));
    }
  }

  log.states.push_back(states);

  for (int step = 0; step < steps; ++step) {
    const WorldSnapshot snapshot{states, log.radii, step};

    std::vector<AgentStepRecord> records(static_cast<std::size_t>(n));
    std::vector<Vec2> inputs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, AgentState>> observations;
      observations.reserve(static_cast<std::size_t>(n - 1));
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        AgentState observed = states[static_cast<std::size_t>(j)];
        if (noisy) {
          const Vec4 sample = sample_state_noise(
              meas_streams[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
              scenario.noise);
          observed = AgentState::from_vector(observed.as_vector() + sample);
        }
        observations.emplace_back(j, observed);
      }

      auto& planner = planners[static_cast<std::size_t>(i)];
      const auto t0 = std::chrono::steady_clock::now();
      planner.update_filters(observations);
      const ControlInput u = planner.plan_step(snapshot);
      const auto t1 = std::chrono::steady_clock::now();

      inputs[static_cast<std::size_t>(i)] = u.force;
      auto& rec = records[static_cast<std::size_t>(i)];
      rec.input = u.force;
      rec.status = planner.last_plan().status;
      rec.solve_time = std::chrono::duration<double>(t1 - t0).count();
    }

    // All first inputs apply simultaneously.
    for (int i = 0; i < n; ++i) {
      Vec2 noise_sample = Vec2::Zero();
      if (noisy) {
        noise_sample =
            sample_velocity_noise(process_streams[static_cast<std::size_t>(i)], scenario.noise);
      }
      AgentState next = step_dynamics(states[static_cast<std::size_t>(i)],
                                      ControlInput{inputs[static_cast<std::size_t>(i)]},
                                      planner_cfg.dt, planner_cfg.mass, noise_sample);
      next.velocity = next.velocity.cwiseMax(planner_cfg.state_lower.tail<2>())
                          .cwiseMin(planner_cfg.state_upper.tail<2>());
      states[static_cast<std::size_t>(i)] = next;
    }

    log.records.push_back(std::move(records));
    log.states.push_back(states);
  }
  return log;
}

SweepTable noise_sweep(const ScenarioConfig& base, const std::vector<double>& scales,
                       int trials, const std::vector<PlanningMethod>& methods) {
  if (trials < 1) throw ConfigError("noise_sweep needs at least one trial");
  SweepTable table;
  for (const double scale : scales) {
    for (const PlanningMethod method : methods) {
      ScenarioConfig cfg = base;
      cfg.noise.scale = scale;
      cfg.planner.method = method;

      std::vector<RunMetrics> results(static_cast<std::size_t>(trials));
      parallel_for(trials, [&](int t) {
        const TrajectoryLog log = run_receding_horizon(cfg, static_cast<std::uint64_t>(t));
        results[static_cast<std::size_t>(t)] = compute_metrics(log, cfg);
      });

      SweepCell cell;
      cell.noise_scale = scale;
      cell.method = method;
      cell.trials = trials;
      double sum_min = 0.0;
      for (const auto& r : results) {
        if (r.success) {
          ++cell.successes;
          sum_min += r.min_pairwise_distance;
        }
      }
      cell.success_rate = static_cast<double>(cell.successes) / trials;
      cell.mean_min_distance = cell.successes > 0
                                   ? sum_min / cell.successes
                                   : std::numeric_limits<double>::quiet_NaN();
      table.cells.push_back(cell);
    }
  }
  return table;
}

BenchTable bench_agents(const std::vector<int>& counts, int trials, double t_run,
                        std::uint64_t seed) {
  if (trials < 1) throw ConfigError("bench_agents needs at least one trial");
  BenchTable table;
  for (const int count : counts) {
    if (count < 2) throw ConfigError("bench_agents needs at least two agents");
    ScenarioConfig cfg = make_ring_scenario(count);
    cfg.seed = seed;
    cfg.t_run = t_run;

    std::vector<double> samples;
    for (int t = 0; t < trials; ++t) {
      const TrajectoryLog log = run_receding_horizon(cfg, static_cast<std::uint64_t>(t));
      for (const auto& step_records : log.records) {
        for (const auto& rec : step_records) samples.push_back(rec.solve_time);
      }
    }
    std::sort(samples.begin(), samples.end());
    BenchRow row;
    row.n_agents = count;
    row.samples = static_cast<int>(samples.size());
    row.median_step_time = samples[samples.size() / 2];
    row.p95_step_time = samples[static_cast<std::size_t>(
        std::min(samples.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * samples.size()) - 1)))];
    table.rows.push_back(row);
  }
  return table;
}

void export_run(const TrajectoryLog& log, const RunMetrics& metrics,
                const ScenarioConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  const int n = log.n_agents();
  const int steps = log.n_steps();

  // trajectories.csv: one row per (step, agent); the terminal row carries
  // the final state with zero input and status "terminal".
  std::ostringstream traj;
  traj << "step,time,agent,px,py,vx,vy,ux,uy,status\n";
  for (int step = 0; step <= steps; ++step) {
    const double time = step * log.dt;
    for (int i = 0; i < n; ++i) {
      const AgentState& x = log.states[static_cast<std::size_t>(step)][static_cast<std::size_t>(i)];
      Vec2 u = Vec2::Zero();
      std::string status = "terminal";
      if (step < steps) {
        const auto& rec = log.records[static_cast<std::size_t>(step)][static_cast<std::size_t>(i)];
        u = rec.input;
        status = to_string(rec.status);
      }
      traj << step << ',' << format_double(time) << ',' << i << ',' << format_double(x.position.x())
           << ',' << format_double(x.position.y()) << ',' << format_double(x.velocity.x()) << ','
           << format_double(x.velocity.y()) << ',' << format_double(u.x()) << ','
           << format_double(u.y()) << ',' << status << '\n';
    }
  }
  write_file(out_dir + "/trajectories.csv", traj.str());

  std::ostringstream dist;
  dist << "step,time,pair,distance\n";
  for (int step = 0; step <= steps; ++step) {
    const double time = step * log.dt;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double d =
            (log.states[static_cast<std::size_t>(step)][static_cast<std::size_t>(i)].position -
             log.states[static_cast<std::size_t>(step)][static_cast<std::size_t>(j)].position)
                .norm();
        dist << step << ',' << format_double(time) << ',' << i << '-' << j << ','
             << format_double(d) << '\n';
      }
    }
  }
  write_file(out_dir + "/distances.csv", dist.str());

  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["scenario_id"] = to_string(cfg.scenario_id);
  j["min_pairwise_distance"] = std::isfinite(metrics.min_pairwise_distance)
                                   ? nlohmann::json(metrics.min_pairwise_distance)
                                   : nlohmann::json();
  j["success"] = metrics.success;
  j["goal_errors"] = metrics.goal_errors;
  j["solve_time_median"] = metrics.solve_time_median;
  j["solve_time_p95"] = metrics.solve_time_p95;
  j["per_step_solve_time"] = metrics.per_step_solve_time;
  j["config"] = nlohmann::json::parse(scenario_to_json(cfg));
  write_file(out_dir + "/metrics.json", j.dump(2) + "\n");

  write_file(out_dir + "/config.snapshot", scenario_to_json(cfg));
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "noise_scale,method,trials,successes,success_rate,mean_min_distance\n";
  for (const auto& c : table.cells) {
    out << format_double(c.noise_scale) << ','
        << (c.method == PlanningMethod::Chance ? "chance" : "deterministic") << ',' << c.trials
        << ',' << c.successes << ',' << format_double(c.success_rate) << ','
        << format_double(c.mean_min_distance) << '\n';
  }
  return out.str();
}

std::string bench_to_csv(const BenchTable& table) {
  std::ostringstream out;
  out << "n_agents,median_step_time,p95_step_time,samples\n";
  for (const auto& r : table.rows) {
    out << r.n_agents << ',' << format_double(r.median_step_time) << ','
        << format_double(r.p95_step_time) << ',' << r.samples << '\n';
  }
  return out.str();
}

}  // namespace ccvo
