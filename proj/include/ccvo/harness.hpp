#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccvo/metrics.hpp"
#include "ccvo/scenario.hpp"

namespace ccvo {

/// Runs the full receding-horizon loop: each step every agent filters its
/// noisy neighbor observations and plans against the same start-of-step
/// snapshot, then all first inputs are applied at once. The trial index
/// selects an independent substream of the scenario seed.
TrajectoryLog run_receding_horizon(const ScenarioConfig& scenario, std::uint64_t trial = 0);

struct SweepCell {
  double noise_scale = 1.0;
  PlanningMethod method = PlanningMethod::Chance;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_min_distance = 0.0;  // over successful runs; NaN when none
};

struct SweepTable {
  std::vector<SweepCell> cells;
};

/// Safety comparison across noise scales and planning methods, seeded and
/// reproducible. Trials run in parallel; each owns its world.
SweepTable noise_sweep(const ScenarioConfig& base, const std::vector<double>& scales,
                       int trials, const std::vector<PlanningMethod>& methods);

struct BenchRow {
  int n_agents = 0;
  double median_step_time = 0.0;  // seconds per agent planning step
  double p95_step_time = 0.0;
  int samples = 0;
};

struct BenchTable {
  std::vector<BenchRow> rows;
};

/// Per-agent planning-time benchmark on ring scenarios of growing size.
/// Runs serially so the timings are unloaded.
BenchTable bench_agents(const std::vector<int>& counts, int trials,
                        double t_run = 2.5, std::uint64_t seed = 1);

/// Writes trajectories.csv, distances.csv, metrics.json and config.snapshot
/// into out_dir (created if missing). Deterministic, byte-stable output.
void export_run(const TrajectoryLog& log, const RunMetrics& metrics,
                const ScenarioConfig& cfg, const std::string& out_dir);

std::string sweep_to_csv(const SweepTable& table);
std::string bench_to_csv(const BenchTable& table);

}  // namespace ccvo
