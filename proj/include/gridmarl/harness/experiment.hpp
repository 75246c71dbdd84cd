#pragma once

#include <string>
#include <vector>

#include "gridmarl/harness/config.hpp"

namespace gridmarl::harness {

struct SeedRunOutput {
  std::uint64_t seed = 0;
  std::vector<marl::ScoreLogRow> score_log;
  std::string score_csv_path;
  std::vector<std::string> checkpoint_paths;
  double wall_seconds = 0.0;
  int episodes = 0;
  int interactions = 0;
};

struct AggregateCurves {
  std::vector<int> interactions;
  std::vector<double> mean;
  std::vector<double> standard_error;
};

// Mean and standard error (sample std / sqrt(n), 0 for a single seed) per
// aligned eval point. Throws std::invalid_argument on misaligned logs.
AggregateCurves aggregate_report(
    const std::vector<std::vector<marl::ScoreLogRow>>& per_seed);

struct RunReport {
  std::vector<SeedRunOutput> seeds;
  AggregateCurves curves;
  std::string report_dir;
};

grid::GridSpec load_grid(const ExperimentConfig& cfg);
// Loads the episode set from chronics_dir, or generates it in memory from
// (seed, count, length, profile) when no directory is configured.
env::EpisodeSet load_or_generate_chronics(const ExperimentConfig& cfg,
                                          const grid::GridSpec& spec);

// Trains every seed of the config (parallel workers), writing per-seed
// score logs and per-agent checkpoints plus the aggregate curve files and
// run metadata under <output>/<strategy>-<mid_policy>/.
RunReport train_experiment(const ExperimentConfig& cfg,
                           const grid::GridSpec& spec,
                           const env::EpisodeSet& episodes);

// Baseline cache and trajectory files (comma-separated).
void write_baseline_csv(const std::string& path,
                        const std::vector<marl::BaselineRecord>& records);
std::vector<marl::BaselineRecord> read_baseline_csv(const std::string& path);

struct TrajectoryRecord {
  int chronic_id = 0;
  int offset = 0;
  int survival_steps = 0;
  double cost = 0.0;
};
void write_trajectories_csv(const std::string& path,
                            const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectories_csv(const std::string& path);

struct EvalOutput {
  std::vector<double> scores;
  std::vector<TrajectoryRecord> trajectories;
};

// Restores one trained seed from its checkpoint directory and evaluates it
// greedily on the given split ("test" or "validation").
EvalOutput evaluate_checkpoints(const ExperimentConfig& cfg,
                                const grid::GridSpec& spec,
                                const env::EpisodeSet& episodes,
                                const std::string& seed_dir,
                                const std::string& split);

// Recomputes l2rpn scores for stored trajectories against a baseline cache.
// Throws std::runtime_error when a trajectory has no baseline entry.
std::vector<double> score_trajectories(
    const std::vector<TrajectoryRecord>& trajectories,
    const std::vector<marl::BaselineRecord>& baseline);

}  // namespace gridmarl::harness
