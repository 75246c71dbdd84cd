#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gridmarl/grid/grid.hpp"

namespace gridmarl::env {

// Time series of load demand and generation setpoints driving one episode.
// One row per 5-minute step.
struct Chronic {
  int id = 0;
  Eigen::MatrixXd load_mw;  // T x n_loads
  Eigen::MatrixXd gen_mw;   // T x n_generators
  static constexpr int kStepMinutes = 5;

  int length() const { return static_cast<int>(load_mw.rows()); }
};

// Profile for the synthetic chronic generator: a daily sinusoid per load,
// AR(1) noise, and occasional stress events that multiply system demand.
struct ChronicProfile {
  std::vector<double> base_load_mw;  // per load, required
  double daily_amplitude = 0.22;
  double noise_scale = 0.015;        // AR(1) innovation, relative
  double noise_persistence = 0.85;
  double spikes_per_day = 2.5;       // expected stress events per day
  double spike_magnitude_min = 1.45;
  double spike_magnitude_max = 1.85;
  int spike_duration_min = 8;        // steps
  int spike_duration_max = 30;
  int spike_ramp_steps = 8;          // linear ramp in and out of each event
  double dispatch_share_min = 0.45;  // generator 0 share of total dispatch
  double dispatch_share_max = 0.70;
  double dispatch_drift = 0.01;      // random-walk step of the share
  double max_loss_fraction = 0.05;

  void validate(const grid::GridSpec& spec) const;
};

ChronicProfile default_profile(const grid::GridSpec& spec);
ChronicProfile calm_profile(const grid::GridSpec& spec);

constexpr int kFullEpisodeSteps = 2016;   // one week of 5-minute steps
constexpr int kSubEpisodeSteps = 864;     // three days
constexpr int kSubEpisodesPerChronic = 5;

// A generated chronic collection with its train/test/validation split and
// the 5 overlapping sub-episode start offsets per chronic.
struct EpisodeSet {
  std::vector<Chronic> chronics;
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  std::vector<int> validation_ids;
  std::vector<std::vector<int>> sub_episode_offsets;  // per chronic

  const Chronic& chronic(int id) const { return chronics.at(static_cast<std::size_t>(id)); }
};

// Deterministic in (seed, profile): the same arguments regenerate the set
// bit-identically. With count == 20 the split is 18 train / 1 test / 1
// validation, in id order.
EpisodeSet generate_chronics(std::uint64_t seed, int count, int length,
                             const grid::GridSpec& spec,
                             const ChronicProfile& profile);

std::vector<int> sub_episode_offsets(int chronic_length);

// CSV: header "timestep,load_<id>_mw...,gen_<id>_mw...", one row per step.
// Values round-trip bit-exactly.
void write_chronic_csv(const std::string& path, const Chronic& chronic,
                       const grid::GridSpec& spec);
Chronic read_chronic_csv(const std::string& path, const grid::GridSpec& spec,
                         int id);

// Manifest (JSON): chronic files, split assignment, sub-episode offsets.
void write_episode_set(const std::string& directory, const EpisodeSet& set,
                       const grid::GridSpec& spec);
EpisodeSet load_episode_set(const std::string& manifest_path,
                            const grid::GridSpec& spec);

}  // namespace gridmarl::env
