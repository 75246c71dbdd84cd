#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridmarl/agents/hyperparams.hpp"
#include "gridmarl/env/chronics.hpp"
#include "gridmarl/marl/controller.hpp"

namespace gridmarl::harness {

// Violation of a cross-field run invariant (empty seed list, eval period
// not dividing the budget). Distinct from plain parse/schema errors so the
// CLI can map it to its own exit code.
struct ConfigInvariantError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Full experiment description. Loaded from an INI-style config file with
// sections [env], [hierarchy], [algo] and [run]; CLI flags override file
// values; the GRIDMARL_OUTPUT_ROOT environment variable prefixes relative
// output paths.
struct ExperimentConfig {
  // [env]
  std::string grid_file;      // empty = bundled case-5 grid
  std::string chronics_dir;   // directory containing episode_set.json
  std::uint64_t chronic_seed = 123;
  int chronic_count = 20;
  int chronic_length = env::kFullEpisodeSteps;
  std::string profile_name = "default";  // default | calm
  std::vector<std::pair<std::string, std::string>> profile_overrides;
  env::Environment::Params env_params;

  // [hierarchy]
  marl::HierarchyConfig hierarchy;

  // [algo]
  std::string preset;  // empty = chosen by strategy
  std::vector<std::pair<std::string, std::string>> algo_overrides;

  // [run]
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  int interaction_budget = 10000;
  int eval_period = 100;
  std::string output_dir = "out";
  int workers = 0;  // 0 = hardware concurrency
  bool write_metrics = false;

  // Resolved hyperparameters: preset (explicit or strategy default) with
  // the [algo] overrides applied, rho_thresh synced from [hierarchy].
  agents::HyperParams resolve_hyper() const;
  env::ChronicProfile resolve_profile(const grid::GridSpec& spec) const;
  std::string resolved_output_dir() const;

  // Invariants: nonempty seeds, positive budget, eval period dividing the
  // budget. Throws std::invalid_argument.
  void validate() const;
};

std::string preset_for_strategy(marl::Strategy s);
agents::HyperParams preset_named(const std::string& name);

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace gridmarl::harness
