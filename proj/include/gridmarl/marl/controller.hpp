#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "gridmarl/agents/ppo.hpp"
#include "gridmarl/agents/sacd.hpp"
#include "gridmarl/env/score.hpp"
#include "gridmarl/marl/mid_policy.hpp"

namespace gridmarl::marl {

enum class Strategy { isacd, ippo, dsacd, dppo, sacd, ppo };
enum class MidPolicy { capa, fixed, random };

const char* to_string(Strategy s);
const char* to_string(MidPolicy p);
Strategy parse_strategy(const std::string& name);
MidPolicy parse_mid_policy(const std::string& name);

bool is_sacd_family(Strategy s);
bool is_dependent(Strategy s);
bool is_single_agent(Strategy s);

struct HierarchyConfig {
  double rho_thresh = 0.95;
  MidPolicy mid_policy = MidPolicy::capa;
  Strategy strategy = Strategy::dsacd;
  bool early_exit = true;  // stop the sequence once the grid is safe again
  bool recompute_order_each_action = false;
  double laplace_prior = 1.0;
  bool pin_mid_identity = false;  // freeze pi_mid at the identity (tests)
};

// Event stream of the hierarchical loop, for scripted-trace checks.
struct TraceEvent {
  enum class Kind {
    gate,          // top-level decision: unsafe flag at `timestep`
    order,         // mid-level activation order
    skip,          // identity action skipped without an env step
    act,           // counted interaction
    forced_step,   // activation produced no env step; time advanced
  };
  Kind kind{};
  int timestep = 0;
  bool unsafe = false;
  std::vector<int> order;
  int agent = -1;
  int action = -1;
  int interactions = 0;
};
using TraceSink = std::function<void(const TraceEvent&)>;

// One low-level learner bound to a substation (or, for the single-agent
// baselines, to the union action space).
class LowLevelAgent {
 public:
  LowLevelAgent(SubstationAgentSpec spec, Strategy strategy, int obs_width,
                const agents::HyperParams& hp, std::uint64_t init_seed);

  const SubstationAgentSpec& spec() const { return spec_; }
  bool is_sacd() const { return sacd_ != nullptr; }
  agents::SacdAgent& sacd() { return *sacd_; }
  agents::PpoAgent& ppo() { return *ppo_; }

  int select(const nn::GraphBatch& s, Rng& rng, double* log_prob,
             double* value);
  int greedy(const nn::GraphBatch& s);
  // Next-state value estimate used in dependent targets: the soft state
  // value for SACD agents, the critic value for PPO agents.
  nn::Vector next_state_values(const nn::GraphBatch& batch);

  // PPO rollout bookkeeping (encodings aligned with rollout entries).
  std::vector<nn::GraphBatch>& rollout_encodings() { return encodings_; }

 private:
  SubstationAgentSpec spec_;
  std::unique_ptr<agents::SacdAgent> sacd_;
  std::unique_ptr<agents::PpoAgent> ppo_;
  std::vector<nn::GraphBatch> encodings_;
};

struct ScoreLogRow {
  int interaction = 0;
  double mean_score = 0.0;
  std::vector<double> window_scores;
};

struct TrainOptions {
  int interaction_budget = 10000;
  int eval_period = 100;
  bool evaluate = true;            // run periodic greedy evals
  std::string metrics_path;        // per-update metrics CSV; empty = off
  TraceSink trace;                 // optional event sink
  // Test hook: replaces the sampled action index for scripted scenarios.
  std::function<int(int agent, const env::Observation& obs, int sampled)>
      action_override;
};

struct TrainResult {
  std::vector<ScoreLogRow> score_log;
  int total_interactions = 0;
  int episodes = 0;
};

// Baseline (do-nothing) survival and cost for one episode window.
struct BaselineRecord {
  int chronic_id = 0;
  int offset = 0;
  int survival_steps = 0;
  double cost = 0.0;
};

std::vector<BaselineRecord> run_do_nothing_baseline(
    const grid::GridSpec& spec, const env::Environment::Params& env_params,
    const env::EpisodeSet& set, const std::vector<int>& chronic_ids);

// The three-level training driver: rule-based gate, rule-based mid-level
// ordering, learned low-level agents, one strategy per instance.
class Trainer {
 public:
  Trainer(grid::GridSpec spec, const env::EpisodeSet& episodes,
          HierarchyConfig hierarchy, agents::HyperParams hyper,
          std::uint64_t seed,
          env::Environment::Params env_params = env::Environment::Params());

  TrainResult run(const TrainOptions& options);

  struct EvalWindow {
    int chronic_id = 0;
    int offset = 0;
    int survival_steps = 0;
    double cost = 0.0;
    double score = 0.0;
  };

  // Greedy evaluation on every sub-episode window of the given chronics;
  // returns one score per window.
  std::vector<double> evaluate(const std::vector<int>& chronic_ids);
  std::vector<EvalWindow> evaluate_detailed(const std::vector<int>& chronic_ids);

  std::vector<LowLevelAgent>& agents() { return agents_; }
  MidPolicyEstimate& mid_estimate() { return mid_estimate_; }
  const HierarchyConfig& hierarchy() const { return hierarchy_; }
  const agents::HyperParams& hyper() const { return hyper_; }
  const std::vector<BaselineRecord>& test_baseline() const {
    return test_baseline_;
  }

 private:
  struct Pending {
    bool active = false;
    env::Observation s;
    env::Observation s_next;
    nn::GraphBatch s_encoded;
    int agent = -1;
    int action = -1;
    double reward = 0.0;
    bool done = false;
    double log_prob = 0.0;
    double value = 0.0;
  };

  nn::Vector target_row(int agent) const;
  void finalize_pending(int next_agent);
  void maybe_update_sacd(int agent_index);
  void append_metrics(int agent_index, const agents::SacdUpdateMetrics& m);
  void append_metrics(int agent_index, const agents::PpoUpdateMetrics& m);
  std::vector<int> compute_order(const env::Observation& obs, Rng& mid_rng);
  void run_eval_point();
  EvalWindow eval_window(const env::Chronic& chronic, int offset,
                         const BaselineRecord& baseline, Rng& mid_rng);

  grid::GridSpec spec_;
  const env::EpisodeSet& episodes_;
  HierarchyConfig hierarchy_;
  agents::HyperParams hyper_;
  std::uint64_t seed_;
  env::Environment::Params env_params_;

  std::vector<LowLevelAgent> agents_;
  MidPolicyEstimate mid_estimate_;
  env::Environment env_;
  Pending pending_;
  int interactions_ = 0;

  Rng windows_rng_;
  Rng mid_rng_;
  std::vector<Rng> action_rng_;
  std::vector<Rng> update_rng_;

  std::vector<BaselineRecord> test_baseline_;
  TrainResult result_;
  std::unique_ptr<std::ofstream> metrics_out_;
};

}  // namespace gridmarl::marl
