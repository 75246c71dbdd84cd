#include "gridmarl/marl/controller.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "gridmarl/nn/encoding.hpp"

namespace gridmarl::marl {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::isacd: return "isacd";
    case Strategy::ippo: return "ippo";
    case Strategy::dsacd: return "dsacd";
    case Strategy::dppo: return "dppo";
    case Strategy::sacd: return "sacd";
    case Strategy::ppo: return "ppo";
  }
  return "unknown";
}

const char* to_string(MidPolicy p) {
  switch (p) {
    case MidPolicy::capa: return "capa";
    case MidPolicy::fixed: return "fixed";
    case MidPolicy::random: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "isacd") return Strategy::isacd;
  if (name == "ippo") return Strategy::ippo;
  if (name == "dsacd") return Strategy::dsacd;
  if (name == "dppo") return Strategy::dppo;
  if (name == "sacd") return Strategy::sacd;
  if (name == "ppo") return Strategy::ppo;
  throw std::invalid_argument("unknown strategy: " + name);
}

MidPolicy parse_mid_policy(const std::string& name) {
  if (name == "capa") return MidPolicy::capa;
  if (name == "fixed") return MidPolicy::fixed;
  if (name == "random") return MidPolicy::random;
  throw std::invalid_argument("unknown mid-level policy: " + name);
}

bool is_sacd_family(Strategy s) {
  return s == Strategy::isacd || s == Strategy::dsacd || s == Strategy::sacd;
}

bool is_dependent(Strategy s) {
  return s == Strategy::dsacd || s == Strategy::dppo;
}

bool is_single_agent(Strategy s) {
  return s == Strategy::sacd || s == Strategy::ppo;
}

LowLevelAgent::LowLevelAgent(SubstationAgentSpec spec, Strategy strategy,
                             int obs_width, const agents::HyperParams& hp,
                             std::uint64_t init_seed)
    : spec_(std::move(spec)) {
  const int n_actions = static_cast<int>(spec_.actions.size());
  if (is_sacd_family(strategy))
    sacd_ = std::make_unique<agents::SacdAgent>(obs_width, n_actions, hp,
                                                init_seed);
  else
    ppo_ = std::make_unique<agents::PpoAgent>(obs_width, n_actions, hp,
                                              init_seed);
}

int LowLevelAgent::select(const nn::GraphBatch& s, Rng& rng, double* log_prob,
                          double* value) {
  if (sacd_) {
    if (log_prob) *log_prob = 0.0;
    if (value) *value = 0.0;
    return sacd_->select_action(s, rng);
  }
  return ppo_->select_action(s, rng, log_prob, value);
}

int LowLevelAgent::greedy(const nn::GraphBatch& s) {
  return sacd_ ? sacd_->greedy_action(s) : ppo_->greedy_action(s);
}

nn::Vector LowLevelAgent::next_state_values(const nn::GraphBatch& batch) {
  return sacd_ ? sacd_->soft_values(batch) : ppo_->state_values(batch);
}

std::vector<BaselineRecord> run_do_nothing_baseline(
    const grid::GridSpec& spec, const env::Environment::Params& env_params,
    const env::EpisodeSet& set, const std::vector<int>& chronic_ids) {
  std::vector<BaselineRecord> records;
  for (const int id : chronic_ids) {
    const auto& chronic = set.chronic(id);
    for (const int offset :
         set.sub_episode_offsets[static_cast<std::size_t>(id)]) {
      env::Environment e(spec, env_params);
      e.reset(chronic, offset, env::kSubEpisodeSteps - 1);
      while (!e.done()) e.step(env::Action::do_nothing());
      records.push_back({id, offset, e.survival_steps(), e.cumulative_cost()});
    }
  }
  return records;
}

Trainer::Trainer(grid::GridSpec spec, const env::EpisodeSet& episodes,
                 HierarchyConfig hierarchy, agents::HyperParams hyper,
                 std::uint64_t seed, env::Environment::Params env_params)
    : spec_(std::move(spec)),
      episodes_(episodes),
      hierarchy_(hierarchy),
      hyper_(hyper),
      seed_(seed),
      env_params_(env_params),
      mid_estimate_(1, hierarchy.laplace_prior),
      env_(spec_, env_params),
      windows_rng_(0),
      mid_rng_(0) {
  hyper_.validate();
  if (hierarchy_.rho_thresh <= 0.0 || hierarchy_.rho_thresh > 1.0)
    throw std::invalid_argument("hierarchy: rho_thresh must be in (0,1]");

  const int obs_width = nn::observation_feature_width(spec_);
  auto specs = build_agent_specs(spec_);
  if (is_single_agent(hierarchy_.strategy)) {
    SubstationAgentSpec single;
    single.agent_index = 0;
    single.substation = -1;
    single.actions = union_action_space(specs);
    specs = {std::move(single)};
  }
  if (specs.empty())
    throw std::invalid_argument("trainer: no controllable substations");

  for (auto& s : specs) {
    Rng init = substream(
        seed_, "init/agent" + std::to_string(s.agent_index));
    const std::uint64_t agent_seed = init.next_u64();
    action_rng_.push_back(substream(
        seed_, "action/agent" + std::to_string(s.agent_index)));
    update_rng_.push_back(substream(
        seed_, "update/agent" + std::to_string(s.agent_index)));
    agents_.emplace_back(std::move(s), hierarchy_.strategy, obs_width, hyper_,
                         agent_seed);
  }

  mid_estimate_ = MidPolicyEstimate(static_cast<int>(agents_.size()),
                                    hierarchy_.laplace_prior);
  mid_estimate_.pin_identity(hierarchy_.pin_mid_identity);
  windows_rng_ = substream(seed_, "windows");
  mid_rng_ = substream(seed_, "mid");

  test_baseline_ = run_do_nothing_baseline(spec_, env_params_, episodes_,
                                           episodes_.test_ids);
}

nn::Vector Trainer::target_row(int agent) const {
  if (is_dependent(hierarchy_.strategy)) return mid_estimate_.row(agent);
  nn::Vector row = nn::Vector::Zero(static_cast<Eigen::Index>(agents_.size()));
  row[agent] = 1.0;
  return row;
}

void Trainer::finalize_pending(int next_agent) {
  if (!pending_.active) return;
  const bool done = pending_.done || next_agent < 0;
  const int next = done ? -1 : next_agent;
  if (next >= 0) mid_estimate_.record(pending_.agent, next);
  // An episode that failed on an uncounted step still ends the last
  // actor's trajectory with the failure reward.
  if (!pending_.done && next_agent < 0 && env_.done() && env_.last_failure())
    pending_.reward = -1.0;

  auto& agent = agents_[static_cast<std::size_t>(pending_.agent)];
  if (agent.is_sacd()) {
    agents::Transition t;
    t.s = std::move(pending_.s);
    t.s_next = std::move(pending_.s_next);
    t.action = pending_.action;
    t.reward = pending_.reward;
    t.done = done;
    t.acting_agent = pending_.agent;
    t.next_agent = next;
    agent.sacd().replay().push(std::move(t));
  } else {
    agents::RolloutEntry e;
    e.s = std::move(pending_.s);
    e.action = pending_.action;
    e.log_prob = pending_.log_prob;
    e.reward = pending_.reward;
    e.value = pending_.value;
    e.done = done;
    e.acting_agent = pending_.agent;
    e.next_agent = next;
    if (!done) {
      const nn::GraphBatch next_enc =
          nn::encode_observation(spec_, pending_.s_next);
      const nn::Vector row = target_row(pending_.agent);
      double bootstrap = 0.0;
      for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) continue;
        bootstrap +=
            row[j] *
            agents_[static_cast<std::size_t>(j)].next_state_values(next_enc)[0];
      }
      e.bootstrap_value = bootstrap;
    }
    agent.ppo().rollout().push(std::move(e));
    agent.rollout_encodings().push_back(std::move(pending_.s_encoded));
    if (agent.ppo().rollout().full()) {
      const auto metrics = agent.ppo().update(
          agent.rollout_encodings(),
          update_rng_[static_cast<std::size_t>(pending_.agent)]);
      agent.rollout_encodings().clear();
      append_metrics(pending_.agent, metrics);
    }
  }
  pending_.active = false;
}

void Trainer::maybe_update_sacd(int agent_index) {
  if (!is_sacd_family(hierarchy_.strategy)) return;
  if (interactions_ < hyper_.update_start_interactions()) return;
  auto& agent = agents_[static_cast<std::size_t>(agent_index)];
  auto& replay = agent.sacd().replay();
  const int batch = hyper_.batch_size;
  if (static_cast<int>(replay.size()) < batch) return;

  const auto idx =
      replay.sample_indices(batch, update_rng_[static_cast<std::size_t>(agent_index)]);
  std::vector<nn::GraphBatch> s_parts, next_parts;
  std::vector<const nn::GraphBatch*> s_ptrs, next_ptrs;
  std::vector<int> actions;
  nn::Vector rewards(batch);
  std::vector<std::uint8_t> done(static_cast<std::size_t>(batch));
  s_parts.reserve(static_cast<std::size_t>(batch));
  next_parts.reserve(static_cast<std::size_t>(batch));
  for (int k = 0; k < batch; ++k) {
    const auto& t = replay.at(static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]));
    s_parts.push_back(nn::encode_observation(spec_, t.s));
    next_parts.push_back(nn::encode_observation(spec_, t.s_next));
    actions.push_back(t.action);
    rewards[k] = t.reward;
    done[static_cast<std::size_t>(k)] = t.done ? 1 : 0;
  }
  for (const auto& p : s_parts) s_ptrs.push_back(&p);
  for (const auto& p : next_parts) next_ptrs.push_back(&p);
  const nn::GraphBatch s_batch = nn::concat_batches(s_ptrs);
  const nn::GraphBatch next_batch = nn::concat_batches(next_ptrs);

  const nn::Vector row = target_row(agent_index);
  nn::Vector v_hat = nn::Vector::Zero(batch);
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (row[j] == 0.0) continue;
    v_hat += row[j] *
             agents_[static_cast<std::size_t>(j)].next_state_values(next_batch);
  }

  nn::Vector targets(batch);
  for (int k = 0; k < batch; ++k)
    targets[k] = done[static_cast<std::size_t>(k)]
                     ? rewards[k]
                     : rewards[k] + hyper_.gamma * v_hat[k];

  const auto metrics = agent.sacd().gradient_step(s_batch, actions, targets);
  append_metrics(agent_index, metrics);
}

void Trainer::append_metrics(int agent_index,
                             const agents::SacdUpdateMetrics& m) {
  if (!metrics_out_ || !m.updated) return;
  *metrics_out_ << interactions_ << ',' << agent_index << ",sacd,"
                << m.critic_loss << ',' << m.actor_loss << ','
                << m.temperature_loss << ',' << m.alpha << ',' << m.entropy
                << '\n';
}

void Trainer::append_metrics(int agent_index,
                             const agents::PpoUpdateMetrics& m) {
  if (!metrics_out_ || !m.updated) return;
  *metrics_out_ << interactions_ << ',' << agent_index << ",ppo,"
                << m.clip_objective << ',' << m.value_loss << ','
                << m.combined_loss << ',' << 0.0 << ',' << m.entropy << '\n';
}

std::vector<int> Trainer::compute_order(const env::Observation& obs,
                                        Rng& mid_rng) {
  std::vector<SubstationAgentSpec> specs;
  specs.reserve(agents_.size());
  for (const auto& a : agents_) specs.push_back(a.spec());
  switch (hierarchy_.mid_policy) {
    case MidPolicy::capa:
      return capa_order(spec_, obs, specs);
    case MidPolicy::fixed:
      return fixed_order(spec_, specs);
    case MidPolicy::random:
      return random_order(specs, mid_rng);
  }
  return {};
}

TrainResult Trainer::run(const TrainOptions& options) {
  result_ = TrainResult();
  interactions_ = 0;
  if (!options.metrics_path.empty()) {
    metrics_out_ = std::make_unique<std::ofstream>(options.metrics_path);
    *metrics_out_ << "interaction,agent,family,loss_a,loss_b,loss_c,alpha,"
                     "entropy\n";
  }

  const auto trace = [&](const TraceEvent& e) {
    if (options.trace) options.trace(e);
  };

  while (interactions_ < options.interaction_budget) {
    const auto& train_ids = episodes_.train_ids;
    const int chronic_id = train_ids[static_cast<std::size_t>(
        windows_rng_.uniform_int(static_cast<int>(train_ids.size())))];
    const auto& offsets =
        episodes_.sub_episode_offsets[static_cast<std::size_t>(chronic_id)];
    const int offset = offsets[static_cast<std::size_t>(
        windows_rng_.uniform_int(static_cast<int>(offsets.size())))];
    env_.reset(episodes_.chronic(chronic_id), offset,
               env::kSubEpisodeSteps - 1);
    result_.episodes += 1;

    while (!env_.done() && interactions_ < options.interaction_budget) {
      const bool unsafe =
          is_unsafe(env_.observation(), hierarchy_.rho_thresh);
      trace({TraceEvent::Kind::gate, env_.observation().timestep, unsafe,
             {}, -1, -1, interactions_});
      if (!unsafe) {
        env_.step(env::Action::do_nothing());
        continue;
      }

      std::vector<int> remaining = compute_order(env_.observation(), mid_rng_);
      trace({TraceEvent::Kind::order, env_.observation().timestep, true,
             remaining, -1, -1, interactions_});
      bool any_env_step = false;

      while (!remaining.empty()) {
        if (env_.done()) break;
        if (hierarchy_.early_exit && any_env_step &&
            !is_unsafe(env_.observation(), hierarchy_.rho_thresh))
          break;
        if (hierarchy_.recompute_order_each_action && any_env_step) {
          const auto fresh = compute_order(env_.observation(), mid_rng_);
          std::vector<int> reordered;
          for (const int a : fresh)
            if (std::find(remaining.begin(), remaining.end(), a) !=
                remaining.end())
              reordered.push_back(a);
          remaining = reordered;
        }
        const int agent_idx = remaining.front();
        remaining.erase(remaining.begin());

        env::Observation s = env_.observation();
        nn::GraphBatch enc = nn::encode_observation(spec_, s);
        double log_prob = 0.0, value = 0.0;
        int a = agents_[static_cast<std::size_t>(agent_idx)].select(
            enc, action_rng_[static_cast<std::size_t>(agent_idx)], &log_prob,
            &value);
        if (options.action_override) a = options.action_override(agent_idx, s, a);
        const env::Action& action =
            agents_[static_cast<std::size_t>(agent_idx)].spec().actions[static_cast<std::size_t>(a)];

        const bool identity =
            action.is_do_nothing() ||
            env_.current_bus_config(action.substation) == action.bus_config;
        if (identity) {
          trace({TraceEvent::Kind::skip, s.timestep, true, {}, agent_idx, a,
                 interactions_});
          continue;
        }

        auto outcome = env_.step(action);
        any_env_step = true;
        finalize_pending(agent_idx);
        pending_.active = true;
        pending_.s = std::move(s);
        pending_.s_next = outcome.obs;
        pending_.s_encoded = std::move(enc);
        pending_.agent = agent_idx;
        pending_.action = a;
        pending_.reward = outcome.reward;
        pending_.done = outcome.done;
        pending_.log_prob = log_prob;
        pending_.value = value;
        interactions_ += 1;
        trace({TraceEvent::Kind::act, outcome.obs.timestep, true, {},
               agent_idx, a, interactions_});

        if (outcome.done) finalize_pending(-1);
        maybe_update_sacd(agent_idx);
        if (options.evaluate && options.eval_period > 0 &&
            interactions_ % options.eval_period == 0)
          run_eval_point();
        if (interactions_ >= options.interaction_budget) break;
      }

      if (!any_env_step && !env_.done()) {
        trace({TraceEvent::Kind::forced_step, env_.observation().timestep,
               true, {}, -1, -1, interactions_});
        env_.step(env::Action::do_nothing());
      }
    }
    finalize_pending(-1);  // episode boundary: mark any tail transition done
  }

  result_.total_interactions = interactions_;
  metrics_out_.reset();
  return result_;
}

void Trainer::run_eval_point() {
  const auto scores = evaluate(episodes_.test_ids);
  ScoreLogRow row;
  row.interaction = interactions_;
  row.window_scores = scores;
  row.mean_score = 0.0;
  for (const double s : scores) row.mean_score += s;
  if (!scores.empty())
    row.mean_score /= static_cast<double>(scores.size());
  result_.score_log.push_back(std::move(row));
}

std::vector<double> Trainer::evaluate(const std::vector<int>& chronic_ids) {
  std::vector<double> scores;
  for (const auto& w : evaluate_detailed(chronic_ids)) scores.push_back(w.score);
  return scores;
}

std::vector<Trainer::EvalWindow> Trainer::evaluate_detailed(
    const std::vector<int>& chronic_ids) {
  const auto baselines = (chronic_ids == episodes_.test_ids)
                             ? test_baseline_
                             : run_do_nothing_baseline(spec_, env_params_,
                                                       episodes_, chronic_ids);
  std::vector<EvalWindow> windows;
  std::size_t b = 0;
  for (const int id : chronic_ids) {
    const auto& chronic = episodes_.chronic(id);
    for (const int offset :
         episodes_.sub_episode_offsets[static_cast<std::size_t>(id)]) {
      Rng mid_rng = substream(
          seed_, "eval-mid/" + std::to_string(interactions_) + "/" +
                     std::to_string(id) + "/" + std::to_string(offset));
      windows.push_back(eval_window(chronic, offset, baselines[b], mid_rng));
      ++b;
    }
  }
  return windows;
}

Trainer::EvalWindow Trainer::eval_window(const env::Chronic& chronic,
                                         int offset,
                                         const BaselineRecord& baseline,
                                         Rng& mid_rng) {
  env::Environment e(spec_, env_params_);
  e.reset(chronic, offset, env::kSubEpisodeSteps - 1);
  while (!e.done()) {
    if (!is_unsafe(e.observation(), hierarchy_.rho_thresh)) {
      e.step(env::Action::do_nothing());
      continue;
    }
    std::vector<int> order = compute_order(e.observation(), mid_rng);
    bool any_env_step = false;
    for (const int agent_idx : order) {
      if (e.done()) break;
      if (hierarchy_.early_exit && any_env_step &&
          !is_unsafe(e.observation(), hierarchy_.rho_thresh))
        break;
      const nn::GraphBatch enc = nn::encode_observation(spec_, e.observation());
      const int a = agents_[static_cast<std::size_t>(agent_idx)].greedy(enc);
      const env::Action& action =
          agents_[static_cast<std::size_t>(agent_idx)].spec().actions[static_cast<std::size_t>(a)];
      const bool identity =
          action.is_do_nothing() ||
          e.current_bus_config(action.substation) == action.bus_config;
      if (identity) continue;
      e.step(action);
      any_env_step = true;
    }
    if (!any_env_step && !e.done()) e.step(env::Action::do_nothing());
  }
  EvalWindow window;
  window.chronic_id = chronic.id;
  window.offset = offset;
  window.survival_steps = e.survival_steps();
  window.cost = e.cumulative_cost();
  window.score = env::l2rpn_score(e.survival_steps(), baseline.survival_steps,
                                  env::kSubEpisodeSteps - 1,
                                  e.cumulative_cost(), baseline.cost);
  return window;
}

}  // namespace gridmarl::marl
