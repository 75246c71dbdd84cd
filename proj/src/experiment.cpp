#include "gridmarl/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gridmarl/grid/grid_io.hpp"
#include "gridmarl/nn/checkpoint.hpp"

namespace gridmarl::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json hyper_to_json(const agents::HyperParams& hp) {
  return {{"gamma", hp.gamma},
          {"learning_rate", hp.learning_rate},
          {"batch_size", hp.batch_size},
          {"update_start", hp.update_start_thousands},
          {"target_entropy_scale", hp.target_entropy_scale},
          {"tau", hp.tau},
          {"initial_alpha", hp.initial_alpha},
          {"twin_critics", hp.twin_critics},
          {"replay_capacity", hp.replay_capacity},
          {"minibatches", hp.minibatches},
          {"minibatch_size", hp.minibatch_size},
          {"ppo_epochs", hp.ppo_epochs},
          {"clip_epsilon", hp.clip_epsilon},
          {"vf_coeff", hp.vf_coeff},
          {"entropy_coeff", hp.entropy_coeff},
          {"gae_lambda", hp.gae_lambda},
          {"normalize_advantages", hp.normalize_advantages},
          {"rho_thresh", hp.rho_thresh},
          {"gnn_width", hp.gnn_width}};
}

std::vector<std::pair<std::string, const nn::ParameterSet*>> agent_sets_const(
    marl::LowLevelAgent& agent) {
  if (agent.is_sacd()) {
    auto& net = agent.sacd().network();
    return {{"shared", &net.shared},
            {"actor", &net.actor},
            {"critic", &net.critic},
            {"target_shared", &net.target_shared},
            {"target_critic", &net.target_critic},
            {"temperature", &agent.sacd().temperature()}};
  }
  auto& net = agent.ppo().network();
  return {{"actor", &net.actor}, {"critic", &net.critic}};
}

std::vector<std::pair<std::string, nn::ParameterSet*>> agent_sets_mutable(
    marl::LowLevelAgent& agent) {
  if (agent.is_sacd()) {
    auto& net = agent.sacd().network();
    return {{"shared", &net.shared},
            {"actor", &net.actor},
            {"critic", &net.critic},
            {"target_shared", &net.target_shared},
            {"target_critic", &net.target_critic},
            {"temperature", &agent.sacd().temperature()}};
  }
  auto& net = agent.ppo().network();
  return {{"actor", &net.actor}, {"critic", &net.critic}};
}

void write_score_csv(const std::string& path,
                     const std::vector<marl::ScoreLogRow>& rows,
                     const std::string& strategy, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write score log: " + path);
  const std::size_t windows = rows.empty() ? 0 : rows[0].window_scores.size();
  out << "interaction,mean_score";
  for (std::size_t w = 0; w < windows; ++w) out << ",score_" << w;
  out << ",strategy,seed\n";
  for (const auto& row : rows) {
    out << row.interaction << ',' << fmt_double(row.mean_score);
    for (const double s : row.window_scores) out << ',' << fmt_double(s);
    out << ',' << strategy << ',' << seed << '\n';
  }
}

SeedRunOutput run_one_seed(const ExperimentConfig& cfg,
                           const grid::GridSpec& spec,
                           const env::EpisodeSet& episodes,
                           const agents::HyperParams& hyper,
                           std::uint64_t seed, const fs::path& run_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  marl::Trainer trainer(spec, episodes, cfg.hierarchy, hyper, seed,
                        cfg.env_params);
  marl::TrainOptions options;
  options.interaction_budget = cfg.interaction_budget;
  options.eval_period = cfg.eval_period;
  const fs::path seed_dir = run_dir / ("seed_" + std::to_string(seed));
  fs::create_directories(seed_dir);
  if (cfg.write_metrics)
    options.metrics_path = (seed_dir / "metrics.csv").string();

  const auto result = trainer.run(options);

  SeedRunOutput out;
  out.seed = seed;
  out.score_log = result.score_log;
  out.episodes = result.episodes;
  out.interactions = result.total_interactions;
  out.score_csv_path = (seed_dir / "scores.csv").string();
  write_score_csv(out.score_csv_path, result.score_log,
                  marl::to_string(cfg.hierarchy.strategy), seed);

  for (auto& agent : trainer.agents()) {
    const std::string file =
        (seed_dir /
         ("agent_" + std::to_string(agent.spec().agent_index) + ".ckpt"))
            .string();
    nlohmann::json meta;
    meta["agent_index"] = agent.spec().agent_index;
    meta["substation"] = agent.spec().substation;
    meta["n_actions"] = agent.spec().actions.size();
    meta["strategy"] = marl::to_string(cfg.hierarchy.strategy);
    meta["seed"] = seed;
    meta["hyperparams"] = hyper_to_json(hyper);
    nn::save_checkpoint(file, agent_sets_const(agent), meta);
    out.checkpoint_paths.push_back(file);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace

AggregateCurves aggregate_report(
    const std::vector<std::vector<marl::ScoreLogRow>>& per_seed) {
  if (per_seed.empty())
    throw std::invalid_argument("aggregate_report: no seed logs");
  const std::size_t points = per_seed[0].size();
  for (const auto& log : per_seed) {
    if (log.size() != points)
      throw std::invalid_argument("aggregate_report: misaligned logs");
    for (std::size_t i = 0; i < points; ++i)
      if (log[i].interaction != per_seed[0][i].interaction)
        throw std::invalid_argument("aggregate_report: misaligned eval points");
  }
  AggregateCurves curves;
  const auto n = static_cast<double>(per_seed.size());
  for (std::size_t i = 0; i < points; ++i) {
    double mean = 0.0;
    for (const auto& log : per_seed) mean += log[i].mean_score;
    mean /= n;
    double var = 0.0;
    for (const auto& log : per_seed)
      var += (log[i].mean_score - mean) * (log[i].mean_score - mean);
    const double se =
        per_seed.size() > 1 ? std::sqrt(var / (n - 1.0)) / std::sqrt(n) : 0.0;
    curves.interactions.push_back(per_seed[0][i].interaction);
    curves.mean.push_back(mean);
    curves.standard_error.push_back(se);
  }
  return curves;
}

grid::GridSpec load_grid(const ExperimentConfig& cfg) {
  return cfg.grid_file.empty() ? grid::make_case5()
                               : grid::load_grid_file(cfg.grid_file);
}

env::EpisodeSet load_or_generate_chronics(const ExperimentConfig& cfg,
                                          const grid::GridSpec& spec) {
  if (!cfg.chronics_dir.empty())
    return env::load_episode_set(
        (fs::path(cfg.chronics_dir) / "episode_set.json").string(), spec);
  return env::generate_chronics(cfg.chronic_seed, cfg.chronic_count,
                                cfg.chronic_length, spec,
                                cfg.resolve_profile(spec));
}

RunReport train_experiment(const ExperimentConfig& cfg,
                           const grid::GridSpec& spec,
                           const env::EpisodeSet& episodes) {
  cfg.validate();
  const agents::HyperParams hyper = cfg.resolve_hyper();
  const fs::path run_dir =
      fs::path(cfg.resolved_output_dir()) /
      (std::string(marl::to_string(cfg.hierarchy.strategy)) + "-" +
       marl::to_string(cfg.hierarchy.mid_policy));
  fs::create_directories(run_dir);

  RunReport report;
  report.report_dir = run_dir.string();
  report.seeds.resize(cfg.seeds.size());

  int workers = cfg.workers > 0
                    ? cfg.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers,
                                      static_cast<int>(cfg.seeds.size())));

  std::mutex index_mutex;
  std::size_t next_index = 0;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(index_mutex);
        if (next_index >= cfg.seeds.size() || first_error) return;
        index = next_index++;
      }
      try {
        report.seeds[index] = run_one_seed(cfg, spec, episodes, hyper,
                                           cfg.seeds[index], run_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(index_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<std::vector<marl::ScoreLogRow>> logs;
  for (const auto& s : report.seeds) logs.push_back(s.score_log);
  report.curves = aggregate_report(logs);

  std::ofstream mean_out(run_dir / "scores_mean.csv");
  mean_out << "interaction,mean_score,standard_error\n";
  for (std::size_t i = 0; i < report.curves.interactions.size(); ++i)
    mean_out << report.curves.interactions[i] << ','
             << fmt_double(report.curves.mean[i]) << ','
             << fmt_double(report.curves.standard_error[i]) << '\n';

  nlohmann::json meta;
  meta["strategy"] = marl::to_string(cfg.hierarchy.strategy);
  meta["mid_policy"] = marl::to_string(cfg.hierarchy.mid_policy);
  meta["rho_thresh"] = cfg.hierarchy.rho_thresh;
  meta["hyperparams"] = hyper_to_json(hyper);
  meta["interaction_budget"] = cfg.interaction_budget;
  meta["eval_period"] = cfg.eval_period;
  meta["seeds"] = cfg.seeds;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& s : report.seeds)
    per_seed.push_back({{"seed", s.seed},
                        {"wall_seconds", s.wall_seconds},
                        {"episodes", s.episodes},
                        {"interactions", s.interactions},
                        {"score_log", s.score_csv_path},
                        {"checkpoints", s.checkpoint_paths}});
  meta["runs"] = per_seed;
  std::ofstream meta_out(run_dir / "run_meta.json");
  meta_out << meta.dump(2) << "\n";

  return report;
}

void write_baseline_csv(const std::string& path,
                        const std::vector<marl::BaselineRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write baseline cache: " + path);
  out << "chronic_id,offset,survival_steps,cost\n";
  for (const auto& r : records)
    out << r.chronic_id << ',' << r.offset << ',' << r.survival_steps << ','
        << fmt_double(r.cost) << '\n';
}

std::vector<marl::BaselineRecord> read_baseline_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open baseline cache: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "chronic_id,offset,survival_steps,cost")
    throw std::runtime_error("baseline cache: bad header in " + path);
  std::vector<marl::BaselineRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    marl::BaselineRecord r;
    std::getline(ss, cell, ','); r.chronic_id = std::stoi(cell);
    std::getline(ss, cell, ','); r.offset = std::stoi(cell);
    std::getline(ss, cell, ','); r.survival_steps = std::stoi(cell);
    std::getline(ss, cell, ','); r.cost = std::stod(cell);
    records.push_back(r);
  }
  return records;
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectories: " + path);
  out << "chronic_id,offset,survival_steps,cost\n";
  for (const auto& r : records)
    out << r.chronic_id << ',' << r.offset << ',' << r.survival_steps << ','
        << fmt_double(r.cost) << '\n';
}

std::vector<TrajectoryRecord> read_trajectories_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectories: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "chronic_id,offset,survival_steps,cost")
    throw std::runtime_error("trajectories: bad header in " + path);
  std::vector<TrajectoryRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    TrajectoryRecord r;
    std::getline(ss, cell, ','); r.chronic_id = std::stoi(cell);
    std::getline(ss, cell, ','); r.offset = std::stoi(cell);
    std::getline(ss, cell, ','); r.survival_steps = std::stoi(cell);
    std::getline(ss, cell, ','); r.cost = std::stod(cell);
    records.push_back(r);
  }
  return records;
}

EvalOutput evaluate_checkpoints(const ExperimentConfig& cfg,
                                const grid::GridSpec& spec,
                                const env::EpisodeSet& episodes,
                                const std::string& seed_dir,
                                const std::string& split) {
  const agents::HyperParams hyper = cfg.resolve_hyper();
  // Seed is recovered from the first checkpoint's metadata.
  marl::Trainer trainer(spec, episodes, cfg.hierarchy, hyper, 0,
                        cfg.env_params);
  std::uint64_t seed = 0;
  for (auto& agent : trainer.agents()) {
    const std::string file =
        (fs::path(seed_dir) /
         ("agent_" + std::to_string(agent.spec().agent_index) + ".ckpt"))
            .string();
    const auto meta = nn::load_checkpoint(file, agent_sets_mutable(agent));
    seed = meta.value("seed", 0ULL);
    if (meta.value("strategy", "") !=
        std::string(marl::to_string(cfg.hierarchy.strategy)))
      throw std::runtime_error("checkpoint strategy mismatch in " + file);
  }
  (void)seed;

  const std::vector<int>& ids =
      split == "validation" ? episodes.validation_ids : episodes.test_ids;
  EvalOutput out;
  for (const auto& w : trainer.evaluate_detailed(ids)) {
    out.scores.push_back(w.score);
    out.trajectories.push_back(
        {w.chronic_id, w.offset, w.survival_steps, w.cost});
  }
  return out;
}

std::vector<double> score_trajectories(
    const std::vector<TrajectoryRecord>& trajectories,
    const std::vector<marl::BaselineRecord>& baseline) {
  std::vector<double> scores;
  for (const auto& t : trajectories) {
    const marl::BaselineRecord* match = nullptr;
    for (const auto& b : baseline)
      if (b.chronic_id == t.chronic_id && b.offset == t.offset) match = &b;
    if (!match)
      throw std::runtime_error(
          "score: no baseline entry for chronic " +
          std::to_string(t.chronic_id) + " offset " + std::to_string(t.offset));
    scores.push_back(env::l2rpn_score(t.survival_steps, match->survival_steps,
                                      env::kSubEpisodeSteps - 1, t.cost,
                                      match->cost));
  }
  return scores;
}

}  // namespace gridmarl::harness
