// gridmarl command-line front end.
//
// Subcommands: gen-chronics, train, eval, score, baseline.
// Exit codes: 0 success, 2 usage error, 3 missing file, 4 schema/parse
// violation, 5 run-invariant violation, 6 missing baseline or empty
// trajectory data, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "gridmarl/env/chronics.hpp"
#include "gridmarl/grid/grid_io.hpp"
#include "gridmarl/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace gridmarl;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitSchema = 4;
constexpr int kExitInvariant = 5;
constexpr int kExitMissingData = 6;

struct CliOverrides {
  std::string config_path;
  std::string strategy;
  std::string mid_policy;
  std::string seeds;
  std::string output_dir;
  std::string grid_file;
  std::string chronics_dir;
  int budget = -1;
  int eval_period = -1;
  int workers = -1;
};

void require_file(const std::string& path) {
  if (!fs::exists(path))
    throw fs::filesystem_error("no such file", path,
                               std::make_error_code(std::errc::no_such_file_or_directory));
}

harness::ExperimentConfig load_with_overrides(const CliOverrides& o) {
  require_file(o.config_path);
  harness::ExperimentConfig cfg = harness::load_config(o.config_path);
  if (!o.strategy.empty())
    cfg.hierarchy.strategy = marl::parse_strategy(o.strategy);
  if (!o.mid_policy.empty())
    cfg.hierarchy.mid_policy = marl::parse_mid_policy(o.mid_policy);
  if (!o.seeds.empty()) {
    cfg.seeds.clear();
    std::stringstream ss(o.seeds);
    std::string part;
    while (std::getline(ss, part, ',')) cfg.seeds.push_back(std::stoull(part));
  }
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (!o.grid_file.empty()) cfg.grid_file = o.grid_file;
  if (!o.chronics_dir.empty()) cfg.chronics_dir = o.chronics_dir;
  if (o.budget >= 0) cfg.interaction_budget = o.budget;
  if (o.eval_period >= 0) cfg.eval_period = o.eval_period;
  if (o.workers >= 0) cfg.workers = o.workers;
  return cfg;
}

grid::GridSpec load_grid_checked(const harness::ExperimentConfig& cfg) {
  if (!cfg.grid_file.empty()) require_file(cfg.grid_file);
  return harness::load_grid(cfg);
}

env::EpisodeSet load_chronics_checked(const harness::ExperimentConfig& cfg,
                                      const grid::GridSpec& spec) {
  if (!cfg.chronics_dir.empty())
    require_file((fs::path(cfg.chronics_dir) / "episode_set.json").string());
  return harness::load_or_generate_chronics(cfg, spec);
}

int cmd_gen_chronics(const CliOverrides& o, const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_with_overrides(o);
  const auto spec = load_grid_checked(cfg);
  const auto profile = cfg.resolve_profile(spec);
  const auto set = env::generate_chronics(cfg.chronic_seed, cfg.chronic_count,
                                          cfg.chronic_length, spec, profile);
  std::string dir = !out_dir.empty() ? out_dir
                    : !cfg.chronics_dir.empty()
                        ? cfg.chronics_dir
                        : (fs::path(cfg.resolved_output_dir()) / "chronics")
                              .string();
  env::write_episode_set(dir, set, spec);
  std::printf("wrote %zu chronics (%zu train / %zu test / %zu validation) to %s\n",
              set.chronics.size(), set.train_ids.size(), set.test_ids.size(),
              set.validation_ids.size(), dir.c_str());
  return 0;
}

int cmd_baseline(const CliOverrides& o, const std::string& out_file) {
  harness::ExperimentConfig cfg = load_with_overrides(o);
  const auto spec = load_grid_checked(cfg);
  const auto set = load_chronics_checked(cfg, spec);
  std::vector<int> ids = set.test_ids;
  ids.insert(ids.end(), set.validation_ids.begin(), set.validation_ids.end());
  const auto records =
      marl::run_do_nothing_baseline(spec, cfg.env_params, set, ids);
  const std::string path =
      !out_file.empty()
          ? out_file
          : (fs::path(cfg.resolved_output_dir()) / "baseline.csv").string();
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  harness::write_baseline_csv(path, records);
  for (const auto& r : records)
    std::printf("chronic %d offset %d: do-nothing survives %d steps, cost %.3f\n",
                r.chronic_id, r.offset, r.survival_steps, r.cost);
  std::printf("baseline cache: %s\n", path.c_str());
  return 0;
}

int cmd_train(const CliOverrides& o) {
  harness::ExperimentConfig cfg = load_with_overrides(o);
  cfg.validate();
  const auto spec = load_grid_checked(cfg);
  const auto set = load_chronics_checked(cfg, spec);
  const auto report = harness::train_experiment(cfg, spec, set);
  for (const auto& s : report.seeds) {
    double final_score =
        s.score_log.empty() ? 0.0 : s.score_log.back().mean_score;
    std::printf("seed %llu: %d interactions, %d episodes, final mean score %.2f (%.1fs)\n",
                static_cast<unsigned long long>(s.seed), s.interactions,
                s.episodes, final_score, s.wall_seconds);
  }
  std::printf("report: %s\n", report.report_dir.c_str());
  return 0;
}

int cmd_eval(const CliOverrides& o, const std::string& checkpoint_dir,
             const std::string& split, const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_with_overrides(o);
  const auto spec = load_grid_checked(cfg);
  const auto set = load_chronics_checked(cfg, spec);
  require_file(checkpoint_dir);
  const auto result =
      harness::evaluate_checkpoints(cfg, spec, set, checkpoint_dir, split);
  const fs::path dir =
      out_dir.empty() ? fs::path(checkpoint_dir) : fs::path(out_dir);
  fs::create_directories(dir);
  harness::write_trajectories_csv((dir / "trajectories.csv").string(),
                                  result.trajectories);
  std::FILE* f = std::fopen((dir / "eval_scores.csv").string().c_str(), "w");
  std::fputs("chronic_id,offset,score\n", f);
  double mean = 0.0;
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    std::fprintf(f, "%d,%d,%.17g\n", result.trajectories[i].chronic_id,
                 result.trajectories[i].offset, result.scores[i]);
    mean += result.scores[i];
  }
  std::fclose(f);
  mean /= result.scores.empty() ? 1.0 : static_cast<double>(result.scores.size());
  std::printf("%s mean score over %zu windows: %.2f\n", split.c_str(),
              result.scores.size(), mean);
  return 0;
}

int cmd_score(const std::string& trajectories_path,
              const std::string& baseline_path, const std::string& out_file) {
  require_file(trajectories_path);
  require_file(baseline_path);
  const auto trajectories = harness::read_trajectories_csv(trajectories_path);
  const auto baseline = harness::read_baseline_csv(baseline_path);
  if (trajectories.empty()) {
    std::fprintf(stderr, "score: no trajectories in %s\n",
                 trajectories_path.c_str());
    return kExitMissingData;
  }
  if (baseline.empty()) {
    std::fprintf(stderr, "score: baseline cache %s is empty\n",
                 baseline_path.c_str());
    return kExitMissingData;
  }
  std::vector<double> scores;
  try {
    scores = harness::score_trajectories(trajectories, baseline);
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitMissingData;
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::printf("chronic %d offset %d: score %.2f\n",
                trajectories[i].chronic_id, trajectories[i].offset, scores[i]);
    mean += scores[i];
  }
  std::printf("mean score: %.2f\n", mean / static_cast<double>(scores.size()));
  if (!out_file.empty()) {
    std::FILE* f = std::fopen(out_file.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + out_file);
    std::fputs("chronic_id,offset,score\n", f);
    for (std::size_t i = 0; i < scores.size(); ++i)
      std::fprintf(f, "%d,%d,%.17g\n", trajectories[i].chronic_id,
                   trajectories[i].offset, scores[i]);
    std::fclose(f);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical multi-agent RL for power-grid topology control"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string out_path, checkpoint_dir, split = "test";
  std::string trajectories_path, baseline_path;

  auto add_common = [&](CLI::App* sub, bool with_run_flags) {
    sub->add_option("--config", o.config_path, "experiment config file")
        ->required();
    sub->add_option("--grid", o.grid_file, "grid description file");
    sub->add_option("--chronics-dir", o.chronics_dir,
                    "directory with episode_set.json");
    if (with_run_flags) {
      sub->add_option("--strategy", o.strategy,
                      "isacd|ippo|dsacd|dppo|sacd|ppo");
      sub->add_option("--mid-policy", o.mid_policy, "capa|fixed|random");
      sub->add_option("--seeds", o.seeds, "comma-separated seed list");
      sub->add_option("--budget", o.budget, "interaction budget");
      sub->add_option("--eval-period", o.eval_period, "eval period");
      sub->add_option("--output-dir", o.output_dir, "output directory");
      sub->add_option("--workers", o.workers, "parallel seed workers");
    }
  };

  auto* gen = app.add_subcommand("gen-chronics",
                                 "generate a synthetic episode set");
  add_common(gen, false);
  gen->add_option("--out", out_path, "target directory");

  auto* baseline =
      app.add_subcommand("baseline", "cache do-nothing survival and cost");
  add_common(baseline, false);
  baseline->add_option("--out", out_path, "baseline csv path");

  auto* train = app.add_subcommand("train", "train one strategy across seeds");
  add_common(train, true);

  auto* eval = app.add_subcommand("eval", "evaluate a stored checkpoint");
  add_common(eval, true);
  eval->add_option("--checkpoint-dir", checkpoint_dir, "seed directory")
      ->required();
  eval->add_option("--split", split, "test|validation");
  eval->add_option("--out", out_path, "output directory");

  auto* score =
      app.add_subcommand("score", "recompute scores from stored trajectories");
  score->add_option("--trajectories", trajectories_path, "trajectories.csv")
      ->required();
  score->add_option("--baseline", baseline_path, "baseline cache csv")
      ->required();
  score->add_option("--out", out_path, "scores csv path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_chronics(o, out_path);
    if (baseline->parsed()) return cmd_baseline(o, out_path);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o, checkpoint_dir, split, out_path);
    if (score->parsed())
      return cmd_score(trajectories_path, baseline_path, out_path);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitMissingFile;
  } catch (const harness::ConfigInvariantError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitSchema;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    const std::string msg = e.what();
    if (msg.find("cannot open") != std::string::npos) return kExitMissingFile;
    return 1;
  }
  return kExitUsage;
}
