#include "gridmarl/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gridmarl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

std::string preset_for_strategy(marl::Strategy s) {
  switch (s) {
    case marl::Strategy::ppo: return "ppo";
    case marl::Strategy::sacd: return "sacd";
    case marl::Strategy::ippo:
    case marl::Strategy::dppo: return "mappo";
    case marl::Strategy::isacd:
    case marl::Strategy::dsacd: return "masacd";
  }
  return "masacd";
}

agents::HyperParams preset_named(const std::string& name) {
  if (name == "ppo") return agents::HyperParams::table_ppo();
  if (name == "mappo") return agents::HyperParams::table_mappo();
  if (name == "sacd") return agents::HyperParams::table_sacd();
  if (name == "masacd") return agents::HyperParams::table_masacd();
  throw std::invalid_argument("config: unknown preset: " + name);
}

agents::HyperParams ExperimentConfig::resolve_hyper() const {
  agents::HyperParams hp = preset_named(
      preset.empty() ? preset_for_strategy(hierarchy.strategy) : preset);
  for (const auto& [key, value] : algo_overrides) {
    if (key == "gamma") hp.gamma = std::stod(value);
    else if (key == "learning_rate") hp.learning_rate = std::stod(value);
    else if (key == "batch_size") hp.batch_size = std::stoi(value);
    else if (key == "update_start") hp.update_start_thousands = std::stod(value);
    else if (key == "target_entropy_scale") hp.target_entropy_scale = std::stod(value);
    else if (key == "tau") hp.tau = std::stod(value);
    else if (key == "initial_alpha") hp.initial_alpha = std::stod(value);
    else if (key == "twin_critics") hp.twin_critics = parse_bool(value, key);
    else if (key == "replay_capacity") hp.replay_capacity = std::stoi(value);
    else if (key == "minibatches") hp.minibatches = std::stoi(value);
    else if (key == "minibatch_size") hp.minibatch_size = std::stoi(value);
    else if (key == "ppo_epochs") hp.ppo_epochs = std::stoi(value);
    else if (key == "clip_epsilon") hp.clip_epsilon = std::stod(value);
    else if (key == "vf_coeff") hp.vf_coeff = std::stod(value);
    else if (key == "entropy_coeff") hp.entropy_coeff = std::stod(value);
    else if (key == "gae_lambda") hp.gae_lambda = std::stod(value);
    else if (key == "normalize_advantages") hp.normalize_advantages = parse_bool(value, key);
    else if (key == "gnn_width") hp.gnn_width = std::stoi(value);
    else if (key == "preset") { /* handled at load */ }
    else
      throw std::invalid_argument("config: unknown [algo] key: " + key);
  }
  hp.rho_thresh = hierarchy.rho_thresh;
  hp.validate();
  return hp;
}

env::ChronicProfile ExperimentConfig::resolve_profile(
    const grid::GridSpec& spec) const {
  env::ChronicProfile profile = profile_name == "calm"
                                    ? env::calm_profile(spec)
                                    : env::default_profile(spec);
  for (const auto& [key, value] : profile_overrides) {
    if (key == "base_load_mw") {
      profile.base_load_mw.clear();
      for (const auto& part : split(value, ','))
        profile.base_load_mw.push_back(std::stod(part));
    } else if (key == "daily_amplitude") profile.daily_amplitude = std::stod(value);
    else if (key == "noise_scale") profile.noise_scale = std::stod(value);
    else if (key == "noise_persistence") profile.noise_persistence = std::stod(value);
    else if (key == "spikes_per_day") profile.spikes_per_day = std::stod(value);
    else if (key == "spike_magnitude_min") profile.spike_magnitude_min = std::stod(value);
    else if (key == "spike_magnitude_max") profile.spike_magnitude_max = std::stod(value);
    else if (key == "spike_duration_min") profile.spike_duration_min = std::stoi(value);
    else if (key == "spike_duration_max") profile.spike_duration_max = std::stoi(value);
    else if (key == "dispatch_share_min") profile.dispatch_share_min = std::stod(value);
    else if (key == "dispatch_share_max") profile.dispatch_share_max = std::stod(value);
    else if (key == "dispatch_drift") profile.dispatch_drift = std::stod(value);
    else if (key == "max_loss_fraction") profile.max_loss_fraction = std::stod(value);
    else
      throw std::invalid_argument("config: unknown profile key: " + key);
  }
  profile.validate(spec);
  return profile;
}

std::string ExperimentConfig::resolved_output_dir() const {
  namespace fs = std::filesystem;
  fs::path out(output_dir);
  if (out.is_absolute()) return out.string();
  if (const char* root = std::getenv("GRIDMARL_OUTPUT_ROOT"))
    return (fs::path(root) / out).string();
  return out.string();
}

void ExperimentConfig::validate() const {
  if (seeds.empty())
    throw ConfigInvariantError("config: seed list must be nonempty");
  if (interaction_budget <= 0)
    throw ConfigInvariantError("config: interaction budget must be > 0");
  if (eval_period <= 0 || interaction_budget % eval_period != 0)
    throw ConfigInvariantError(
        "config: eval period must divide the interaction budget");
  resolve_hyper();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: bad section at line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "hierarchy" && section != "algo" &&
          section != "run")
        throw std::invalid_argument("config: unknown section [" + section +
                                    "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "env") {
      if (key == "grid_file") cfg.grid_file = value;
      else if (key == "chronics_dir") cfg.chronics_dir = value;
      else if (key == "seed") cfg.chronic_seed = std::stoull(value);
      else if (key == "count") cfg.chronic_count = std::stoi(value);
      else if (key == "length") cfg.chronic_length = std::stoi(value);
      else if (key == "profile") cfg.profile_name = value;
      else if (key == "rho_soft") cfg.env_params.rho_soft = std::stod(value);
      else if (key == "loss_penalty_coeff")
        cfg.env_params.loss_penalty_coeff = std::stod(value);
      else if (key == "reward_floor")
        cfg.env_params.reward_floor = std::stod(value);
      else if (key == "hard_overflow")
        cfg.env_params.overload.hard_overflow = std::stod(value);
      else if (key == "soft_overflow_steps")
        cfg.env_params.overload.soft_overflow_steps = std::stoi(value);
      else if (key == "reconnect_delay")
        cfg.env_params.overload.reconnect_delay = std::stoi(value);
      else
        cfg.profile_overrides.emplace_back(key, value);
    } else if (section == "hierarchy") {
      if (key == "strategy")
        cfg.hierarchy.strategy = marl::parse_strategy(value);
      else if (key == "mid_policy")
        cfg.hierarchy.mid_policy = marl::parse_mid_policy(value);
      else if (key == "rho_thresh")
        cfg.hierarchy.rho_thresh = std::stod(value);
      else if (key == "early_exit")
        cfg.hierarchy.early_exit = parse_bool(value, key);
      else if (key == "recompute_order_each_action")
        cfg.hierarchy.recompute_order_each_action = parse_bool(value, key);
      else if (key == "laplace_prior")
        cfg.hierarchy.laplace_prior = std::stod(value);
      else if (key == "pin_mid_identity")
        cfg.hierarchy.pin_mid_identity = parse_bool(value, key);
      else
        throw std::invalid_argument("config: unknown [hierarchy] key: " + key);
    } else if (section == "algo") {
      if (key == "preset") cfg.preset = value;
      else cfg.algo_overrides.emplace_back(key, value);
    } else if (section == "run") {
      if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& part : split(value, ','))
          cfg.seeds.push_back(std::stoull(part));
      } else if (key == "interaction_budget")
        cfg.interaction_budget = std::stoi(value);
      else if (key == "eval_period") cfg.eval_period = std::stoi(value);
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "workers") cfg.workers = std::stoi(value);
      else if (key == "write_metrics") cfg.write_metrics = parse_bool(value, key);
      else
        throw std::invalid_argument("config: unknown [run] key: " + key);
    } else {
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace gridmarl::harness
