#include "gridmarl/env/chronics.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gridmarl/util/rng.hpp"

namespace gridmarl::env {

namespace {
constexpr int kStepsPerDay = 288;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

void ChronicProfile::validate(const grid::GridSpec& spec) const {
  if (static_cast<int>(base_load_mw.size()) != spec.n_loads())
    throw std::invalid_argument("chronic profile: base_load_mw size mismatch");
  for (const double b : base_load_mw)
    if (b < 0.0)
      throw std::invalid_argument("chronic profile: negative base load");
  if (daily_amplitude < 0.0 || noise_scale < 0.0 || spikes_per_day < 0.0)
    throw std::invalid_argument("chronic profile: negative amplitude");
  if (spike_magnitude_min < 1.0 || spike_magnitude_max < spike_magnitude_min)
    throw std::invalid_argument("chronic profile: bad spike magnitudes");
  if (spike_duration_min < 1 || spike_duration_max < spike_duration_min)
    throw std::invalid_argument("chronic profile: bad spike durations");
  if (spike_ramp_steps < 0)
    throw std::invalid_argument("chronic profile: negative ramp");
  if (noise_persistence < 0.0 || noise_persistence >= 1.0)
    throw std::invalid_argument("chronic profile: persistence must be in [0,1)");
}

ChronicProfile default_profile(const grid::GridSpec& spec) {
  ChronicProfile p;
  p.base_load_mw.assign(static_cast<std::size_t>(spec.n_loads()), 10.0);
  if (spec.n_loads() == 3) p.base_load_mw = {20.0, 13.0, 10.0};
  return p;
}

ChronicProfile calm_profile(const grid::GridSpec& spec) {
  ChronicProfile p = default_profile(spec);
  p.spikes_per_day = 0.0;
  p.noise_scale = 0.005;
  p.daily_amplitude = 0.15;
  return p;
}

std::vector<int> sub_episode_offsets(int chronic_length) {
  std::vector<int> offsets;
  const int span = chronic_length - kSubEpisodeSteps;
  for (int k = 0; k < kSubEpisodesPerChronic; ++k)
    offsets.push_back(span * k / (kSubEpisodesPerChronic - 1));
  return offsets;
}

EpisodeSet generate_chronics(std::uint64_t seed, int count, int length,
                             const grid::GridSpec& spec,
                             const ChronicProfile& profile) {
  profile.validate(spec);
  if (count < 1 || length < kSubEpisodeSteps)
    throw std::invalid_argument("generate_chronics: bad count or length");

  EpisodeSet set;
  const int n_loads = spec.n_loads();
  const int n_gens = spec.n_generators();
  const double days = static_cast<double>(length) / kStepsPerDay;

  for (int c = 0; c < count; ++c) {
    Rng rng = substream(seed, "chronics/" + std::to_string(c));
    Chronic chronic;
    chronic.id = c;
    chronic.load_mw = Eigen::MatrixXd::Zero(length, n_loads);
    chronic.gen_mw = Eigen::MatrixXd::Zero(length, n_gens);

    std::vector<double> phase(static_cast<std::size_t>(n_loads));
    for (auto& ph : phase) ph = rng.uniform(-0.12, 0.12);

    // Stress events: a global demand multiplier over random windows, with a
    // linear ramp in and out so loadings cross the alarm threshold before
    // the protection thresholds.
    Eigen::VectorXd stress = Eigen::VectorXd::Ones(length);
    const int n_events = static_cast<int>(std::floor(
        profile.spikes_per_day * days + rng.uniform()));
    for (int e = 0; e < n_events; ++e) {
      const int start = rng.uniform_int(length);
      const int duration = profile.spike_duration_min +
                           rng.uniform_int(profile.spike_duration_max -
                                           profile.spike_duration_min + 1);
      const double magnitude = rng.uniform(profile.spike_magnitude_min,
                                           profile.spike_magnitude_max);
      const int ramp = std::max(1, profile.spike_ramp_steps);
      for (int k = 0; k < duration + ramp; ++k) {
        const int t = start + k;
        if (t < 0 || t >= length) continue;
        double level = magnitude;
        if (k < ramp)
          level = 1.0 + (magnitude - 1.0) * (k + 1) / static_cast<double>(ramp);
        else if (k >= duration)
          level = 1.0 + (magnitude - 1.0) * (duration + ramp - k) /
                            static_cast<double>(ramp);
        stress[t] = std::max(stress[t], level);
      }
    }

    std::vector<double> ar(static_cast<std::size_t>(n_loads), 0.0);
    double share = rng.uniform(profile.dispatch_share_min,
                               profile.dispatch_share_max);
    for (int t = 0; t < length; ++t) {
      double total = 0.0;
      for (int i = 0; i < n_loads; ++i) {
        auto& noise = ar[static_cast<std::size_t>(i)];
        noise = profile.noise_persistence * noise +
                profile.noise_scale * rng.normal();
        const double daily =
            1.0 + profile.daily_amplitude *
                      std::sin(kTwoPi * (static_cast<double>(t) / kStepsPerDay +
                                         phase[static_cast<std::size_t>(i)]));
        const double mw = std::max(
            0.0, profile.base_load_mw[static_cast<std::size_t>(i)] * daily *
                     (1.0 + noise) * stress[t]);
        chronic.load_mw(t, i) = mw;
        total += mw;
      }
      // Dispatch tracks total demand, split by a slowly drifting share and
      // clipped at p_max; any clipped remainder moves to the other units.
      share = std::clamp(share + profile.dispatch_drift * rng.normal(),
                         profile.dispatch_share_min, profile.dispatch_share_max);
      if (n_gens == 1) {
        chronic.gen_mw(t, 0) =
            std::min(total, spec.generators[0].p_max_mw);
      } else if (n_gens >= 2) {
        double g0 = std::min(share * total, spec.generators[0].p_max_mw);
        double rest = total - g0;
        for (int gi = 1; gi < n_gens; ++gi) {
          const double take =
              std::min(rest / static_cast<double>(n_gens - gi),
                       spec.generators[static_cast<std::size_t>(gi)].p_max_mw);
          chronic.gen_mw(t, gi) = take;
          rest -= take;
        }
        chronic.gen_mw(t, 0) = std::min(g0 + std::max(0.0, rest),
                                        spec.generators[0].p_max_mw);
      }
    }
    set.chronics.push_back(std::move(chronic));
    set.sub_episode_offsets.push_back(sub_episode_offsets(length));
  }

  // Split in id order: the last two chronics are test and validation.
  for (int c = 0; c < count; ++c) {
    if (count >= 3 && c == count - 2)
      set.test_ids.push_back(c);
    else if (count >= 3 && c == count - 1)
      set.validation_ids.push_back(c);
    else
      set.train_ids.push_back(c);
  }
  return set;
}

void write_chronic_csv(const std::string& path, const Chronic& chronic,
                       const grid::GridSpec& spec) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write chronic file: " + path);
  std::fputs("timestep", f);
  for (const auto& load : spec.loads) std::fprintf(f, ",load_%d_mw", load.id);
  for (const auto& gen : spec.generators) std::fprintf(f, ",gen_%d_mw", gen.id);
  std::fputc('\n', f);
  for (int t = 0; t < chronic.length(); ++t) {
    std::fprintf(f, "%d", t);
    for (int i = 0; i < chronic.load_mw.cols(); ++i)
      std::fprintf(f, ",%.17g", chronic.load_mw(t, i));
    for (int i = 0; i < chronic.gen_mw.cols(); ++i)
      std::fprintf(f, ",%.17g", chronic.gen_mw(t, i));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Chronic read_chronic_csv(const std::string& path, const grid::GridSpec& spec,
                         int id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chronic file: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("chronic file empty: " + path);

  std::string expected = "timestep";
  for (const auto& load : spec.loads)
    expected += ",load_" + std::to_string(load.id) + "_mw";
  for (const auto& gen : spec.generators)
    expected += ",gen_" + std::to_string(gen.id) + "_mw";
  if (header != expected)
    throw std::runtime_error("chronic file header mismatch: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) !=
        1 + spec.n_loads() + spec.n_generators())
      throw std::runtime_error("chronic file row width mismatch: " + path);
    rows.push_back(std::move(row));
  }

  Chronic chronic;
  chronic.id = id;
  const int length = static_cast<int>(rows.size());
  chronic.load_mw = Eigen::MatrixXd(length, spec.n_loads());
  chronic.gen_mw = Eigen::MatrixXd(length, spec.n_generators());
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < spec.n_loads(); ++i)
      chronic.load_mw(t, i) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(1 + i)];
    for (int i = 0; i < spec.n_generators(); ++i)
      chronic.gen_mw(t, i) =
          rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(1 + spec.n_loads() + i)];
  }
  return chronic;
}

void write_episode_set(const std::string& directory, const EpisodeSet& set,
                       const grid::GridSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["step_minutes"] = Chronic::kStepMinutes;
  manifest["chronics"] = nlohmann::json::array();

  auto split_of = [&](int id) -> std::string {
    for (const int t : set.test_ids)
      if (t == id) return "test";
    for (const int v : set.validation_ids)
      if (v == id) return "validation";
    return "train";
  };

  for (std::size_t c = 0; c < set.chronics.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof(name), "chronic_%02d.csv",
                  set.chronics[c].id);
    write_chronic_csv((fs::path(directory) / name).string(), set.chronics[c],
                      spec);
    manifest["chronics"].push_back(
        {{"id", set.chronics[c].id},
         {"file", name},
         {"split", split_of(set.chronics[c].id)},
         {"offsets", set.sub_episode_offsets[c]}});
  }
  std::ofstream out(fs::path(directory) / "episode_set.json");
  out << manifest.dump(2) << "\n";
}

EpisodeSet load_episode_set(const std::string& manifest_path,
                            const grid::GridSpec& spec) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("cannot open episode-set manifest: " +
                             manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.value("version", 0) != 1)
    throw std::runtime_error("episode-set manifest: unsupported version");

  const fs::path dir = fs::path(manifest_path).parent_path();
  EpisodeSet set;
  for (const auto& entry : manifest.at("chronics")) {
    const int id = entry.at("id").get<int>();
    set.chronics.push_back(
        read_chronic_csv((dir / entry.at("file").get<std::string>()).string(),
                         spec, id));
    set.sub_episode_offsets.push_back(
        entry.at("offsets").get<std::vector<int>>());
    const auto split = entry.at("split").get<std::string>();
    if (split == "test")
      set.test_ids.push_back(id);
    else if (split == "validation")
      set.validation_ids.push_back(id);
    else
      set.train_ids.push_back(id);
  }
  return set;
}

}  // namespace gridmarl::env
