#include "gridmarl/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gridmarl::nn {

namespace {

constexpr char kMagic[8] = {'G', 'M', 'L', 'C', 'P', '0', '0', '1'};

void write_f64_row_major(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      out.write(bytes, sizeof(double));
    }
}

void read_f64_row_major(std::ifstream& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char bytes[sizeof(double)];
      in.read(bytes, sizeof(double));
      double v;
      std::memcpy(&v, bytes, sizeof(double));
      m(r, c) = v;
    }
}

}  // namespace

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const ParameterSet*>>& sets,
    const nlohmann::json& meta) {
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["meta"] = meta;
  manifest["sets"] = nlohmann::json::array();
  for (const auto& [name, set] : sets) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["role"] = set->role();
    entry["tensors"] = nlohmann::json::array();
    for (const auto& item : set->items())
      entry["tensors"].push_back({{"name", item.name},
                                  {"rows", item.tensor.value.rows()},
                                  {"cols", item.tensor.value.cols()}});
    manifest["sets"].push_back(std::move(entry));
  }
  const std::string manifest_text = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = manifest_text.size();
  char len_bytes[8];
  for (int i = 0; i < 8; ++i)
    len_bytes[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(len_bytes, 8);
  out.write(manifest_text.data(),
            static_cast<std::streamsize>(manifest_text.size()));
  for (const auto& [name, set] : sets)
    for (const auto& item : set->items())
      write_f64_row_major(out, item.tensor.value);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

nlohmann::json load_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, ParameterSet*>>& sets) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  char len_bytes[8];
  in.read(len_bytes, 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i)
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_bytes[i]))
           << (8 * i);
  std::string manifest_text(len, '\0');
  in.read(manifest_text.data(), static_cast<std::streamsize>(len));
  const nlohmann::json manifest = nlohmann::json::parse(manifest_text);
  if (manifest.value("format_version", 0) != 1)
    throw std::runtime_error("checkpoint: unsupported format version");

  const auto& stored_sets = manifest.at("sets");
  if (stored_sets.size() != sets.size())
    throw std::runtime_error("checkpoint: set count mismatch");
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& entry = stored_sets[s];
    ParameterSet* set = sets[s].second;
    if (entry.at("name").get<std::string>() != sets[s].first)
      throw std::runtime_error("checkpoint: set name mismatch");
    const auto& tensors = entry.at("tensors");
    if (tensors.size() != set->items().size())
      throw std::runtime_error("checkpoint: tensor count mismatch");
    for (std::size_t i = 0; i < set->items().size(); ++i) {
      auto& item = set->items()[i];
      if (tensors[i].at("name").get<std::string>() != item.name ||
          tensors[i].at("rows").get<Eigen::Index>() !=
              item.tensor.value.rows() ||
          tensors[i].at("cols").get<Eigen::Index>() !=
              item.tensor.value.cols())
        throw std::runtime_error("checkpoint: tensor structure mismatch for " +
                                 item.name);
      read_f64_row_major(in, item.tensor.value);
    }
  }
  if (!in) throw std::runtime_error("checkpoint: truncated payload in " + path);
  return manifest.at("meta");
}

}  // namespace gridmarl::nn
