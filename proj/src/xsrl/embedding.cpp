#include "xcap/xsrl/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "json.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

namespace xcap::xsrl {

namespace {
constexpr std::pair<Modality, std::string_view> kNames[] = {
    {Modality::Rgb, "rgb"},         {Modality::Depth, "depth"},          {Modality::Tactile, "tactile"},
    {Modality::Audio, "audio"},     {Modality::PointCloud, "pointcloud"}};
constexpr int kTableFormatVersion = 1;
}  // namespace

std::string_view to_string(Modality m) {
  for (const auto& [k, n] : kNames)
    if (k == m) return n;
  return "rgb";
}

std::optional<Modality> modality_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  return std::nullopt;
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0) throw ArgumentError("embedding table: dim must be positive");
}

void EmbeddingTable::set(Modality m, const std::string& object_id, int point, std::span<const float> v,
                         bool normalize) {
  if (static_cast<int>(v.size()) != dim_)
    throw ArgumentError("embedding table: vector of size " + std::to_string(v.size()) + ", expected " +
                        std::to_string(dim_));
  std::vector<float> row(v.begin(), v.end());
  if (normalize) {
    double n2 = 0.0;
    for (float x : row) n2 += static_cast<double>(x) * x;
    if (!(n2 > 0.0) || !std::isfinite(n2))
      throw ArgumentError("embedding table: cannot normalize zero or non-finite vector for " + object_id);
    const double inv = 1.0 / std::sqrt(n2);
    for (float& x : row) x = static_cast<float>(x * inv);
  }
  entries_[EmbeddingKey{m, object_id, point}] = std::move(row);
}

const std::vector<float>* EmbeddingTable::find(Modality m, const std::string& object_id, int point) const {
  auto it = entries_.find(EmbeddingKey{m, object_id, point});
  return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<float>& EmbeddingTable::at(Modality m, const std::string& object_id, int point) const {
  const auto* v = find(m, object_id, point);
  if (!v)
    throw ArgumentError("embedding table: no vector for (" + std::string(to_string(m)) + ", " + object_id +
                        ", " + std::to_string(point) + ")");
  return *v;
}

std::vector<Modality> EmbeddingTable::modalities() const {
  std::set<Modality> s;
  for (const auto& [k, v] : entries_) s.insert(k.modality);
  return {s.begin(), s.end()};
}

std::vector<std::string> EmbeddingTable::object_ids(Modality m) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k.modality == m && (out.empty() || out.back() != k.object_id)) out.push_back(k.object_id);
  return out;
}

std::vector<int> EmbeddingTable::points(Modality m, const std::string& object_id) const {
  std::vector<int> out;
  for (auto it = entries_.lower_bound(EmbeddingKey{m, object_id, std::numeric_limits<int>::min()});
       it != entries_.end() && it->first.modality == m && it->first.object_id == object_id; ++it)
    out.push_back(it->first.point);
  return out;
}

void EmbeddingTable::normalize_all() {
  for (auto& [k, v] : entries_) {
    const std::vector<float> copy = v;
    set(k.modality, k.object_id, k.point, copy, true);
  }
}

void write_embedding_table(const std::filesystem::path& index_path, const EmbeddingTable& table) {
  const std::string name = index_path.filename().string();
  constexpr std::string_view suffix = ".idx.json";
  if (name.size() <= suffix.size() || !name.ends_with(suffix))
    throw ArgumentError(index_path.string() + ": index file name must end in .idx.json");
  const std::string bin_name = name.substr(0, name.size() - suffix.size()) + ".bin";

  nlohmann::json entries = nlohmann::json::array();
  model::Bytes data;
  data.reserve(table.size() * static_cast<std::size_t>(table.dim()) * 4);
  for (const auto& [k, v] : table.entries()) {
    entries.push_back({std::string(to_string(k.modality)), k.object_id, k.point});
    for (float x : v) {
      auto u = std::bit_cast<std::uint32_t>(x);
      for (int b = 0; b < 4; ++b) data.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
  }
  const nlohmann::json idx{{"format_version", kTableFormatVersion},
                           {"dim", table.dim()},
                           {"dtype", "float32le"},
                           {"data", bin_name},
                           {"entries", entries}};
  model::write_file(index_path.parent_path() / bin_name, data);
  model::write_text(index_path, idx.dump(1) + "\n");
}

EmbeddingTable read_embedding_table(const std::filesystem::path& index_path) {
  const std::string where = index_path.string();
  nlohmann::json idx;
  try {
    idx = nlohmann::json::parse(model::read_text(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  try {
    if (idx.at("format_version").get<int>() != kTableFormatVersion)
      throw ParseError(where + ": unsupported format_version");
    if (idx.at("dtype").get<std::string>() != "float32le") throw ParseError(where + ": unsupported dtype");
    const int dim = idx.at("dim").get<int>();
    EmbeddingTable table(dim);
    const auto data = model::read_file(index_path.parent_path() / idx.at("data").get<std::string>());
    const auto& entries = idx.at("entries");
    if (data.size() != entries.size() * static_cast<std::size_t>(dim) * 4)
      throw ParseError(where + ": data file size does not match entries");
    std::vector<float> row(static_cast<std::size_t>(dim));
    std::size_t off = 0;
    for (const auto& e : entries) {
      const auto m = modality_from_string(e.at(0).get<std::string>());
      if (!m) throw ParseError(where + ": unknown modality " + e.at(0).dump());
      for (auto& x : row) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(data[off++]) << (8 * b);
        x = std::bit_cast<float>(u);
      }
      table.set(*m, e.at(1).get<std::string>(), e.at(2).get<int>(), row, false);
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace xcap::xsrl
