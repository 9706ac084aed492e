#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xcap::xsrl {

enum class Modality { Rgb, Depth, Tactile, Audio, PointCloud };

inline constexpr Modality kAllModalities[] = {Modality::Rgb, Modality::Depth, Modality::Tactile,
                                              Modality::Audio, Modality::PointCloud};

std::string_view to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view name);

struct EmbeddingKey {
  Modality modality;
  std::string object_id;
  int point = 0;

  auto operator<=>(const EmbeddingKey&) const = default;
};

/// Vectors keyed by (modality, object, point), all of one dimension.
/// Iteration order is the key order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  /// Stores v, unit-normalized when normalize is set (zero vectors rejected).
  void set(Modality m, const std::string& object_id, int point, std::span<const float> v,
           bool normalize = true);
  [[nodiscard]] const std::vector<float>* find(Modality m, const std::string& object_id, int point) const;
  [[nodiscard]] const std::vector<float>& at(Modality m, const std::string& object_id, int point) const;

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::map<EmbeddingKey, std::vector<float>>& entries() const { return entries_; }

  [[nodiscard]] std::vector<Modality> modalities() const;
  /// Sorted object ids present for m.
  [[nodiscard]] std::vector<std::string> object_ids(Modality m) const;
  /// Sorted point indices present for (m, object).
  [[nodiscard]] std::vector<int> points(Modality m, const std::string& object_id) const;

  void normalize_all();

  bool operator==(const EmbeddingTable&) const = default;

 private:
  int dim_;
  std::map<EmbeddingKey, std::vector<float>> entries_;
};

/// Writes <stem>.idx.json plus the raw little-endian float32 rows it names.
/// index_path must end in ".idx.json"; the data file is "<stem>.bin" beside it.
void write_embedding_table(const std::filesystem::path& index_path, const EmbeddingTable& table);
EmbeddingTable read_embedding_table(const std::filesystem::path& index_path);

}  // namespace xcap::xsrl
