#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "xcap/model/types.hpp"

namespace xcap::model {

namespace fs = std::filesystem;

/// <root>/objects/<object_id>
fs::path object_dir(const fs::path& root, const std::string& object_id);
/// <root>/objects/<object_id>/points/<k>
fs::path point_dir(const fs::path& root, const std::string& object_id, int point_index);

/// Writes every per-point file into a staging directory and renames it into
/// place, so a crash never leaves a half-written point under its final name.
/// Returns the point directory.
fs::path write_point_record(const PointRecord& record, const fs::path& root);

/// Reads and validates a point directory written by write_point_record.
PointRecord read_point_record(const fs::path& dir);

void write_object_meta(const fs::path& root, const ObjectRecord& object);
ObjectRecord read_object_meta(const fs::path& object_dir);

/// Scans <root>/objects. An object is complete iff all six point
/// directories load and validate.
Manifest build_manifest(const fs::path& root);

void write_manifest(const Manifest& manifest);
Manifest read_manifest(const fs::path& root);

/// Seeded uniform shuffle of the sorted complete object ids; the first
/// n_train go to train.
Split split_dataset(const Manifest& manifest, std::size_t n_train, std::uint64_t seed);

fs::path write_split(const fs::path& root, const std::string& name, const Split& split);
Split read_split(const fs::path& path);

nlohmann::json to_json(const Manifest& manifest);
nlohmann::json to_json(const Split& split);

}  // namespace xcap::model
