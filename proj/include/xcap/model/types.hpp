#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "xcap/image.hpp"

namespace xcap::model {

inline constexpr int kFormatVersion = 1;
inline constexpr int kPointsPerObject = 6;
inline constexpr std::array<double, 3> kTactileTargetsN{10.0, 15.0, 20.0};
inline constexpr double kTactileWindowN = 0.5;
inline constexpr int kDefaultSampleRateHz = 48000;

struct RgbdFrame {
  RgbImage rgb;      // H x W x 3
  DepthImage depth;  // H x W, millimeters
  std::int64_t timestamp_ns = 0;
  std::optional<double> center_depth_m;  // nullopt when the center pixel has no depth

  bool operator==(const RgbdFrame&) const = default;
};

/// Depth in meters at the principal pixel (width/2, height/2), or nullopt
/// when the sensor reported no depth there.
std::optional<double> center_depth(const DepthImage& depth);

/// Builds a frame and fills center_depth_m from the depth map.
RgbdFrame make_rgbd_frame(RgbImage rgb, DepthImage depth, std::int64_t timestamp_ns);

struct AccelPose {
  Eigen::Vector3d gravity_dir = Eigen::Vector3d::UnitY();  // unit, device frame
  Eigen::Vector3d raw_accel = -Eigen::Vector3d::UnitY();   // g units
  std::int64_t timestamp_ns = 0;

  bool operator==(const AccelPose&) const = default;
};

struct TactileSnapshot {
  RgbImage image;
  double target_force_n = 0.0;
  double measured_force_n = 0.0;
  AccelPose pose;
  std::int64_t timestamp_ns = 0;

  bool operator==(const TactileSnapshot&) const = default;
};

struct AudioTake {
  std::vector<float> mic_samples;
  std::vector<float> hammer_samples;
  int sample_rate_hz = kDefaultSampleRateHz;
  double mic_gain_db = 0.0;
  double hammer_gain_db = 0.0;
  double reference_gain_db = 0.0;
  std::int64_t timestamp_ns = 0;

  bool operator==(const AudioTake&) const = default;
};

/// One row of force_log.csv.
struct ForceSample {
  std::int64_t timestamp_ns = 0;
  double raw_counts = 0.0;
  double contact_force_n = 0.0;

  bool operator==(const ForceSample&) const = default;
};

struct PointRecord {
  std::string object_id;
  int point_index = 0;
  RgbdFrame rgbd;
  AccelPose rgbd_pose;
  std::vector<TactileSnapshot> tactile;
  AudioTake audio;
  std::vector<ForceSample> force_log;
  std::optional<std::string> pointcloud_path;

  bool operator==(const PointRecord&) const = default;
};

enum class Environment {
  IndoorWorkspace,
  Kitchen,
  Bathroom,
  HomeOffice,
  Workshop,
  Bedroom,
  LaundryRoom,
  LivingRoom,
  PicnicTable,
};

std::string_view to_string(Environment env);
std::optional<Environment> environment_from_string(std::string_view name);

struct ObjectRecord {
  std::string object_id;
  std::string label;
  std::optional<Environment> environment;
  std::vector<PointRecord> points;
};

struct ManifestEntry {
  std::string object_id;
  std::optional<Environment> environment;
  bool complete = false;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::filesystem::path dataset_root;
  std::vector<ManifestEntry> objects;  // sorted by object_id
  int format_version = kFormatVersion;

  [[nodiscard]] std::size_t complete_count() const;
  bool operator==(const Manifest&) const = default;
};

struct Split {
  std::set<std::string> train_ids;
  std::set<std::string> test_ids;
  std::uint64_t seed = 0;

  bool operator==(const Split&) const = default;
};

/// Throws ValidationError naming the offending field.
void validate(const RgbdFrame& frame);
void validate(const AccelPose& pose);
void validate(const TactileSnapshot& snap);
void validate(const AudioTake& take);
void validate(const PointRecord& record);

}  // namespace xcap::model
