#include "xcap/model/types.hpp"

#include <algorithm>
#include <cmath>

#include "xcap/error.hpp"

namespace xcap::model {

namespace {

constexpr std::array<std::string_view, 9> kEnvironmentNames{
    "indoor_workspace", "kitchen", "bathroom",    "home_office", "workshop",
    "bedroom",          "laundry_room", "living_room", "picnic_table"};

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

std::optional<double> center_depth(const DepthImage& depth) {
  if (depth.empty()) return std::nullopt;
  const auto mm = depth.at(depth.width / 2, depth.height / 2);
  if (mm == 0) return std::nullopt;
  return static_cast<double>(mm) / 1000.0;
}

RgbdFrame make_rgbd_frame(RgbImage rgb, DepthImage depth, std::int64_t timestamp_ns) {
  RgbdFrame f;
  f.center_depth_m = center_depth(depth);
  f.rgb = std::move(rgb);
  f.depth = std::move(depth);
  f.timestamp_ns = timestamp_ns;
  return f;
}

std::string_view to_string(Environment env) {
  return kEnvironmentNames[static_cast<std::size_t>(env)];
}

std::optional<Environment> environment_from_string(std::string_view name) {
  auto it = std::find(kEnvironmentNames.begin(), kEnvironmentNames.end(), name);
  if (it == kEnvironmentNames.end()) return std::nullopt;
  return static_cast<Environment>(it - kEnvironmentNames.begin());
}

std::size_t Manifest::complete_count() const {
  return static_cast<std::size_t>(
      std::count_if(objects.begin(), objects.end(), [](const auto& e) { return e.complete; }));
}

void validate(const RgbdFrame& frame) {
  require(frame.rgb.channels == 3, "rgbd.rgb: expected 3 channels");
  require(frame.depth.channels == 1, "rgbd.depth: expected 1 channel");
  require(!frame.rgb.empty(), "rgbd.rgb: empty image");
  require(frame.rgb.same_size(frame.depth.width, frame.depth.height),
          "rgbd.depth: dimensions differ from rgbd.rgb");
  require(frame.center_depth_m == center_depth(frame.depth),
          "rgbd.center_depth_m: inconsistent with depth map");
}

void validate(const AccelPose& pose) {
  require(std::abs(pose.gravity_dir.norm() - 1.0) <= 1e-6, "pose.gravity_dir: not unit length");
}

void validate(const TactileSnapshot& snap) {
  require(snap.image.channels == 3 && !snap.image.empty(), "tactile.image: expected RGB image");
  require(std::abs(snap.measured_force_n - snap.target_force_n) <= kTactileWindowN,
          "tactile.measured_force_n: outside window of target");
  validate(snap.pose);
}

void validate(const AudioTake& take) {
  require(take.sample_rate_hz > 0, "audio.sample_rate_hz: must be positive");
  require(take.mic_samples.size() == take.hammer_samples.size(),
          "audio.hammer_samples: length differs from mic_samples");
}

void validate(const PointRecord& record) {
  require(!record.object_id.empty(), "object_id: empty");
  require(record.object_id.find_first_of("/\\") == std::string::npos &&
              record.object_id != "." && record.object_id != "..",
          "object_id: not a valid directory name");
  require(record.point_index >= 0 && record.point_index < kPointsPerObject,
          "point_index: out of range [0,5]");
  validate(record.rgbd);
  validate(record.rgbd_pose);
  std::array<int, kTactileTargetsN.size()> seen{};
  for (const auto& snap : record.tactile) {
    auto it = std::find(kTactileTargetsN.begin(), kTactileTargetsN.end(), snap.target_force_n);
    require(it != kTactileTargetsN.end(), "tactile: unknown target force");
    ++seen[static_cast<std::size_t>(it - kTactileTargetsN.begin())];
    validate(snap);
  }
  require(record.tactile.size() == kTactileTargetsN.size() &&
              std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }),
          "tactile targets incomplete");
  validate(record.audio);
}

}  // namespace xcap::model
