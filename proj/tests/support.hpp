#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "xcap/model/types.hpp"
#include "xcap/simrig/render.hpp"
#include "xcap/simrig/sim_object.hpp"

namespace xcap::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "xcap") {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Seeded sim object with six probe points of two or three modes each.
inline simrig::SimObject make_object(const std::string& id, std::uint64_t seed,
                                     simrig::Surface surface = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(150.0, 6000.0), damp(3.0, 30.0), amp(0.2, 1.0), loud(0.5, 2.0);
  simrig::SimObject o;
  o.object_id = id;
  o.label = "object " + id;
  o.environment = model::Environment::Kitchen;
  o.surface = surface;
  o.texture_seed = static_cast<std::uint32_t>(seed);
  for (int p = 0; p < model::kPointsPerObject; ++p) {
    simrig::SimPoint sp;
    const int n_modes = 2 + static_cast<int>(rng() % 2);
    for (int k = 0; k < n_modes; ++k) sp.modes.push_back({freq(rng), damp(rng), amp(rng)});
    sp.loudness_scale = loud(rng);
    sp.tactile_bumps.push_back({-0.4 + 0.15 * p, 0.2, 0.3, 0.5});
    o.points.push_back(std::move(sp));
  }
  return o;
}

/// A complete point record produced by the sim rig for `object`/`point`.
inline model::PointRecord make_record(const simrig::SimObject& object, int point, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  const auto pose = simrig::DevicePose::tilted(-10.0 * (point % 3), 5.0 * point);
  model::PointRecord r;
  r.object_id = object.object_id;
  r.point_index = point;
  r.rgbd = simrig::render_rgbd(object, pose, simrig::Camera{}, 1'000'000 + static_cast<std::int64_t>(seed));
  r.rgbd_pose = simrig::accel_pose(pose, r.rgbd.timestamp_ns);
  for (double target : {10.0, 15.0, 20.0}) {
    model::TactileSnapshot s;
    s.target_force_n = target;
    s.measured_force_n = target + n(rng);
    s.image = simrig::tactile_image(object, point, s.measured_force_n, pose);
    s.timestamp_ns = r.rgbd.timestamp_ns + static_cast<std::int64_t>(target * 1e8);
    s.pose = simrig::accel_pose(pose, s.timestamp_ns);
    r.tactile.push_back(std::move(s));
  }
  const auto sig = simrig::synth_impact(object, point, {40.0, 48, 4800}, 48000, 0.5);
  r.audio = simrig::record_take(sig, 6.0, 17.0, {}, r.rgbd.timestamp_ns + 5'000'000'000LL);
  r.audio.reference_gain_db = 0.0;
  for (int i = 0; i < 20; ++i)
    r.force_log.push_back({r.rgbd.timestamp_ns + i * 5'000'000LL, 8000.0 + 100.0 * i + n(rng), 1.0 * i + n(rng)});
  return r;
}

}  // namespace xcap::testing
