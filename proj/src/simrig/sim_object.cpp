#include "xcap/simrig/sim_object.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xcap/error.hpp"

namespace xcap::simrig {

void validate(const SimObject& object, int sample_rate_hz) {
  if (!(object.stiffness_n_per_mm > 0.0))
    throw ArgumentError(object.object_id + ": stiffness must be positive");
  for (std::size_t p = 0; p < object.points.size(); ++p) {
    for (const auto& m : object.points[p].modes) {
      if (!(m.damping_per_s > 0.0))
        throw ArgumentError(object.object_id + ": mode damping must be positive");
      if (!(m.frequency_hz > 20.0) || !(m.frequency_hz < sample_rate_hz / 2.0))
        throw ArgumentError(object.object_id + ": mode frequency " +
                            std::to_string(m.frequency_hz) + " Hz outside (20, Nyquist)");
    }
  }
}

DevicePose DevicePose::tilted(double pitch_deg, double yaw_deg) {
  constexpr double deg = std::numbers::pi / 180.0;
  DevicePose p;
  p.orientation = Eigen::AngleAxisd(yaw_deg * deg, Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(pitch_deg * deg, Eigen::Vector3d::UnitX());
  return p;
}

Eigen::Vector3d gravity_in_device(const DevicePose& pose) {
  return (pose.orientation.normalized().conjugate() * kWorldGravityDir).normalized();
}

double axial_gravity(const DevicePose& pose) { return gravity_in_device(pose).dot(kSensorAxis); }

model::AccelPose accel_pose(const DevicePose& pose, std::int64_t timestamp_ns) {
  model::AccelPose a;
  a.gravity_dir = gravity_in_device(pose);
  a.raw_accel = -a.gravity_dir;
  a.timestamp_ns = timestamp_ns;
  return a;
}

double ForceProfile::at(double t_s) const {
  if (samples.empty()) return 0.0;
  if (t_s <= samples.front().first) return samples.front().second;
  if (t_s >= samples.back().first) return samples.back().second;
  auto hi = std::upper_bound(samples.begin(), samples.end(), t_s,
                             [](double t, const auto& s) { return t < s.first; });
  auto lo = hi - 1;
  const double w = (t_s - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

ForceProfile ForceProfile::ramp(double peak_n, double ramp_s, double hold_s) {
  ForceProfile p;
  p.samples = {{0.0, 0.0}, {ramp_s, peak_n}};
  if (hold_s > 0.0) p.samples.emplace_back(ramp_s + hold_s, peak_n);
  return p;
}

void validate(const ForceProfile& profile) {
  for (std::size_t i = 0; i < profile.samples.size(); ++i) {
    if (profile.samples[i].second < 0.0) throw ArgumentError("force profile: negative force");
    if (i > 0 && !(profile.samples[i].first > profile.samples[i - 1].first))
      throw ArgumentError("force profile: time must be strictly increasing");
  }
}

void validate(const HammerPulse& pulse) {
  if (!(pulse.amplitude_n > 0.0)) throw ArgumentError("hammer pulse: amplitude must be positive");
  if (pulse.width_samples < 2) throw ArgumentError("hammer pulse: width must be >= 2 samples");
  if (pulse.onset_sample < 0) throw ArgumentError("hammer pulse: negative onset");
}

}  // namespace xcap::simrig
