#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "xcap/model/types.hpp"

namespace xcap::simrig {

inline constexpr double kStandardGravity = 9.80665;

/// World frame: +z points away from the device toward the scene, +y points
/// down (along gravity). The device presses and looks along its own +z.
inline const Eigen::Vector3d kWorldGravityDir = Eigen::Vector3d::UnitY();
inline const Eigen::Vector3d kSensorAxis = Eigen::Vector3d::UnitZ();

struct Mode {
  double frequency_hz = 440.0;
  double damping_per_s = 5.0;
  double amplitude = 1.0;
};

struct Surface {
  enum class Kind { Plane, Sphere };
  Kind kind = Kind::Plane;
  double distance_m = 0.10;  // plane: z of the plane; sphere: z of the center
  double radius_m = 0.04;    // sphere only
};

/// Gaussian bump of the local tactile height map, coordinates in [-1, 1].
struct Bump {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.3;
  double height_mm = 0.5;
};

struct SimPoint {
  std::vector<Mode> modes;
  double loudness_scale = 1.0;
  std::vector<Bump> tactile_bumps;
};

struct SimObject {
  std::string object_id;
  std::string label;
  std::optional<model::Environment> environment;
  Surface surface;
  double stiffness_n_per_mm = 20.0;
  std::vector<SimPoint> points;
  std::uint32_t texture_seed = 0;
};

/// Throws ArgumentError when damping, frequency range or stiffness are violated.
void validate(const SimObject& object, int sample_rate_hz);

struct DevicePose {
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // device -> world
  Eigen::Vector3d position = Eigen::Vector3d::Zero();               // meters

  /// Rotation about the device x axis by `pitch_deg`, then about y by `yaw_deg`.
  static DevicePose tilted(double pitch_deg, double yaw_deg = 0.0);
};

/// Gravity direction expressed in the device frame.
Eigen::Vector3d gravity_in_device(const DevicePose& pose);
/// Gravity component along the pressing axis, in [-1, 1].
double axial_gravity(const DevicePose& pose);
/// What the accelerometer reports for a device at rest in `pose`.
model::AccelPose accel_pose(const DevicePose& pose, std::int64_t timestamp_ns);

/// Piecewise-linear applied force over time.
struct ForceProfile {
  std::vector<std::pair<double, double>> samples;  // (t_s, applied_force_n)

  /// Linear interpolation, clamped to the first/last sample outside the range.
  [[nodiscard]] double at(double t_s) const;
  [[nodiscard]] double duration_s() const { return samples.empty() ? 0.0 : samples.back().first; }

  static ForceProfile ramp(double peak_n, double ramp_s, double hold_s = 0.0);
};

/// Throws ArgumentError unless t is strictly increasing and force >= 0.
void validate(const ForceProfile& profile);

/// Raised-cosine force pulse: amplitude * (1 - cos(2*pi*k/width)) / 2 for
/// k in [0, width), peaking at onset + width/2.
struct HammerPulse {
  double amplitude_n = 40.0;
  int width_samples = 40;
  int onset_sample = 0;
};

void validate(const HammerPulse& pulse);

/// Pinhole camera; pixel (u, v) looks along ((u-cx)/fx, (v-cy)/fy, 1).
struct Camera {
  int width = 64;
  int height = 48;
  double fx = 60.0;
  double fy = 60.0;
  double cx = 32.0;
  double cy = 24.0;
  double min_depth_m = 0.07;
  double max_depth_m = 2.0;
};

struct TactileSpec {
  int width = 40;
  int height = 30;
  double tilt_mm = 0.2;  // height-map tilt per unit of lateral gravity
};

/// Ground truth of the load-cell transfer, inverted by capture::contact_force.
struct LoadCellTruth {
  double scale_n_per_count = 0.01;
  double tare_counts = 8000.0;
  double m_eff_kg = 0.05;
};

}  // namespace xcap::simrig
