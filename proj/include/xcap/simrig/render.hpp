#pragma once

#include <cstdint>
#include <vector>

#include "xcap/image.hpp"
#include "xcap/model/types.hpp"
#include "xcap/simrig/sim_object.hpp"

namespace xcap::simrig {

/// Ray-cast distance along the optical axis for one pixel, or 0 on a miss.
double ray_depth(const Surface& surface, const DevicePose& pose, const Camera& cam, int u, int v);

/// Exact metric depth per pixel (meters, 0 = miss), before sensor
/// quantization and range limits.
FloatImage render_depth_exact(const SimObject& object, const DevicePose& pose, const Camera& cam);

/// Pixels whose ray hits the object surface.
Mask render_object_mask(const SimObject& object, const DevicePose& pose, const Camera& cam);

/// Simulated RGBD sensor: depth quantized to millimeters, zeroed outside
/// [min_depth_m, max_depth_m].
model::RgbdFrame render_rgbd(const SimObject& object, const DevicePose& pose, const Camera& cam,
                             std::int64_t timestamp_ns = 0);

/// Distance from a world point to the object surface.
double surface_distance(const Surface& surface, const Eigen::Vector3d& world_point);

inline constexpr std::uint8_t kTactileBackground[3] = {20, 30, 50};

/// Engineered stand-in for a vision-based tactile sensor. The contact patch
/// is the set of height-map pixels within force/stiffness of the peak; it
/// grows monotonically with force and is empty at zero force.
RgbImage tactile_image(const SimObject& object, int point, double force_n, const DevicePose& pose,
                       const TactileSpec& spec = {});

/// Number of pixels that differ from the no-contact background.
std::size_t contact_area(const RgbImage& tactile);

struct ImpactSignals {
  std::vector<double> mic;     // pre-gain pressure, arbitrary units
  std::vector<double> hammer;  // pre-gain force, Newtons
  int sample_rate_hz = 0;
};

std::vector<double> pulse_samples(const HammerPulse& pulse, std::size_t length);

/// Linear modal response: mic = pulse * sum_k a_k e^(-d_k t) sin(2 pi f_k t),
/// scaled by the point's loudness. The hammer channel is the pulse itself.
ImpactSignals synth_impact(const SimObject& object, int point, const HammerPulse& pulse,
                           int sample_rate_hz, double duration_s);

/// Two strikes `delay_samples` apart, the second scaled by `second_ratio`.
ImpactSignals synth_double_hit(const SimObject& object, int point, const HammerPulse& pulse,
                               int delay_samples, double second_ratio, int sample_rate_hz,
                               double duration_s);

/// Raw load-cell reading for a given true contact force and device pose.
double load_cell_counts(double contact_force_n, const DevicePose& pose, const LoadCellTruth& truth);

/// Full-scale mapping of the simulated recording chain.
struct AudioChain {
  double mic_fullscale = 1000.0;        // raw mic units at 0 dBFS with 0 dB gain
  double hammer_fullscale_n = 400.0;    // Newtons at 0 dBFS with 0 dB gain
};

/// Applies gains, hard-clips to [-1, 1] and converts to the recorded take.
model::AudioTake record_take(const ImpactSignals& signals, double mic_gain_db,
                             double hammer_gain_db, const AudioChain& chain = {},
                             std::int64_t timestamp_ns = 0);

}  // namespace xcap::simrig
