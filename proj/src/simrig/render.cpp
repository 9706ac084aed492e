#include "xcap/simrig/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xcap/error.hpp"

namespace xcap::simrig {

namespace {

Eigen::Vector3d pixel_ray(const DevicePose& pose, const Camera& cam, int u, int v) {
  const Eigen::Vector3d d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  return pose.orientation.normalized() * d;
}

// Ray parameter t with the device-frame direction scaled to unit z, so t is
// the depth along the optical axis.
double intersect(const Surface& s, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  if (s.kind == Surface::Kind::Plane) {
    if (dir.z() <= 0.0) return 0.0;
    const double t = (s.distance_m - origin.z()) / dir.z();
    return t > 0.0 ? t : 0.0;
  }
  const Eigen::Vector3d c(0.0, 0.0, s.distance_m);
  const Eigen::Vector3d oc = origin - c;
  const double a = dir.squaredNorm();
  const double b = 2.0 * oc.dot(dir);
  const double k = oc.squaredNorm() - s.radius_m * s.radius_m;
  const double disc = b * b - 4.0 * a * k;
  if (disc < 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return 0.0;
}

Eigen::Vector3d surface_normal(const Surface& s, const Eigen::Vector3d& p) {
  if (s.kind == Surface::Kind::Plane) return -Eigen::Vector3d::UnitZ();
  return (p - Eigen::Vector3d(0.0, 0.0, s.distance_m)).normalized();
}

std::array<std::uint8_t, 3> palette(std::uint32_t seed, int which) {
  std::uint32_t h = seed * 2654435761u + static_cast<std::uint32_t>(which) * 40503u + 12345u;
  h ^= h >> 15;
  h *= 2246822519u;
  h ^= h >> 13;
  return {static_cast<std::uint8_t>(64 + (h & 0x7f)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0x7f)),
          static_cast<std::uint8_t>(64 + ((h >> 16) & 0x7f))};
}

}  // namespace

double ray_depth(const Surface& surface, const DevicePose& pose, const Camera& cam, int u, int v) {
  return intersect(surface, pose.position, pixel_ray(pose, cam, u, v));
}

FloatImage render_depth_exact(const SimObject& object, const DevicePose& pose, const Camera& cam) {
  FloatImage out(cam.width, cam.height, 1, 0.0f);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u)
      out.at(u, v) = static_cast<float>(ray_depth(object.surface, pose, cam, u, v));
  return out;
}

Mask render_object_mask(const SimObject& object, const DevicePose& pose, const Camera& cam) {
  Mask out(cam.width, cam.height, 1, 0);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u)
      out.at(u, v) = ray_depth(object.surface, pose, cam, u, v) > 0.0;
  return out;
}

model::RgbdFrame render_rgbd(const SimObject& object, const DevicePose& pose, const Camera& cam,
                             std::int64_t timestamp_ns) {
  RgbImage rgb(cam.width, cam.height, 3, 90);
  DepthImage depth(cam.width, cam.height, 1, 0);
  const auto light = palette(object.texture_seed, 0);
  const auto dark = palette(object.texture_seed, 1);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d dir = pixel_ray(pose, cam, u, v);
      const double t = intersect(object.surface, pose.position, dir);
      if (t <= 0.0) continue;
      if (t >= cam.min_depth_m && t <= cam.max_depth_m)
        depth.at(u, v) = static_cast<std::uint16_t>(std::min(65535.0, std::round(t * 1000.0)));
      const Eigen::Vector3d p = pose.position + t * dir;
      const bool checker =
          (static_cast<long>(std::floor(p.x() / 0.01)) + static_cast<long>(std::floor(p.y() / 0.01))) & 1;
      const auto& base = checker ? light : dark;
      const double shade =
          0.4 + 0.6 * std::abs(surface_normal(object.surface, p).dot(dir.normalized()));
      for (int c = 0; c < 3; ++c)
        rgb.at(u, v, c) = static_cast<std::uint8_t>(std::lround(base[static_cast<std::size_t>(c)] * shade));
    }
  }
  return model::make_rgbd_frame(std::move(rgb), std::move(depth), timestamp_ns);
}

double surface_distance(const Surface& surface, const Eigen::Vector3d& p) {
  if (surface.kind == Surface::Kind::Plane) return std::abs(p.z() - surface.distance_m);
  return std::abs((p - Eigen::Vector3d(0.0, 0.0, surface.distance_m)).norm() - surface.radius_m);
}

RgbImage tactile_image(const SimObject& object, int point, double force_n, const DevicePose& pose,
                       const TactileSpec& spec) {
  if (point < 0 || point >= static_cast<int>(object.points.size()))
    throw ArgumentError("tactile_image: unknown point index " + std::to_string(point));
  if (!(force_n >= 0.0)) throw ArgumentError("tactile_image: force must be >= 0");

  const auto& bumps = object.points[static_cast<std::size_t>(point)].tactile_bumps;
  const Eigen::Vector3d g = gravity_in_device(pose);
  std::vector<double> height(static_cast<std::size_t>(spec.width) * spec.height);
  double peak = -1e300;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double nx = 2.0 * (x + 0.5) / spec.width - 1.0;
      const double ny = 2.0 * (y + 0.5) / spec.height - 1.0;
      double h = spec.tilt_mm * (g.x() * nx + g.y() * ny);
      for (const auto& b : bumps) {
        const double r2 = (nx - b.x) * (nx - b.x) + (ny - b.y) * (ny - b.y);
        h += b.height_mm * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
      }
      height[static_cast<std::size_t>(y) * spec.width + x] = h;
      peak = std::max(peak, h);
    }
  }

  RgbImage img(spec.width, spec.height, 3);
  const double indent_mm = force_n / object.stiffness_n_per_mm;
  const double level = peak - indent_mm;
  constexpr double kGain[3] = {200.0, 150.0, 120.0};
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double h = height[static_cast<std::size_t>(y) * spec.width + x];
      for (int c = 0; c < 3; ++c) {
        double value = kTactileBackground[c];
        if (h > level) value += 1.0 + std::round(kGain[c] * (h - level) / indent_mm);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::min(255.0, value));
      }
    }
  }
  return img;
}

std::size_t contact_area(const RgbImage& tactile) {
  std::size_t n = 0;
  for (int y = 0; y < tactile.height; ++y)
    for (int x = 0; x < tactile.width; ++x)
      n += tactile.at(x, y, 0) != kTactileBackground[0] || tactile.at(x, y, 1) != kTactileBackground[1] ||
           tactile.at(x, y, 2) != kTactileBackground[2];
  return n;
}

std::vector<double> pulse_samples(const HammerPulse& pulse, std::size_t length) {
  std::vector<double> out(length, 0.0);
  for (int k = 0; k < pulse.width_samples; ++k) {
    const auto n = static_cast<std::size_t>(pulse.onset_sample + k);
    if (n >= length) break;
    out[n] = pulse.amplitude_n *
             (0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / pulse.width_samples)));
  }
  return out;
}

ImpactSignals synth_impact(const SimObject& object, int point, const HammerPulse& pulse,
                           int sample_rate_hz, double duration_s) {
  if (sample_rate_hz <= 0) throw ArgumentError("synth_impact: sample rate must be positive");
  if (point < 0 || point >= static_cast<int>(object.points.size()))
    throw ArgumentError("synth_impact: unknown point index " + std::to_string(point));
  validate(pulse);
  const auto& sp = object.points[static_cast<std::size_t>(point)];
  for (const auto& m : sp.modes) {
    if (m.frequency_hz >= sample_rate_hz / 2.0)
      throw ArgumentError("synth_impact: mode frequency above Nyquist");
    if (!(m.damping_per_s > 0.0)) throw ArgumentError("synth_impact: damping must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  if (static_cast<std::size_t>(pulse.onset_sample + pulse.width_samples) > n)
    throw ArgumentError("synth_impact: duration too short to contain the pulse");

  ImpactSignals out;
  out.sample_rate_hz = sample_rate_hz;
  out.hammer = pulse_samples(pulse, n);
  out.mic.assign(n, 0.0);
  if (sp.modes.empty()) return out;

  std::vector<double> response(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / sample_rate_hz;
    double acc = 0.0;
    for (const auto& m : sp.modes)
      acc += m.amplitude * std::exp(-m.damping_per_s * t) * std::sin(2.0 * std::numbers::pi * m.frequency_hz * t);
    response[k] = sp.loudness_scale * acc;
  }
  const auto onset = static_cast<std::size_t>(pulse.onset_sample);
  for (int j = 0; j < pulse.width_samples; ++j) {
    const double p = out.hammer[onset + static_cast<std::size_t>(j)];
    if (p == 0.0) continue;
    const std::size_t shift = onset + static_cast<std::size_t>(j);
    for (std::size_t k = shift; k < n; ++k) out.mic[k] += p * response[k - shift];
  }
  return out;
}

ImpactSignals synth_double_hit(const SimObject& object, int point, const HammerPulse& pulse,
                               int delay_samples, double second_ratio, int sample_rate_hz,
                               double duration_s) {
  auto first = synth_impact(object, point, pulse, sample_rate_hz, duration_s);
  HammerPulse second = pulse;
  second.amplitude_n = pulse.amplitude_n * second_ratio;
  second.onset_sample = pulse.onset_sample + delay_samples;
  const auto other = synth_impact(object, point, second, sample_rate_hz, duration_s);
  for (std::size_t k = 0; k < first.mic.size(); ++k) {
    first.mic[k] += other.mic[k];
    first.hammer[k] += other.hammer[k];
  }
  return first;
}

double load_cell_counts(double contact_force_n, const DevicePose& pose, const LoadCellTruth& truth) {
  return truth.tare_counts +
         (contact_force_n + truth.m_eff_kg * kStandardGravity * axial_gravity(pose)) /
             truth.scale_n_per_count;
}

model::AudioTake record_take(const ImpactSignals& signals, double mic_gain_db,
                             double hammer_gain_db, const AudioChain& chain,
                             std::int64_t timestamp_ns) {
  model::AudioTake take;
  take.sample_rate_hz = signals.sample_rate_hz;
  take.mic_gain_db = mic_gain_db;
  take.hammer_gain_db = hammer_gain_db;
  take.timestamp_ns = timestamp_ns;
  const double mic_k = std::pow(10.0, mic_gain_db / 20.0) / chain.mic_fullscale;
  const double ham_k = std::pow(10.0, hammer_gain_db / 20.0) / chain.hammer_fullscale_n;
  take.mic_samples.reserve(signals.mic.size());
  take.hammer_samples.reserve(signals.hammer.size());
  for (double s : signals.mic) take.mic_samples.push_back(static_cast<float>(std::clamp(s * mic_k, -1.0, 1.0)));
  for (double s : signals.hammer)
    take.hammer_samples.push_back(static_cast<float>(std::clamp(s * ham_k, -1.0, 1.0)));
  return take;
}

}  // namespace xcap::simrig
