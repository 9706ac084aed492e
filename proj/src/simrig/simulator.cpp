#include "xcap/simrig/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "xcap/error.hpp"

namespace xcap::simrig {

using nlohmann::json;

namespace {

constexpr std::int64_t kNsPerS = 1'000'000'000;

constexpr std::array<std::pair<CommandKind, std::string_view>, 9> kCommandNames{{
    {CommandKind::SelectPoint, "select_point"},
    {CommandKind::Approach, "approach"},
    {CommandKind::Tilt, "tilt"},
    {CommandKind::Press, "press"},
    {CommandKind::Lift, "lift"},
    {CommandKind::PullHammer, "pull_hammer"},
    {CommandKind::MagnetOn, "magnet_on"},
    {CommandKind::MagnetOff, "magnet_off"},
    {CommandKind::SetGains, "set_gains"},
}};

std::int64_t emission_time(std::int64_t index, int rate_hz) {
  return index * kNsPerS / rate_hz;
}

double near_surface_z(const Surface& s) {
  return s.kind == Surface::Kind::Plane ? s.distance_m : s.distance_m - s.radius_m;
}

ForceProfile parse_profile(const json& j) {
  ForceProfile p;
  if (j.contains("samples")) {
    for (const auto& s : j.at("samples")) p.samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  } else {
    p = ForceProfile::ramp(j.at("peak_n").get<double>(), j.at("ramp_s").get<double>(),
                           j.value("hold_s", 0.0));
  }
  validate(p);
  return p;
}

Mode parse_mode(const json& j) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
  return {j.at("frequency_hz").get<double>(), j.at("damping_per_s").get<double>(),
          j.value("amplitude", 1.0)};
}

SimObject parse_object(const json& j, int sample_rate_hz) {
  SimObject o;
  o.object_id = j.at("object_id").get<std::string>();
  o.label = j.value("label", std::string{});
  if (j.contains("environment") && !j.at("environment").is_null()) {
    o.environment = model::environment_from_string(j.at("environment").get<std::string>());
    if (!o.environment) throw ArgumentError(o.object_id + ": unknown environment");
  }
  if (j.contains("surface")) {
    const auto& s = j.at("surface");
    const auto kind = s.value("kind", std::string("plane"));
    if (kind == "plane") {
      o.surface.kind = Surface::Kind::Plane;
    } else if (kind == "sphere") {
      o.surface.kind = Surface::Kind::Sphere;
    } else {
      throw ArgumentError(o.object_id + ": unknown surface kind '" + kind + "'");
    }
    o.surface.distance_m = s.value("distance_m", o.surface.distance_m);
    o.surface.radius_m = s.value("radius_m", o.surface.radius_m);
  }
  o.stiffness_n_per_mm = j.value("stiffness_n_per_mm", o.stiffness_n_per_mm);
  o.texture_seed = j.value("texture_seed", 0u);
  for (const auto& pj : j.at("points")) {
    SimPoint p;
    for (const auto& m : pj.value("modes", json::array())) p.modes.push_back(parse_mode(m));
    p.loudness_scale = pj.value("loudness_scale", 1.0);
    for (const auto& b : pj.value("bumps", json::array()))
      p.tactile_bumps.push_back({b.value("x", 0.0), b.value("y", 0.0), b.value("sigma", 0.3),
                                 b.value("height_mm", 0.5)});
    o.points.push_back(std::move(p));
  }
  validate(o, sample_rate_hz);
  return o;
}

SimConfig parse_config(const json& j, std::uint64_t seed) {
  SimConfig c;
  c.seed = seed;
  if (j.is_null()) return c;
  if (j.contains("camera")) {
    const auto& cj = j.at("camera");
    c.camera.width = cj.value("width", c.camera.width);
    c.camera.height = cj.value("height", c.camera.height);
    c.camera.fx = cj.value("fx", c.camera.fx);
    c.camera.fy = cj.value("fy", c.camera.fy);
    c.camera.cx = cj.value("cx", c.camera.width / 2.0);
    c.camera.cy = cj.value("cy", c.camera.height / 2.0);
  }
  if (j.contains("tactile")) {
    c.tactile.width = j.at("tactile").value("width", c.tactile.width);
    c.tactile.height = j.at("tactile").value("height", c.tactile.height);
  }
  if (j.contains("load_cell")) {
    const auto& lj = j.at("load_cell");
    c.load_cell.scale_n_per_count = lj.value("scale_n_per_count", c.load_cell.scale_n_per_count);
    c.load_cell.tare_counts = lj.value("tare_counts", c.load_cell.tare_counts);
    c.load_cell.m_eff_kg = lj.value("m_eff_kg", c.load_cell.m_eff_kg);
  }
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.rgbd_rate_hz = j.value("rgbd_rate_hz", c.rgbd_rate_hz);
  c.force_rate_hz = j.value("force_rate_hz", c.force_rate_hz);
  c.tactile_rate_hz = j.value("tactile_rate_hz", c.tactile_rate_hz);
  c.force_noise_n = j.value("force_noise_n", c.force_noise_n);
  c.hammer_strike_n = j.value("hammer_strike_n", c.hammer_strike_n);
  c.hammer_width_samples = j.value("hammer_width_samples", c.hammer_width_samples);
  c.hammer_travel_s = j.value("hammer_travel_s", c.hammer_travel_s);
  c.impact_duration_s = j.value("impact_duration_s", c.impact_duration_s);
  c.bounce_ratio = j.value("bounce_ratio", c.bounce_ratio);
  c.bounce_delay_s = j.value("bounce_delay_s", c.bounce_delay_s);
  c.audio_chain.hammer_fullscale_n = j.value("hammer_fullscale_n", c.audio_chain.hammer_fullscale_n);
  c.audio_chain.mic_fullscale = j.value("mic_fullscale", c.audio_chain.mic_fullscale);
  return c;
}

}  // namespace

std::string_view to_string(CommandKind kind) {
  for (const auto& [k, name] : kCommandNames)
    if (k == kind) return name;
  return "unknown";
}

Command parse_command(const json& j) {
  if (!j.is_object() || !j.contains("cmd") || !j.at("cmd").is_string())
    throw ArgumentError("operator command: missing \"cmd\"");
  const auto name = j.at("cmd").get<std::string>();
  auto it = std::find_if(kCommandNames.begin(), kCommandNames.end(),
                         [&](const auto& p) { return p.second == name; });
  if (it == kCommandNames.end()) throw ArgumentError("unknown operator command '" + name + "'");
  Command c;
  c.kind = it->first;
  try {
    switch (c.kind) {
      case CommandKind::SelectPoint:
        c.object_index = j.value("object_index", 0);
        c.point = j.at("point").get<int>();
        break;
      case CommandKind::Approach:
        c.distance_m = j.at("distance_m").get<double>();
        break;
      case CommandKind::Tilt:
        c.pitch_deg = j.value("pitch_deg", 0.0);
        c.yaw_deg = j.value("yaw_deg", 0.0);
        break;
      case CommandKind::Press:
        c.profile = parse_profile(j.at("profile"));
        break;
      case CommandKind::SetGains:
        c.mic_gain_db = j.at("mic_gain_db").get<double>();
        c.hammer_gain_db = j.at("hammer_gain_db").get<double>();
        break;
      default:
        break;
    }
  } catch (const json::exception& e) {
    throw ArgumentError("operator command '" + name + "': " + e.what());
  }
  return c;
}

DevicePose SimState::pose(const SimWorld& world) const {
  DevicePose p = DevicePose::tilted(pitch_deg, yaw_deg);
  const auto& obj = world.objects.at(static_cast<std::size_t>(object_index));
  // Keep the optical axis aimed at the surface point in front of the device.
  const Eigen::Vector3d axis = p.orientation * kSensorAxis;
  const Eigen::Vector3d target(0.0, 0.0, near_surface_z(obj.surface));
  p.position = target - distance_m * axis / axis.z();
  return p;
}

double SimState::applied_force_n() const {
  if (!pressing) return 0.0;
  return std::max(0.0, press_profile.at(static_cast<double>(t_ns - press_start_ns) / kNsPerS));
}

SimState initial_state(const SimWorld& world) {
  if (world.objects.empty()) throw ArgumentError("simulation needs at least one object");
  for (const auto& o : world.objects) validate(o, world.config.sample_rate_hz);
  SimState s;
  s.rng.seed(world.config.seed);
  return s;
}

RgbImage current_tactile(const SimWorld& world, const SimState& state) {
  const auto& obj = world.objects.at(static_cast<std::size_t>(state.object_index));
  return tactile_image(obj, state.point, state.applied_force_n(), state.pose(world),
                       world.config.tactile);
}

std::pair<SimState, Readings> step(const SimWorld& world, SimState s,
                                   std::span<const Command> commands, double dt_s) {
  if (!(dt_s > 0.0)) throw ArgumentError("step: dt must be positive");
  const auto& cfg = world.config;
  Readings out;

  for (const auto& c : commands) {
    switch (c.kind) {
      case CommandKind::SelectPoint:
        if (c.object_index < 0 || c.object_index >= static_cast<int>(world.objects.size()))
          throw ArgumentError("select_point: unknown object index");
        if (c.point < 0 ||
            c.point >= static_cast<int>(world.objects[static_cast<std::size_t>(c.object_index)].points.size()))
          throw ArgumentError("select_point: unknown point index");
        s.object_index = c.object_index;
        s.point = c.point;
        break;
      case CommandKind::Approach:
        s.distance_m = c.distance_m;
        break;
      case CommandKind::Tilt:
        s.pitch_deg = c.pitch_deg;
        s.yaw_deg = c.yaw_deg;
        break;
      case CommandKind::Press:
        validate(c.profile);
        s.pressing = true;
        s.press_profile = c.profile;
        s.press_start_ns = s.t_ns;
        break;
      case CommandKind::Lift:
        s.pressing = false;
        break;
      case CommandKind::PullHammer:
        if (s.magnet_on && s.hammer == HammerState::Rest) {
          s.hammer = HammerState::Latched;
          out.hammer.push_back({HammerEventKind::Latched, s.t_ns});
        }
        break;
      case CommandKind::MagnetOn:
        s.magnet_on = true;
        break;
      case CommandKind::MagnetOff:
        s.magnet_on = false;
        if (s.hammer == HammerState::Latched) {
          s.hammer = HammerState::Falling;
          s.strike_at_ns = s.t_ns + std::llround(cfg.hammer_travel_s * kNsPerS);
          out.hammer.push_back({HammerEventKind::Released, s.t_ns});
        }
        break;
      case CommandKind::SetGains:
        s.mic_gain_db = c.mic_gain_db;
        s.hammer_gain_db = c.hammer_gain_db;
        break;
    }
  }

  const std::int64_t t0 = s.t_ns;
  const std::int64_t t1 = t0 + std::llround(dt_s * kNsPerS);
  const auto& obj = world.objects.at(static_cast<std::size_t>(s.object_index));
  const DevicePose pose = s.pose(world);

  if (s.hammer == HammerState::Falling && s.strike_at_ns < t1) {
    HammerPulse pulse{cfg.hammer_strike_n, cfg.hammer_width_samples, 0};
    auto signals = std::make_shared<ImpactSignals>(
        cfg.bounce_ratio > 0.0
            ? synth_double_hit(obj, s.point, pulse,
                               static_cast<int>(std::lround(cfg.bounce_delay_s * cfg.sample_rate_hz)),
                               cfg.bounce_ratio, cfg.sample_rate_hz, cfg.impact_duration_s)
            : synth_impact(obj, s.point, pulse, cfg.sample_rate_hz, cfg.impact_duration_s));
    const auto start = static_cast<std::uint64_t>(
        (s.strike_at_ns * static_cast<std::int64_t>(cfg.sample_rate_hz) + kNsPerS - 1) / kNsPerS);
    s.impacts.push_back({start, std::move(signals)});
    s.hammer = HammerState::Rest;
    out.hammer.push_back({HammerEventKind::Struck, std::max(s.strike_at_ns, t0)});
  }

  auto force_at = [&](std::int64_t ts) {
    if (!s.pressing) return 0.0;
    return std::max(0.0, s.press_profile.at(static_cast<double>(ts - s.press_start_ns) / kNsPerS));
  };

  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::int64_t ts; (ts = emission_time(s.next_force, cfg.force_rate_hz)) < t1; ++s.next_force) {
    const double f = force_at(ts);
    double measured = f;
    if (cfg.force_noise_n > 0.0) measured += cfg.force_noise_n * noise(s.rng);
    out.force.push_back({ts, load_cell_counts(measured, pose, cfg.load_cell), f});
    out.accel.push_back(accel_pose(pose, ts));
  }
  for (std::int64_t ts; (ts = emission_time(s.next_rgbd, cfg.rgbd_rate_hz)) < t1; ++s.next_rgbd)
    out.rgbd.push_back(render_rgbd(obj, pose, cfg.camera, ts));
  for (std::int64_t ts; (ts = emission_time(s.next_tactile, cfg.tactile_rate_hz)) < t1; ++s.next_tactile) {
    const double f = force_at(ts);
    out.tactile.push_back({ts, tactile_image(obj, s.point, f, pose, cfg.tactile), f});
  }

  const auto end_sample =
      static_cast<std::uint64_t>(t1 * static_cast<std::int64_t>(cfg.sample_rate_hz) / kNsPerS);
  if (end_sample > s.audio_cursor) {
    const auto n = static_cast<std::size_t>(end_sample - s.audio_cursor);
    std::vector<double> mic(n, 0.0), hammer(n, 0.0);
    for (const auto& imp : s.impacts) {
      const auto& sig = *imp.signals;
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t abs = s.audio_cursor + i;
        if (abs < imp.start_sample) continue;
        const auto k = static_cast<std::size_t>(abs - imp.start_sample);
        if (k >= sig.mic.size()) break;
        mic[i] += sig.mic[k];
        hammer[i] += sig.hammer[k];
      }
    }
    const double mic_k = std::pow(10.0, s.mic_gain_db / 20.0) / cfg.audio_chain.mic_fullscale;
    const double ham_k = std::pow(10.0, s.hammer_gain_db / 20.0) / cfg.audio_chain.hammer_fullscale_n;
    out.audio.start_sample = s.audio_cursor;
    out.audio.mic.resize(n);
    out.audio.hammer.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.audio.mic[i] = static_cast<float>(std::clamp(mic[i] * mic_k, -1.0, 1.0));
      out.audio.hammer[i] = static_cast<float>(std::clamp(hammer[i] * ham_k, -1.0, 1.0));
    }
    s.audio_cursor = end_sample;
    std::erase_if(s.impacts, [&](const ScheduledImpact& imp) {
      return imp.start_sample + imp.signals->mic.size() <= s.audio_cursor;
    });
  } else {
    out.audio.start_sample = s.audio_cursor;
  }

  s.t_ns = t1;
  return {std::move(s), std::move(out)};
}

OperatorScript::OperatorScript(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), fired_(entries_.size(), false) {}

std::vector<Command> OperatorScript::due(std::int64_t now_ns, const std::string& phase) {
  if (phase != phase_) {
    phase_ = phase;
    phase_since_ns_ = now_ns;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].on_phase && *entries_[i].on_phase == phase) fired_[i] = false;
  }
  std::vector<Command> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (fired_[i]) continue;
    const auto& e = entries_[i];
    std::int64_t at = 0;
    if (e.at_s) {
      at = std::llround(*e.at_s * kNsPerS);
    } else if (e.on_phase && *e.on_phase == phase_) {
      at = phase_since_ns_ + std::llround(e.after_s * kNsPerS);
    } else {
      continue;
    }
    if (now_ns >= at) {
      out.push_back(e.command);
      fired_[i] = true;
    }
  }
  return out;
}

Scenario parse_scenario(const json& j) {
  Scenario sc;
  try {
    const auto seed = j.value("seed", std::uint64_t{1});
    sc.world.config = parse_config(j.value("config", json()), seed);
    for (const auto& o : j.at("objects")) sc.world.objects.push_back(parse_object(o, sc.world.config.sample_rate_hz));
    for (const auto& e : j.value("operator", json::array())) {
      ScriptEntry entry;
      if (e.contains("at_s")) entry.at_s = e.at("at_s").get<double>();
      if (e.contains("on_phase")) entry.on_phase = e.at("on_phase").get<std::string>();
      entry.after_s = e.value("after_s", 0.0);
      entry.command = parse_command(e);
      sc.script.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("scenario: ") + e.what());
  }
  if (sc.world.objects.empty()) throw ArgumentError("scenario: no objects");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open scenario " + path);
  try {
    return parse_scenario(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace xcap::simrig
