#include "xcap/bridge/backend.hpp"

#include <algorithm>

#include "xcap/error.hpp"

namespace xcap::bridge {

using simrig::Command;
using simrig::CommandKind;
using simrig::ScriptEntry;

std::vector<ScriptEntry> default_operator_script() {
  auto on = [](std::string phase, double after, Command c) {
    ScriptEntry e;
    e.on_phase = std::move(phase);
    e.after_s = after;
    e.command = std::move(c);
    return e;
  };
  Command approach;
  approach.kind = CommandKind::Approach;
  approach.distance_m = 0.10;
  Command press;
  press.kind = CommandKind::Press;
  press.profile = simrig::ForceProfile::ramp(22.0, 2.2, 0.5);
  Command lift;
  lift.kind = CommandKind::Lift;
  Command pull;
  pull.kind = CommandKind::PullHammer;
  return {on("RgbdTargeting", 0.0, approach), on("TactileApproach", 0.1, press), on("TactileDone", 0.0, lift),
          on("AudioArmed", 0.3, pull)};
}

SimBackend::SimBackend(simrig::Scenario scenario)
    : world_(std::move(scenario.world)),
      state_(simrig::initial_state(world_)),
      script_(scenario.script.empty() ? default_operator_script() : std::move(scenario.script)) {}

SensorBatch SimBackend::advance(double dt_s) {
  auto cmds = script_.due(state_.t_ns, phase_);
  cmds.insert(cmds.begin(), pending_.begin(), pending_.end());
  pending_.clear();
  auto [next, r] = simrig::step(world_, std::move(state_), cmds, dt_s);
  state_ = std::move(next);

  SensorBatch b;
  b.now_ns = state_.t_ns;
  b.force.reserve(r.force.size());
  for (const auto& f : r.force) b.force.push_back({f.timestamp_ns, f.raw_counts, 0.0});
  b.accel = std::move(r.accel);
  b.rgbd = std::move(r.rgbd);
  for (auto& t : r.tactile) b.tactile.push_back({t.timestamp_ns, std::move(t.image)});
  for (const auto& h : r.hammer)
    if (h.kind == simrig::HammerEventKind::Latched) b.hammer_latched.push_back(h.timestamp_ns);
  b.audio_start = r.audio.start_sample;
  b.mic = std::move(r.audio.mic);
  b.hammer = std::move(r.audio.hammer);
  return b;
}

void SimBackend::set_magnet(bool on) {
  Command c;
  c.kind = on ? CommandKind::MagnetOn : CommandKind::MagnetOff;
  pending_.push_back(c);
}

void SimBackend::set_gains(double mic_gain_db, double hammer_gain_db) {
  Command c;
  c.kind = CommandKind::SetGains;
  c.mic_gain_db = mic_gain_db;
  c.hammer_gain_db = hammer_gain_db;
  pending_.push_back(c);
}

RgbImage SimBackend::capture_tactile() { return simrig::current_tactile(world_, state_); }

void SimBackend::on_point(const std::string& object_id, int point) {
  auto it = std::find_if(world_.objects.begin(), world_.objects.end(),
                         [&](const simrig::SimObject& o) { return o.object_id == object_id; });
  if (it == world_.objects.end()) return;  // unknown to the sim: keep the current object
  Command c;
  c.kind = CommandKind::SelectPoint;
  c.object_index = static_cast<int>(it - world_.objects.begin());
  c.point = std::min(point, static_cast<int>(it->points.size()) - 1);
  // Selection takes effect immediately so that the next frame already
  // shows the new point.
  state_.object_index = c.object_index;
  state_.point = c.point;
  state_.pressing = false;
}

std::vector<std::string> SimBackend::object_ids() const {
  std::vector<std::string> out;
  for (const auto& o : world_.objects) out.push_back(o.object_id);
  return out;
}

std::optional<ObjectInfo> SimBackend::object_info(const std::string& object_id) const {
  for (const auto& o : world_.objects)
    if (o.object_id == object_id) return ObjectInfo{o.label, o.environment};
  return std::nullopt;
}

std::optional<capture::ForceCalibration> SimBackend::self_calibrate() {
  const auto& truth = world_.config.load_cell;
  const double horizontal = simrig::load_cell_counts(0.0, simrig::DevicePose::tilted(0.0, 0.0), truth);
  // Pitch -90 degrees points the pressing axis straight down.
  const double vertical = simrig::load_cell_counts(0.0, simrig::DevicePose::tilted(-90.0, 0.0), truth);
  return capture::calibrate_two_pose(horizontal, vertical, truth.scale_n_per_count);
}

}  // namespace xcap::bridge
