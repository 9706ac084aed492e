#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "xcap/model/types.hpp"
#include "xcap/simrig/render.hpp"
#include "xcap/simrig/sim_object.hpp"

namespace xcap::simrig {

struct SimConfig {
  Camera camera;
  TactileSpec tactile;
  LoadCellTruth load_cell;
  AudioChain audio_chain;
  int sample_rate_hz = model::kDefaultSampleRateHz;
  int rgbd_rate_hz = 30;
  int force_rate_hz = 200;  // load cell and accelerometer
  int tactile_rate_hz = 30;
  double force_noise_n = 0.0;     // Gaussian, on the contact force
  double hammer_strike_n = 40.0;  // pulse amplitude of a released hammer
  int hammer_width_samples = 48;
  double hammer_travel_s = 0.02;  // magnet off -> strike
  double impact_duration_s = 2.5;
  // Optional second strike (bounce) after the first.
  double bounce_ratio = 0.0;
  double bounce_delay_s = 0.01;
  std::uint64_t seed = 1;
};

struct SimWorld {
  SimConfig config;
  std::vector<SimObject> objects;
};

enum class CommandKind {
  SelectPoint,  // object_index, point
  Approach,     // distance_m: camera to surface along the optical axis
  Tilt,         // pitch_deg, yaw_deg
  Press,        // profile
  Lift,
  PullHammer,
  MagnetOn,
  MagnetOff,
  SetGains,  // mic_gain_db, hammer_gain_db
};

struct Command {
  CommandKind kind = CommandKind::Lift;
  int object_index = 0;
  int point = 0;
  double distance_m = 0.10;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  ForceProfile profile;
  double mic_gain_db = 0.0;
  double hammer_gain_db = 0.0;
};

/// Parses {"cmd": "<name>", ...}. Unknown names raise ArgumentError.
Command parse_command(const nlohmann::json& j);
std::string_view to_string(CommandKind kind);

enum class HammerState { Rest, Latched, Falling };

struct ScheduledImpact {
  std::uint64_t start_sample = 0;
  std::shared_ptr<const ImpactSignals> signals;
};

struct SimState {
  std::int64_t t_ns = 0;
  int object_index = 0;
  int point = 0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double distance_m = 0.10;
  bool pressing = false;
  ForceProfile press_profile;
  std::int64_t press_start_ns = 0;
  bool magnet_on = false;
  HammerState hammer = HammerState::Rest;
  std::int64_t strike_at_ns = 0;
  double mic_gain_db = 0.0;
  double hammer_gain_db = 0.0;
  std::vector<ScheduledImpact> impacts;
  std::uint64_t audio_cursor = 0;  // next audio sample index to emit
  std::int64_t next_rgbd = 0;      // emission indices per stream
  std::int64_t next_force = 0;
  std::int64_t next_tactile = 0;
  std::mt19937_64 rng{1};

  [[nodiscard]] DevicePose pose(const SimWorld& world) const;
  [[nodiscard]] double applied_force_n() const;
};

SimState initial_state(const SimWorld& world);

struct ForceReading {
  std::int64_t timestamp_ns = 0;
  double raw_counts = 0.0;
  double true_force_n = 0.0;  // ground truth, not visible to the capture path
};

struct TactileFrame {
  std::int64_t timestamp_ns = 0;
  RgbImage image;
  double true_force_n = 0.0;
};

enum class HammerEventKind { Latched, Released, Struck };

struct HammerEvent {
  HammerEventKind kind;
  std::int64_t timestamp_ns = 0;
};

struct AudioBlock {
  std::uint64_t start_sample = 0;
  std::vector<float> mic;
  std::vector<float> hammer;
};

struct Readings {
  std::vector<ForceReading> force;
  std::vector<model::AccelPose> accel;
  std::vector<model::RgbdFrame> rgbd;
  std::vector<TactileFrame> tactile;
  std::vector<HammerEvent> hammer;
  AudioBlock audio;
};

/// Applies `commands` at the current time, then advances by dt_s and returns
/// every reading whose timestamp falls in [t, t + dt).
std::pair<SimState, Readings> step(const SimWorld& world, SimState state,
                                   std::span<const Command> commands, double dt_s);

/// Tactile image for the current contact (what a snapshot would capture).
RgbImage current_tactile(const SimWorld& world, const SimState& state);

/// One timed or phase-triggered operator action of a scenario.
struct ScriptEntry {
  std::optional<double> at_s;           // absolute sim time
  std::optional<std::string> on_phase;  // fires each time this phase is entered
  double after_s = 0.0;                 // delay after entering on_phase
  Command command;
};

/// Scripted operator: yields the commands that are due for a given sim time
/// and session phase.
class OperatorScript {
 public:
  OperatorScript() = default;
  explicit OperatorScript(std::vector<ScriptEntry> entries);

  std::vector<Command> due(std::int64_t now_ns, const std::string& phase);

 private:
  std::vector<ScriptEntry> entries_;
  std::vector<bool> fired_;
  std::string phase_;
  std::int64_t phase_since_ns_ = 0;
};

struct Scenario {
  SimWorld world;
  std::vector<ScriptEntry> script;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

}  // namespace xcap::simrig
