#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xcap/capture/force.hpp"
#include "xcap/capture/gating.hpp"
#include "xcap/capture/trigger.hpp"
#include "xcap/model/types.hpp"

namespace xcap::capture {

enum class Phase {
  Idle,
  RgbdTargeting,
  RgbdCaptured,
  TactileApproach,
  TactilePressing,
  TactileDone,
  AudioArmed,
  AudioReleased,
  AudioDone,
  PointComplete,
};

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view name);

enum class CaptureModality { Rgbd, Tactile, Audio };

std::string_view to_string(CaptureModality m);
std::optional<CaptureModality> capture_modality_from_string(std::string_view name);

struct HammerConfig {
  double release_delay_s = 1.0;
  double record_pre_s = 0.1;
  double record_post_s = 2.0;
  double pull_timeout_s = 10.0;
  double impact_timeout_s = 1.0;
  double impact_threshold = 10.0;  // multiple of the rolling noise floor
  int noise_window_samples = 1024;
  double min_noise_floor = 1e-4;
};

void validate(const HammerConfig& cfg);

struct SessionConfig {
  TriggerConfig trigger;
  DepthGate depth_gate;
  HammerConfig hammer;
  ForceCalibration calibration;
  double angle_tolerance_deg = 10.0;
  double contact_threshold_n = 1.0;
  int accel_rate_hz = 200;
  int tick_rate_hz = 200;
};

void validate(const SessionConfig& cfg);

/// Per-point capture progress. The captured readings travel with the state
/// so that PointComplete always carries a full record.
struct SessionState {
  Phase phase = Phase::Idle;
  std::string object_id;
  int point_index = 0;
  std::vector<double> captured_targets;  // ascending
  std::optional<model::AccelPose> reference_pose;
  std::optional<CaptureModality> pending_retake;

  std::optional<model::RgbdFrame> rgbd;
  std::vector<model::TactileSnapshot> tactile;
  std::optional<model::AudioTake> audio;
  bool audio_verified = false;

  bool operator==(const SessionState&) const = default;
};

namespace event {

struct NextPoint {
  std::string object_id;
  int point_index = 0;
};
struct SnapshotRgbd {
  model::RgbdFrame frame;
  model::AccelPose pose;
};
struct BeginTactile {};
struct ContactDetected {};
struct TactileCaptured {
  model::TactileSnapshot snapshot;
};
struct ArmHammer {};
struct HammerReleased {};
struct AudioCaptured {
  model::AudioTake take;
  bool verified = false;
};
struct AudioFailed {
  std::string reason;
};
struct Finalize {};
struct Retake {
  CaptureModality modality;
};

}  // namespace event

using Event = std::variant<event::NextPoint, event::SnapshotRgbd, event::BeginTactile,
                           event::ContactDetected, event::TactileCaptured, event::ArmHammer,
                           event::HammerReleased, event::AudioCaptured, event::AudioFailed,
                           event::Finalize, event::Retake>;

std::string_view event_name(const Event& e);

struct Transition {
  SessionState state;
  bool accepted = false;
  std::string diagnostic;  // reason for rejection, empty when accepted
};

/// Deterministic transition function. A rejected event leaves the state
/// unchanged and explains why.
Transition advance(const SessionState& state, const Event& event, const SessionConfig& cfg);

/// The captured point, available once the session reaches PointComplete.
std::optional<model::PointRecord> completed_record(const SessionState& state);

}  // namespace xcap::capture
