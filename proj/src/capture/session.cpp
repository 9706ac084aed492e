#include "xcap/capture/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "xcap/error.hpp"

namespace xcap::capture {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 10> kPhaseNames{{
    {Phase::Idle, "Idle"},
    {Phase::RgbdTargeting, "RgbdTargeting"},
    {Phase::RgbdCaptured, "RgbdCaptured"},
    {Phase::TactileApproach, "TactileApproach"},
    {Phase::TactilePressing, "TactilePressing"},
    {Phase::TactileDone, "TactileDone"},
    {Phase::AudioArmed, "AudioArmed"},
    {Phase::AudioReleased, "AudioReleased"},
    {Phase::AudioDone, "AudioDone"},
    {Phase::PointComplete, "PointComplete"},
}};

bool tactile_complete(const SessionState& s, const SessionConfig& cfg) {
  return s.captured_targets == cfg.trigger.targets_n && s.tactile.size() == cfg.trigger.targets_n.size();
}

bool audio_ready(const SessionState& s) { return s.audio.has_value() && s.audio_verified; }

std::string illegal(const Event& e, Phase p) {
  return std::string(event_name(e)) + " not allowed in phase " + std::string(to_string(p));
}

struct Advancer {
  const SessionState& cur;
  const SessionConfig& cfg;
  const Event& ev;

  Transition reject(std::string why) const { return {cur, false, std::move(why)}; }
  Transition reject_phase() const { return reject(illegal(ev, cur.phase)); }
  static Transition accept(SessionState s) { return {std::move(s), true, {}}; }

  bool in(std::initializer_list<Phase> phases) const {
    return std::find(phases.begin(), phases.end(), cur.phase) != phases.end();
  }

  Transition operator()(const event::NextPoint& e) const {
    if (!in({Phase::Idle, Phase::PointComplete})) return reject_phase();
    if (e.object_id.empty()) return reject("object_id must not be empty");
    if (e.point_index < 0 || e.point_index >= model::kPointsPerObject)
      return reject("point_index out of range");
    SessionState s;
    s.phase = Phase::RgbdTargeting;
    s.object_id = e.object_id;
    s.point_index = e.point_index;
    return accept(std::move(s));
  }

  Transition operator()(const event::SnapshotRgbd& e) const {
    if (!in({Phase::RgbdTargeting})) return reject_phase();
    const DepthStatus status = depth_gate_check(e.frame, cfg.depth_gate);
    if (status != DepthStatus::InRange)
      return reject("depth out of range (" + std::string(to_string(status)) + ")");
    const double period_ns = 1e9 / cfg.accel_rate_hz;
    if (!(std::abs(static_cast<double>(e.frame.timestamp_ns - e.pose.timestamp_ns)) < period_ns))
      return reject("accelerometer pose not simultaneous with rgbd frame");
    SessionState s = cur;
    s.rgbd = e.frame;
    s.reference_pose = e.pose;
    s.pending_retake.reset();
    if (tactile_complete(s, cfg))
      s.phase = audio_ready(s) ? Phase::AudioDone : Phase::TactileDone;
    else
      s.phase = Phase::RgbdCaptured;
    return accept(std::move(s));
  }

  Transition operator()(const event::BeginTactile&) const {
    if (!in({Phase::RgbdCaptured})) return reject_phase();
    SessionState s = cur;
    s.phase = Phase::TactileApproach;
    return accept(std::move(s));
  }

  Transition operator()(const event::ContactDetected&) const {
    if (!in({Phase::TactileApproach})) return reject_phase();
    SessionState s = cur;
    s.phase = Phase::TactilePressing;
    return accept(std::move(s));
  }

  Transition operator()(const event::TactileCaptured& e) const {
    if (!in({Phase::TactilePressing})) return reject_phase();
    const double target = e.snapshot.target_force_n;
    const auto& targets = cfg.trigger.targets_n;
    if (std::find(targets.begin(), targets.end(), target) == targets.end())
      return reject("unknown tactile target");
    if (std::find(cur.captured_targets.begin(), cur.captured_targets.end(), target) !=
        cur.captured_targets.end())
      return reject("tactile target already captured");
    if (!cur.captured_targets.empty() && target < cur.captured_targets.back())
      return reject("tactile targets must be captured in ascending order");
    if (std::abs(e.snapshot.measured_force_n - target) > cfg.trigger.window_n)
      return reject("measured force outside target window");
    SessionState s = cur;
    s.captured_targets.push_back(target);
    s.tactile.push_back(e.snapshot);
    if (tactile_complete(s, cfg)) {
      s.phase = audio_ready(s) ? Phase::AudioDone : Phase::TactileDone;
      s.pending_retake.reset();
    }
    return accept(std::move(s));
  }

  Transition operator()(const event::ArmHammer&) const {
    if (!in({Phase::TactileDone})) return reject_phase();
    SessionState s = cur;
    s.phase = Phase::AudioArmed;
    return accept(std::move(s));
  }

  Transition operator()(const event::HammerReleased&) const {
    if (!in({Phase::AudioArmed})) return reject_phase();
    SessionState s = cur;
    s.phase = Phase::AudioReleased;
    return accept(std::move(s));
  }

  Transition operator()(const event::AudioCaptured& e) const {
    if (!in({Phase::AudioReleased})) return reject_phase();
    if (!e.verified) return reject("audio take not verified as a clean impulse");
    SessionState s = cur;
    s.audio = e.take;
    s.audio_verified = true;
    s.pending_retake.reset();
    s.phase = Phase::AudioDone;
    return accept(std::move(s));
  }

  Transition operator()(const event::AudioFailed&) const {
    if (!in({Phase::AudioArmed, Phase::AudioReleased})) return reject_phase();
    SessionState s = cur;
    s.audio.reset();
    s.audio_verified = false;
    s.phase = Phase::TactileDone;
    return accept(std::move(s));
  }

  Transition operator()(const event::Finalize&) const {
    if (!in({Phase::AudioDone})) return reject_phase();
    if (!cur.rgbd || !cur.reference_pose) return reject("missing rgbd frame");
    if (!tactile_complete(cur, cfg)) return reject("tactile targets incomplete");
    if (!audio_ready(cur)) return reject("missing verified audio take");
    SessionState s = cur;
    s.phase = Phase::PointComplete;
    return accept(std::move(s));
  }

  Transition operator()(const event::Retake& e) const {
    SessionState s = cur;
    switch (e.modality) {
      case CaptureModality::Rgbd:
        if (!cur.rgbd || in({Phase::Idle, Phase::RgbdTargeting, Phase::AudioReleased}))
          return reject_phase();
        s.rgbd.reset();
        s.reference_pose.reset();
        if (!tactile_complete(s, cfg)) {
          s.tactile.clear();
          s.captured_targets.clear();
        }
        s.phase = Phase::RgbdTargeting;
        break;
      case CaptureModality::Tactile:
        if (!in({Phase::TactilePressing, Phase::TactileDone, Phase::AudioArmed, Phase::AudioDone,
                 Phase::PointComplete}))
          return reject_phase();
        s.tactile.clear();
        s.captured_targets.clear();
        s.phase = Phase::TactileApproach;
        break;
      case CaptureModality::Audio:
        if (!in({Phase::AudioDone, Phase::PointComplete})) return reject_phase();
        s.audio.reset();
        s.audio_verified = false;
        s.phase = Phase::AudioArmed;
        break;
    }
    s.pending_retake = e.modality;
    return accept(std::move(s));
  }
};

}  // namespace

std::string_view to_string(Phase p) {
  for (const auto& [ph, name] : kPhaseNames)
    if (ph == p) return name;
  return "Idle";
}

std::optional<Phase> phase_from_string(std::string_view name) {
  for (const auto& [ph, n] : kPhaseNames)
    if (n == name) return ph;
  return std::nullopt;
}

std::string_view to_string(CaptureModality m) {
  switch (m) {
    case CaptureModality::Rgbd: return "rgbd";
    case CaptureModality::Tactile: return "tactile";
    case CaptureModality::Audio: return "audio";
  }
  return "rgbd";
}

std::optional<CaptureModality> capture_modality_from_string(std::string_view name) {
  if (name == "rgbd") return CaptureModality::Rgbd;
  if (name == "tactile") return CaptureModality::Tactile;
  if (name == "audio") return CaptureModality::Audio;
  return std::nullopt;
}

void validate(const HammerConfig& cfg) {
  if (!(cfg.release_delay_s > 0 && cfg.record_pre_s > 0 && cfg.record_post_s > 0 &&
        cfg.pull_timeout_s > 0 && cfg.impact_timeout_s > 0 && cfg.impact_threshold > 0 &&
        cfg.min_noise_floor > 0))
    throw ArgumentError("hammer config: all durations and thresholds must be positive");
  if (cfg.noise_window_samples < 1) throw ArgumentError("hammer config: noise window must be >= 1");
}

void validate(const SessionConfig& cfg) {
  validate(cfg.trigger);
  validate(cfg.depth_gate);
  validate(cfg.hammer);
  validate(cfg.calibration);
  if (!(cfg.angle_tolerance_deg > 0)) throw ArgumentError("session config: angle tolerance must be positive");
  if (!(cfg.contact_threshold_n > 0)) throw ArgumentError("session config: contact threshold must be positive");
  if (cfg.accel_rate_hz <= 0 || cfg.tick_rate_hz <= 0)
    throw ArgumentError("session config: rates must be positive");
}

std::string_view event_name(const Event& e) {
  static constexpr std::array<std::string_view, std::variant_size_v<Event>> names{
      "NextPoint",   "SnapshotRgbd",   "BeginTactile",  "ContactDetected",
      "TactileCaptured", "ArmHammer", "HammerReleased", "AudioCaptured",
      "AudioFailed", "Finalize",       "Retake"};
  return names[e.index()];
}

Transition advance(const SessionState& state, const Event& event, const SessionConfig& cfg) {
  return std::visit(Advancer{state, cfg, event}, event);
}

std::optional<model::PointRecord> completed_record(const SessionState& state) {
  if (state.phase != Phase::PointComplete || !state.rgbd || !state.reference_pose || !state.audio)
    return std::nullopt;
  model::PointRecord r;
  r.object_id = state.object_id;
  r.point_index = state.point_index;
  r.rgbd = *state.rgbd;
  r.rgbd_pose = *state.reference_pose;
  r.tactile = state.tactile;
  r.audio = *state.audio;
  return r;
}

}  // namespace xcap::capture
