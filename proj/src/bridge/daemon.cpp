#include "xcap/bridge/daemon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "xcap/capture/config.hpp"
#include "xcap/error.hpp"
#include "xcap/model/dataset.hpp"

namespace xcap::bridge {

using nlohmann::json;
using capture::Phase;
namespace ev = capture::event;

namespace {

std::size_t buffer_capacity(const capture::HammerConfig& h, int sr) {
  return static_cast<std::size_t>((h.record_pre_s + h.record_post_s + h.impact_timeout_s + 2.0) * sr);
}

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json pose_json(const model::AccelPose& p) {
  return {{"gravity_dir", vec3(p.gravity_dir)}, {"raw_accel", vec3(p.raw_accel)}, {"timestamp_ns", p.timestamp_ns}};
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

DaemonConfig daemon_config_from_json(const json& j) {
  DaemonConfig c;
  if (!j.is_object()) throw ParseError("daemon config: expected an object");
  try {
    if (j.contains("session")) c.session = capture::session_config_from_json(j.at("session"));
    if (j.contains("agc")) {
      const auto& a = j.at("agc");
      read(a, "default_gain_db", c.agc.default_gain_db);
      read(a, "target_peak_dbfs", c.agc.target_peak_dbfs);
      read(a, "accept_min_dbfs", c.agc.accept_min_dbfs);
      read(a, "accept_max_dbfs", c.agc.accept_max_dbfs);
      read(a, "clip_threshold", c.agc.clip_threshold);
      if (a.contains("range")) {
        const auto& r = a.at("range");
        read(r, "min_db", c.agc.range.min_db);
        read(r, "max_db", c.agc.range.max_db);
        read(r, "step_db", c.agc.range.step_db);
        read(r, "max_step_db", c.agc.range.max_step_db);
      }
    }
    read(j, "reference_gain_db", c.reference_gain_db);
    read(j, "max_secondary_ratio", c.max_secondary_ratio);
    read(j, "telemetry_force_hz", c.telemetry_force_hz);
    read(j, "telemetry_image_hz", c.telemetry_image_hz);
    read(j, "spectrogram_window", c.spectrogram_window);
    read(j, "spectrogram_hop", c.spectrogram_hop);
    read(j, "use_backend_calibration", c.use_backend_calibration);
  } catch (const json::exception& e) {
    throw ParseError(std::string("daemon config: ") + e.what());
  }
  audio::validate(c.agc);
  return c;
}

Daemon::Daemon(DaemonConfig cfg, std::unique_ptr<SensorBackend> backend, std::shared_ptr<Hub> hub)
    : cfg_(std::move(cfg)),
      backend_(std::move(backend)),
      hub_(std::move(hub)),
      trigger_(cfg_.session.trigger),
      hammer_(cfg_.session.hammer, backend_->sample_rate_hz()),
      samples_(buffer_capacity(cfg_.session.hammer, backend_->sample_rate_hz())) {
  if (!backend_ || !hub_) throw ArgumentError("daemon: backend and hub are required");
  if (cfg_.use_backend_calibration)
    if (auto cal = backend_->self_calibrate()) cfg_.session.calibration = *cal;
  capture::validate(cfg_.session);
  audio::validate(cfg_.agc);
  mic_gain_db_ = hammer_gain_db_ = cfg_.agc.default_gain_db;
  backend_->set_gains(mic_gain_db_, hammer_gain_db_);
  backend_->on_phase(capture::to_string(state_.phase));
  if (cfg_.auto_operator) local_operator_ = hub_->connect_local_operator();
  publish_state(std::nullopt);
}

void Daemon::note(const std::string& message) {
  diagnostics_.push_back(std::to_string(now_ns_) + " " + message);
  if (diagnostics_.size() > 1000) diagnostics_.erase(diagnostics_.begin());
}

void Daemon::error(std::optional<ClientId> to, std::optional<std::uint64_t> reply_to, const std::string& message) {
  json p{{"message", message}, {"phase", capture::to_string(state_.phase)}};
  if (reply_to) p["reply_to"] = *reply_to;
  note("error: " + message);
  if (to && to == local_operator_) return;
  hub_->publish(MessageType::Error, std::move(p), to);
}

json Daemon::state_payload() const {
  const auto& s = state_;
  json tactile = json::array();
  for (const auto& t : s.tactile)
    tactile.push_back({{"target_force_n", t.target_force_n},
                       {"measured_force_n", t.measured_force_n},
                       {"timestamp_ns", t.timestamp_ns}});
  json audio_j = nullptr;
  if (s.audio)
    audio_j = {{"verified", s.audio_verified},
               {"mic_gain_db", s.audio->mic_gain_db},
               {"hammer_gain_db", s.audio->hammer_gain_db},
               {"sample_rate_hz", s.audio->sample_rate_hz},
               {"samples", s.audio->mic_samples.size()}};
  json p{
      {"phase", capture::to_string(s.phase)},
      {"object_id", s.object_id},
      {"point_index", s.point_index},
      {"captured_targets", s.captured_targets},
      {"targets_n", cfg_.session.trigger.targets_n},
      {"reference_pose", s.reference_pose ? pose_json(*s.reference_pose) : json(nullptr)},
      {"pending_retake", s.pending_retake ? json(capture::to_string(*s.pending_retake)) : json(nullptr)},
      {"rgbd", s.rgbd ? json{{"timestamp_ns", s.rgbd->timestamp_ns},
                             {"center_depth_m", s.rgbd->center_depth_m ? json(*s.rgbd->center_depth_m) : json(nullptr)}}
                      : json(nullptr)},
      {"tactile", tactile},
      {"audio", audio_j},
      {"label", label_},
      {"environment", environment_ ? json(model::to_string(*environment_)) : json(nullptr)},
      {"gains", {{"mic_gain_db", mic_gain_db_}, {"hammer_gain_db", hammer_gain_db_}}},
      {"completed_points", completed_points_},
      {"persisted_points", persisted_},
      {"finished", finished_},
      {"time_ns", now_ns_},
  };
  if (latest_rgbd_) p["depth_status"] = capture::to_string(capture::depth_gate_check(*latest_rgbd_, cfg_.session.depth_gate));
  return p;
}

void Daemon::audio_status(json payload) {
  note("audio " + payload.dump());
  hub_->publish(MessageType::AudioStatus, std::move(payload));
}

void Daemon::publish_state(std::optional<std::uint64_t> reply_to) {
  json p = state_payload();
  if (reply_to) p["reply_to"] = *reply_to;
  hub_->publish(MessageType::StateUpdate, std::move(p));
}

bool Daemon::apply(const capture::Event& event, std::optional<ClientId> from, std::optional<std::uint64_t> reply_to) {
  const Phase before = state_.phase;
  auto t = capture::advance(state_, event, cfg_.session);
  if (!t.accepted) {
    if (from) {
      error(from, reply_to, t.diagnostic);
    } else {
      note(std::string(capture::event_name(event)) + " rejected: " + t.diagnostic);
    }
    return false;
  }
  state_ = std::move(t.state);
  if (state_.phase != before || std::holds_alternative<ev::Retake>(event)) on_phase_entered(before);
  publish_state(reply_to);
  if (state_.phase == Phase::AudioDone) {
    const Phase b2 = state_.phase;
    auto fin = capture::advance(state_, ev::Finalize{}, cfg_.session);
    if (fin.accepted) {
      state_ = std::move(fin.state);
      on_phase_entered(b2);
      publish_state(std::nullopt);
    } else {
      note("Finalize rejected: " + fin.diagnostic);
    }
  }
  return true;
}

void Daemon::on_phase_entered(Phase previous) {
  phase_entered_ns_ = now_ns_;
  backend_->on_phase(capture::to_string(state_.phase));
  const bool hammer_phase = state_.phase == Phase::AudioArmed || state_.phase == Phase::AudioReleased;
  if (!hammer_phase && (previous == Phase::AudioArmed || previous == Phase::AudioReleased)) {
    if (hammer_.stage() != capture::HammerSequencer::Stage::Finished) {
      hammer_.cancel();
      backend_->set_magnet(false);
    }
  }
  switch (state_.phase) {
    case Phase::TactileApproach:
      trigger_.reset();
      break;
    case Phase::AudioArmed:
      backend_->set_gains(mic_gain_db_, hammer_gain_db_);
      for (const auto& e : hammer_.arm(state_, now_ns_))
        if (e.step == capture::HammerStep::MagnetOn) backend_->set_magnet(true);
      audio_status(
                    {{"stage", "armed"}, {"mic_gain_db", mic_gain_db_}, {"hammer_gain_db", hammer_gain_db_}});
      break;
    case Phase::PointComplete:
      persist();
      break;
    default:
      break;
  }
}

void Daemon::persist() {
  auto record = capture::completed_record(state_);
  if (!record) {
    error(std::nullopt, std::nullopt, "point complete without a full record");
    return;
  }
  record->force_log = force_log_;
  if (std::find(completed_points_.begin(), completed_points_.end(), state_.point_index) == completed_points_.end()) {
    completed_points_.push_back(state_.point_index);
    std::sort(completed_points_.begin(), completed_points_.end());
  }
  if (cfg_.dataset_root.empty()) {
    note("no dataset root; point " + state_.object_id + "/" + std::to_string(state_.point_index) + " not written");
    ++persisted_;
    return;
  }
  try {
    model::write_point_record(*record, cfg_.dataset_root);
    model::ObjectRecord meta{state_.object_id, label_, environment_, {}};
    model::write_object_meta(cfg_.dataset_root, meta);
    model::write_manifest(model::build_manifest(cfg_.dataset_root));
    ++persisted_;
  } catch (const std::exception& e) {
    error(std::nullopt, std::nullopt, std::string("persist failed: ") + e.what());
  }
}

void Daemon::handle_command(const Inbound& in) {
  const WireMessage& m = in.msg;
  const std::uint64_t reply_to = m.seq;
  if (!is_command(m.type)) {
    error(in.from, reply_to, std::string(to_string(m.type)) + " is not a command");
    return;
  }
  if (!hub_->is_operator(in.from)) {
    error(in.from, reply_to, "read-only viewer: commands require the operator connection");
    return;
  }
  try {
    const json& p = m.payload;
    switch (m.type) {
      case MessageType::SnapshotRgbd: {
        if (!latest_rgbd_) {
          error(in.from, reply_to, "no rgbd frame received yet");
          return;
        }
        const auto ts = latest_rgbd_->timestamp_ns;
        const auto best = std::min_element(recent_accel_.begin(), recent_accel_.end(), [ts](const auto& a, const auto& b) {
          return std::llabs(a.timestamp_ns - ts) < std::llabs(b.timestamp_ns - ts);
        });
        if (best == recent_accel_.end()) {
          error(in.from, reply_to, "no accelerometer reading received yet");
          return;
        }
        apply(ev::SnapshotRgbd{*latest_rgbd_, *best}, in.from, reply_to);
        return;
      }
      case MessageType::BeginTactile:
        apply(ev::BeginTactile{}, in.from, reply_to);
        return;
      case MessageType::ArmHammer:
        apply(ev::ArmHammer{}, in.from, reply_to);
        return;
      case MessageType::Retake: {
        const auto name = p.at("modality").get<std::string>();
        const auto mod = capture::capture_modality_from_string(name);
        if (!mod) {
          error(in.from, reply_to, "unknown modality '" + name + "' (rgbd, tactile, audio)");
          return;
        }
        apply(ev::Retake{*mod}, in.from, reply_to);
        return;
      }
      case MessageType::NextPoint: {
        const auto object_id = p.at("object_id").get<std::string>();
        const int point = p.at("point_index").get<int>();
        const std::string previous_object = state_.object_id;
        auto t = capture::advance(state_, ev::NextPoint{object_id, point}, cfg_.session);
        if (!t.accepted) {
          error(in.from, reply_to, t.diagnostic);
          return;
        }
        if (object_id != previous_object) {
          completed_points_.clear();
          label_.clear();
          environment_.reset();
          if (auto info = backend_->object_info(object_id)) {
            label_ = info->label;
            environment_ = info->environment;
          }
        }
        if (object_id != gains_object_) {
          gains_object_ = object_id;
          mic_gain_db_ = hammer_gain_db_ = cfg_.agc.default_gain_db;
          backend_->set_gains(mic_gain_db_, hammer_gain_db_);
        }
        force_log_.clear();
        latest_rgbd_.reset();
        backend_->on_point(object_id, point);
        const Phase before = state_.phase;
        state_ = std::move(t.state);
        on_phase_entered(before);
        publish_state(reply_to);
        return;
      }
      case MessageType::SetLabel:
        label_ = p.at("label").get<std::string>();
        publish_state(reply_to);
        return;
      case MessageType::SetEnvironment: {
        const auto& e = p.at("environment");
        if (e.is_null()) {
          environment_.reset();
        } else {
          const auto env = model::environment_from_string(e.get<std::string>());
          if (!env) {
            error(in.from, reply_to, "unknown environment '" + e.get<std::string>() + "'");
            return;
          }
          environment_ = env;
        }
        publish_state(reply_to);
        return;
      }
      case MessageType::SetConfig: {
        if (state_.phase != Phase::Idle && state_.phase != Phase::PointComplete) {
          error(in.from, reply_to, "SetConfig only allowed in Idle or PointComplete");
          return;
        }
        json merged = capture::to_json(cfg_.session);
        merged.merge_patch(p.contains("session") ? p.at("session") : p);
        auto next = capture::session_config_from_json(merged);
        trigger_ = capture::TriggerEngine(next.trigger);
        hammer_ = capture::HammerSequencer(next.hammer, backend_->sample_rate_hz());
        cfg_.session = std::move(next);
        publish_state(reply_to);
        return;
      }
      default:
        error(in.from, reply_to, "unsupported command");
        return;
    }
  } catch (const nlohmann::json::exception& e) {
    error(in.from, reply_to, std::string("malformed ") + std::string(to_string(m.type)) + " payload: " + e.what());
  } catch (const xcap::Error& e) {
    error(in.from, reply_to, e.what());
  }
}

void Daemon::on_force(const model::ForceSample& raw) {
  const model::AccelPose pose = latest_accel_.value_or(model::AccelPose{});
  const double f = capture::contact_force(raw.raw_counts, pose, cfg_.session.calibration);
  contact_force_n_ = f;
  if (state_.phase != Phase::Idle && state_.phase != Phase::PointComplete)
    force_log_.push_back({raw.timestamp_ns, raw.raw_counts, f});

  const double period = 1e9 / cfg_.telemetry_force_hz;
  if (static_cast<double>(raw.timestamp_ns) - static_cast<double>(last_force_pub_) >= period) {
    last_force_pub_ = raw.timestamp_ns;
    hub_->publish(MessageType::ForceReading,
                  {{"timestamp_ns", raw.timestamp_ns}, {"raw_counts", raw.raw_counts}, {"contact_force_n", f}});
    json a = pose_json(pose);
    if (state_.reference_pose) {
      const auto m = capture::angle_match(pose, *state_.reference_pose, cfg_.session.angle_tolerance_deg);
      a["angle_deg"] = m.angle_deg;
      a["angle_match"] = m.matched;
    }
    hub_->publish(MessageType::AccelReading, std::move(a));
  }

  if (state_.phase == Phase::TactileApproach && f > cfg_.session.contact_threshold_n) {
    apply(ev::ContactDetected{}, std::nullopt, std::nullopt);
    return;
  }
  if (state_.phase == Phase::TactilePressing) {
    if (auto fire = trigger_.push(raw.timestamp_ns, f)) {
      model::TactileSnapshot snap;
      snap.image = backend_->capture_tactile();
      snap.target_force_n = fire->target_n;
      snap.measured_force_n = fire->measured_n;
      snap.pose = pose;
      snap.timestamp_ns = fire->timestamp_ns;
      apply(ev::TactileCaptured{std::move(snap)}, std::nullopt, std::nullopt);
    }
  }
}

void Daemon::process_batch(SensorBatch& b) {
  // Accelerometer and load cell interleaved by timestamp.
  std::size_t ai = 0;
  for (const auto& f : b.force) {
    while (ai < b.accel.size() && b.accel[ai].timestamp_ns <= f.timestamp_ns) {
      latest_accel_ = b.accel[ai];
      recent_accel_.push_back(b.accel[ai]);
      ++ai;
    }
    on_force(f);
  }
  for (; ai < b.accel.size(); ++ai) {
    latest_accel_ = b.accel[ai];
    recent_accel_.push_back(b.accel[ai]);
  }
  if (recent_accel_.size() > 64) recent_accel_.erase(recent_accel_.begin(), recent_accel_.end() - 64);

  const double image_period = 1e9 / cfg_.telemetry_image_hz;
  for (auto& frame : b.rgbd) {
    latest_rgbd_ = frame;
    if (static_cast<double>(frame.timestamp_ns) - static_cast<double>(last_rgb_pub_) >= image_period) {
      last_rgb_pub_ = frame.timestamp_ns;
      hub_->publish(MessageType::RgbFrame, image_payload(frame.rgb, frame.timestamp_ns));
      json d = image_payload(frame.depth, frame.timestamp_ns);
      d["center_depth_m"] = frame.center_depth_m ? json(*frame.center_depth_m) : json(nullptr);
      d["depth_status"] = capture::to_string(capture::depth_gate_check(frame, cfg_.session.depth_gate));
      d["gate"] = {{"min_m", cfg_.session.depth_gate.min_m}, {"max_m", cfg_.session.depth_gate.max_m}};
      hub_->publish(MessageType::DepthFrame, std::move(d));
    }
  }
  for (const auto& t : b.tactile) {
    if (static_cast<double>(t.timestamp_ns) - static_cast<double>(last_tactile_pub_) >= image_period) {
      last_tactile_pub_ = t.timestamp_ns;
      json p = image_payload(t.image, t.timestamp_ns);
      p["contact_force_n"] = contact_force_n_;
      hub_->publish(MessageType::TactileFrame, std::move(p));
    }
  }

  for (auto ts : b.hammer_latched) hammer_.on_latched(ts);
  if (!b.mic.empty()) samples_.append(b.audio_start, b.mic, b.hammer);
  handle_hammer_events(hammer_.tick(b.now_ns, b.audio_start, b.hammer));
}

void Daemon::handle_hammer_events(const std::vector<capture::HammerEvent>& events) {
  for (const auto& e : events) {
    switch (e.step) {
      case capture::HammerStep::MagnetOn:
        backend_->set_magnet(true);
        break;
      case capture::HammerStep::MagnetOff:
        backend_->set_magnet(false);
        audio_status({{"stage", "released"}, {"timestamp_ns", e.timestamp_ns}});
        apply(ev::HammerReleased{}, std::nullopt, std::nullopt);
        break;
      case capture::HammerStep::ImpactDetected:
        audio_status({{"stage", "impact"}, {"timestamp_ns", e.timestamp_ns}, {"impact_sample", e.impact_sample}});
        break;
      case capture::HammerStep::RecordingWindow:
        finish_take(e);
        break;
      case capture::HammerStep::Aborted:
      case capture::HammerStep::AudioFailed:
        backend_->set_magnet(false);
        audio_status({{"stage", "failed"}, {"reason", e.reason}});
        apply(ev::AudioFailed{e.reason}, std::nullopt, std::nullopt);
        break;
    }
  }
}

void Daemon::finish_take(const capture::HammerEvent& w) {
  const int sr = backend_->sample_rate_hz();
  model::AudioTake take;
  try {
    samples_.extract(w.window_start, w.window_end, take.mic_samples, take.hammer_samples);
  } catch (const xcap::Error& e) {
    apply(ev::AudioFailed{e.what()}, std::nullopt, std::nullopt);
    return;
  }
  ++audio_takes_;
  take.sample_rate_hz = sr;
  take.mic_gain_db = mic_gain_db_;
  take.hammer_gain_db = hammer_gain_db_;
  take.reference_gain_db = cfg_.reference_gain_db;
  take.timestamp_ns = w.timestamp_ns;

  const auto impact = static_cast<std::size_t>(w.impact_sample - w.window_start);
  const auto half = static_cast<std::size_t>(cfg_.impulse_plot_s * sr);
  const std::size_t a = impact > half ? impact - half : 0;
  const std::size_t bnd = std::min(take.hammer_samples.size(), impact + half);
  hub_->publish(MessageType::HammerImpulse,
                {{"sample_rate_hz", sr},
                 {"start_sample", w.window_start + a},
                 {"impact_sample", w.impact_sample},
                 {"samples", encode_floats(std::span(take.hammer_samples).subspan(a, bnd - a))}});
  const auto spec = audio::spectrogram(take.mic_samples, sr, cfg_.spectrogram_window, cfg_.spectrogram_hop);
  std::vector<float> db;
  db.reserve(spec.magnitudes.size());
  for (double v : audio::magnitudes_db(spec)) db.push_back(static_cast<float>(v));
  hub_->publish(MessageType::SpectrogramFrame, {{"frames", spec.frames},
                                                {"bins", spec.bins},
                                                {"window_samples", spec.window_samples},
                                                {"hop_samples", spec.hop_samples},
                                                {"sample_rate_hz", sr},
                                                {"unit", "dB"},
                                                {"magnitudes", encode_floats(db)}});

  const auto dm = audio::agc_evaluate(take.mic_samples, mic_gain_db_, cfg_.agc);
  const auto dh = audio::agc_evaluate(take.hammer_samples, hammer_gain_db_, cfg_.agc);
  if (!dm.accept || !dh.accept) {
    mic_gain_db_ = dm.next_gain_db;
    hammer_gain_db_ = dh.next_gain_db;
    audio_status({{"stage", "gain_adjusted"},
                  {"mic_peak_dbfs", dm.peak_dbfs},
                  {"hammer_peak_dbfs", dh.peak_dbfs},
                  {"mic_clipped", dm.clipped},
                  {"hammer_clipped", dh.clipped},
                  {"mic_gain_db", mic_gain_db_},
                  {"hammer_gain_db", hammer_gain_db_}});
    apply(ev::AudioFailed{"gain adjusted"}, std::nullopt, std::nullopt);
    return;
  }

  audio::ImpulseInfo info;
  try {
    info = audio::find_impulse(take.hammer_samples, hammer_.noise_floor());
  } catch (const NoImpulseError& e) {
    audio_status({{"stage", "failed"}, {"reason", e.what()}});
    apply(ev::AudioFailed{e.what()}, std::nullopt, std::nullopt);
    return;
  }
  const bool clean = audio::verify_clean_impulse(info, cfg_.max_secondary_ratio);
  audio_status({{"stage", clean ? "captured" : "rejected"},
                {"secondary_peak_ratio", info.secondary_peak_ratio},
                {"mic_peak_dbfs", dm.peak_dbfs},
                {"hammer_peak_dbfs", dh.peak_dbfs}});
  if (!apply(ev::AudioCaptured{std::move(take), clean}, std::nullopt, std::nullopt))
    apply(ev::AudioFailed{"hammer impulse not clean"}, std::nullopt, std::nullopt);
}

void Daemon::auto_step() {
  if (finished_ || !local_operator_) return;
  auto objects = backend_->object_ids();
  if (cfg_.max_objects > 0 && static_cast<int>(objects.size()) > cfg_.max_objects)
    objects.resize(static_cast<std::size_t>(cfg_.max_objects));

  std::optional<WireMessage> cmd;
  auto make = [&](MessageType t, json p = json::object()) { cmd = WireMessage{t, ++local_seq_, std::move(p)}; };
  switch (state_.phase) {
    case Phase::Idle:
      if (objects.empty()) {
        finished_ = true;
        note("auto operator: backend has no objects");
        return;
      }
      make(MessageType::NextPoint, {{"object_id", objects.front()}, {"point_index", 0}});
      break;
    case Phase::RgbdTargeting:
      if (latest_rgbd_ && latest_rgbd_->timestamp_ns >= phase_entered_ns_ &&
          capture::depth_gate_check(*latest_rgbd_, cfg_.session.depth_gate) == capture::DepthStatus::InRange)
        make(MessageType::SnapshotRgbd);
      break;
    case Phase::RgbdCaptured:
      make(MessageType::BeginTactile);
      break;
    case Phase::TactilePressing:
      if (now_ns_ - phase_entered_ns_ > 10'000'000'000LL) make(MessageType::Retake, {{"modality", "tactile"}});
      break;
    case Phase::TactileDone:
      make(MessageType::ArmHammer);
      break;
    case Phase::PointComplete: {
      if (state_.point_index + 1 < model::kPointsPerObject) {
        make(MessageType::NextPoint, {{"object_id", state_.object_id}, {"point_index", state_.point_index + 1}});
        break;
      }
      auto it = std::find(objects.begin(), objects.end(), state_.object_id);
      if (it == objects.end() || std::next(it) == objects.end()) {
        finished_ = true;
        publish_state(std::nullopt);
        return;
      }
      make(MessageType::NextPoint, {{"object_id", *std::next(it)}, {"point_index", 0}});
      break;
    }
    default:
      break;
  }
  if (cmd) handle_command({*local_operator_, std::move(*cmd)});
}

void Daemon::tick() {
  for (const auto& in : hub_->drain()) handle_command(in);
  if (cfg_.auto_operator) auto_step();
  SensorBatch batch = backend_->advance(1.0 / cfg_.session.tick_rate_hz);
  now_ns_ = batch.now_ns;
  process_batch(batch);
}

void Daemon::run(const std::atomic<bool>& stop, bool realtime) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / cfg_.session.tick_rate_hz));
  auto next = clock::now();
  while (!stop.load() && !(cfg_.auto_operator && finished_)) {
    tick();
    if (realtime) {
      next += period;
      std::this_thread::sleep_until(next);
    }
  }
}

}  // namespace xcap::bridge
