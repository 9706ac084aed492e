#pragma once

#include <atomic>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcap/audio/dsp.hpp"
#include "xcap/bridge/backend.hpp"
#include "xcap/bridge/hub.hpp"
#include "xcap/capture/hammer.hpp"
#include "xcap/capture/session.hpp"

namespace xcap::bridge {

struct DaemonConfig {
  capture::SessionConfig session;
  audio::AgcConfig agc;
  double reference_gain_db = 0.0;
  double max_secondary_ratio = 0.2;
  double telemetry_force_hz = 20.0;
  double telemetry_image_hz = 10.0;
  std::size_t spectrogram_window = 1024;
  std::size_t spectrogram_hop = 1024;
  double impulse_plot_s = 0.1;  // hammer samples sent either side of the impact
  std::filesystem::path dataset_root;
  bool use_backend_calibration = true;
  // In-process operator that walks every backend object through all points.
  bool auto_operator = false;
  int max_objects = 0;  // 0 = every object the backend knows
};

/// Reads the "session", "agc" and daemon keys; missing keys keep defaults.
DaemonConfig daemon_config_from_json(const nlohmann::json& j);

/// Owns the capture session. Everything runs on the thread that calls tick();
/// connections talk to it only through the Hub.
class Daemon {
 public:
  Daemon(DaemonConfig cfg, std::unique_ptr<SensorBackend> backend, std::shared_ptr<Hub> hub);

  /// One control period: queued commands, sensor readings, hammer sequencing,
  /// telemetry and persistence.
  void tick();
  /// Ticks until stop is set or the auto operator has finished. Paced to the
  /// tick rate when realtime, otherwise as fast as possible.
  void run(const std::atomic<bool>& stop, bool realtime);

  [[nodiscard]] const capture::SessionState& state() const { return state_; }
  [[nodiscard]] std::int64_t now_ns() const { return now_ns_; }
  [[nodiscard]] bool finished() const { return finished_; }
  [[nodiscard]] int persisted_points() const { return persisted_; }
  [[nodiscard]] int audio_takes() const { return audio_takes_; }
  [[nodiscard]] const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  [[nodiscard]] const DaemonConfig& config() const { return cfg_; }
  [[nodiscard]] SensorBackend& backend() { return *backend_; }
  [[nodiscard]] nlohmann::json state_payload() const;

 private:
  bool apply(const capture::Event& ev, std::optional<ClientId> from, std::optional<std::uint64_t> reply_to);
  void handle_command(const Inbound& in);
  void process_batch(SensorBatch& batch);
  void on_force(const model::ForceSample& raw);
  void handle_hammer_events(const std::vector<capture::HammerEvent>& events);
  void finish_take(const capture::HammerEvent& window);
  void on_phase_entered(capture::Phase previous);
  void persist();
  void auto_step();
  void publish_state(std::optional<std::uint64_t> reply_to);
  void audio_status(nlohmann::json payload);
  void error(std::optional<ClientId> to, std::optional<std::uint64_t> reply_to, const std::string& message);
  void note(const std::string& message);

  DaemonConfig cfg_;
  std::unique_ptr<SensorBackend> backend_;
  std::shared_ptr<Hub> hub_;
  capture::SessionState state_;
  capture::TriggerEngine trigger_;
  capture::HammerSequencer hammer_;
  capture::SampleBuffer samples_;
  std::int64_t now_ns_ = 0;

  std::optional<model::RgbdFrame> latest_rgbd_;
  std::vector<model::AccelPose> recent_accel_;
  std::optional<model::AccelPose> latest_accel_;
  double contact_force_n_ = 0.0;
  std::vector<model::ForceSample> force_log_;

  std::string label_;
  std::optional<model::Environment> environment_;
  std::string gains_object_;
  double mic_gain_db_ = 0.0;
  double hammer_gain_db_ = 0.0;
  std::vector<int> completed_points_;

  std::int64_t last_force_pub_ = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_rgb_pub_ = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_tactile_pub_ = std::numeric_limits<std::int64_t>::min();

  std::optional<ClientId> local_operator_;
  std::uint64_t local_seq_ = 0;
  std::int64_t phase_entered_ns_ = 0;
  bool finished_ = false;
  int persisted_ = 0;
  int audio_takes_ = 0;
  std::vector<std::string> diagnostics_;
};

}  // namespace xcap::bridge
