#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xcap/capture/force.hpp"
#include "xcap/model/types.hpp"
#include "xcap/simrig/simulator.hpp"

namespace xcap::bridge {

struct TimedImage {
  std::int64_t timestamp_ns = 0;
  RgbImage image;
};

/// Everything the sensors produced during one control period.
struct SensorBatch {
  std::int64_t now_ns = 0;  // end of the period
  std::vector<model::ForceSample> force;  // raw_counts set; contact force is derived later
  std::vector<model::AccelPose> accel;
  std::vector<model::RgbdFrame> rgbd;
  std::vector<TimedImage> tactile;
  std::vector<std::int64_t> hammer_latched;  // operator pulled the hammer onto the magnet
  std::uint64_t audio_start = 0;             // stream index of mic[0] / hammer[0]
  std::vector<float> mic;
  std::vector<float> hammer;
};

struct ObjectInfo {
  std::string label;
  std::optional<model::Environment> environment;
};

/// Device-side interface the daemon drives. Real hardware would implement
/// this over its drivers; the simulator implements it in-process.
class SensorBackend {
 public:
  virtual ~SensorBackend() = default;

  virtual SensorBatch advance(double dt_s) = 0;
  virtual void set_magnet(bool on) = 0;
  virtual void set_gains(double mic_gain_db, double hammer_gain_db) = 0;
  /// Tactile image at the current instant.
  virtual RgbImage capture_tactile() = 0;
  [[nodiscard]] virtual int sample_rate_hz() const = 0;

  virtual void on_phase(std::string_view /*phase*/) {}
  virtual void on_point(const std::string& /*object_id*/, int /*point*/) {}
  /// Objects the backend knows about (empty for real hardware).
  [[nodiscard]] virtual std::vector<std::string> object_ids() const { return {}; }
  [[nodiscard]] virtual std::optional<ObjectInfo> object_info(const std::string& /*object_id*/) const { return {}; }
  /// Two-pose no-contact calibration, when the backend can perform one.
  virtual std::optional<capture::ForceCalibration> self_calibrate() { return {}; }
};

/// Operator behaviour used when a scenario carries no script: approach to
/// 10 cm on targeting, a 22 N ramp press once tactile approach starts, lift
/// when tactile is done, pull the hammer after arming.
std::vector<simrig::ScriptEntry> default_operator_script();

class SimBackend : public SensorBackend {
 public:
  explicit SimBackend(simrig::Scenario scenario);

  SensorBatch advance(double dt_s) override;
  void set_magnet(bool on) override;
  void set_gains(double mic_gain_db, double hammer_gain_db) override;
  RgbImage capture_tactile() override;
  [[nodiscard]] int sample_rate_hz() const override { return world_.config.sample_rate_hz; }
  void on_phase(std::string_view phase) override { phase_ = phase; }
  void on_point(const std::string& object_id, int point) override;
  [[nodiscard]] std::vector<std::string> object_ids() const override;
  [[nodiscard]] std::optional<ObjectInfo> object_info(const std::string& object_id) const override;
  std::optional<capture::ForceCalibration> self_calibrate() override;

  /// Queues an operator action for the next period.
  void inject(simrig::Command c) { pending_.push_back(std::move(c)); }
  [[nodiscard]] const simrig::SimState& sim_state() const { return state_; }
  [[nodiscard]] const simrig::SimWorld& world() const { return world_; }

 private:
  simrig::SimWorld world_;
  simrig::SimState state_;
  simrig::OperatorScript script_;
  std::vector<simrig::Command> pending_;
  std::string phase_ = "Idle";
};

}  // namespace xcap::bridge
