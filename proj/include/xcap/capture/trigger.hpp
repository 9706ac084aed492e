#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace xcap::capture {

struct TriggerConfig {
  std::vector<double> targets_n{10.0, 15.0, 20.0};
  double window_n = 0.5;
  int debounce_samples = 3;
};

/// Throws ArgumentError unless targets are strictly increasing, window > 0
/// and debounce >= 1.
void validate(const TriggerConfig& cfg);

struct ForcePoint {
  std::int64_t timestamp_ns = 0;
  double force_n = 0.0;
};

struct TriggerFire {
  std::int64_t timestamp_ns = 0;
  double target_n = 0.0;
  double measured_n = 0.0;

  bool operator==(const TriggerFire&) const = default;
};

/// Streaming form of trigger_snapshots. Only the lowest unfired target is
/// armed; it fires on the debounce_samples-th consecutive sample inside its
/// window. A target the force rises past without firing is skipped, so
/// firing order stays ascending and no target fires twice per press.
class TriggerEngine {
 public:
  explicit TriggerEngine(TriggerConfig cfg);

  std::optional<TriggerFire> push(std::int64_t timestamp_ns, double force_n);
  void reset();

  [[nodiscard]] bool exhausted() const { return next_ >= cfg_.targets_n.size(); }
  [[nodiscard]] const TriggerConfig& config() const { return cfg_; }

 private:
  TriggerConfig cfg_;
  std::size_t next_ = 0;
  int run_ = 0;
};

std::vector<TriggerFire> trigger_snapshots(std::span<const ForcePoint> stream,
                                           const TriggerConfig& cfg);

}  // namespace xcap::capture
