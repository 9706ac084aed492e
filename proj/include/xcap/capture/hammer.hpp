#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "xcap/capture/session.hpp"

namespace xcap::capture {

enum class HammerStep { MagnetOn, MagnetOff, ImpactDetected, RecordingWindow, AudioFailed, Aborted };

std::string_view to_string(HammerStep s);

struct HammerEvent {
  HammerStep step;
  std::int64_t timestamp_ns = 0;
  std::uint64_t impact_sample = 0;
  std::uint64_t window_start = 0;  // [start, end) in stream samples
  std::uint64_t window_end = 0;
  std::string reason;
};

/// Drives one hammer release: magnet on, wait for the operator to latch the
/// hammer, release after the configured delay, detect the impact on the
/// hammer channel and report the recording window around it. Ticked by the
/// session clock; every timing contract holds to within one tick.
class HammerSequencer {
 public:
  HammerSequencer(HammerConfig cfg, int sample_rate_hz);

  /// Requires phase AudioArmed. Emits MagnetOn.
  std::vector<HammerEvent> arm(const SessionState& session, std::int64_t now_ns);
  /// The operator has pulled the hammer onto the magnet.
  std::vector<HammerEvent> on_latched(std::int64_t now_ns);
  /// Feeds newly recorded hammer samples (contiguous stream) and the clock.
  std::vector<HammerEvent> tick(std::int64_t now_ns, std::uint64_t block_start,
                                std::span<const float> hammer_block);
  void cancel();

  enum class Stage { Idle, WaitingForPull, Timing, Released, Capturing, Finished };
  [[nodiscard]] Stage stage() const { return stage_; }
  [[nodiscard]] double noise_floor() const;

 private:
  HammerConfig cfg_;
  int sample_rate_hz_;
  Stage stage_ = Stage::Idle;
  std::int64_t armed_at_ = 0;
  std::int64_t latched_at_ = 0;
  std::int64_t released_at_ = 0;
  std::uint64_t impact_sample_ = 0;
  std::uint64_t samples_seen_ = 0;
  std::deque<float> recent_;  // |x| over the noise window
  double recent_sum_ = 0.0;
};

/// Keeps the recent mic/hammer stream so a window can be cut after the fact.
class SampleBuffer {
 public:
  explicit SampleBuffer(std::size_t capacity_samples);

  void append(std::uint64_t start_sample, std::span<const float> mic, std::span<const float> hammer);
  /// Samples in [start, end); throws ArgumentError when not fully buffered.
  void extract(std::uint64_t start, std::uint64_t end, std::vector<float>& mic,
               std::vector<float>& hammer) const;
  [[nodiscard]] std::uint64_t begin_sample() const { return begin_; }
  [[nodiscard]] std::uint64_t end_sample() const { return begin_ + mic_.size(); }

 private:
  std::size_t capacity_;
  std::uint64_t begin_ = 0;
  std::deque<float> mic_;
  std::deque<float> hammer_;
};

}  // namespace xcap::capture
