#include "xcap/capture/hammer.hpp"

#include <algorithm>
#include <cmath>

#include "xcap/error.hpp"

namespace xcap::capture {

std::string_view to_string(HammerStep s) {
  switch (s) {
    case HammerStep::MagnetOn: return "MagnetOn";
    case HammerStep::MagnetOff: return "MagnetOff";
    case HammerStep::ImpactDetected: return "ImpactDetected";
    case HammerStep::RecordingWindow: return "RecordingWindow";
    case HammerStep::AudioFailed: return "AudioFailed";
    case HammerStep::Aborted: return "Aborted";
  }
  return "Aborted";
}

HammerSequencer::HammerSequencer(HammerConfig cfg, int sample_rate_hz)
    : cfg_(cfg), sample_rate_hz_(sample_rate_hz) {
  validate(cfg_);
  if (sample_rate_hz_ <= 0) throw ArgumentError("hammer: sample rate must be positive");
}

double HammerSequencer::noise_floor() const {
  if (recent_.empty()) return cfg_.min_noise_floor;
  return std::max(recent_sum_ / static_cast<double>(recent_.size()), cfg_.min_noise_floor);
}

std::vector<HammerEvent> HammerSequencer::arm(const SessionState& session, std::int64_t now_ns) {
  if (session.phase != Phase::AudioArmed)
    throw ArgumentError("hammer: arm requires phase AudioArmed, got " + std::string(to_string(session.phase)));
  stage_ = Stage::WaitingForPull;
  armed_at_ = now_ns;
  return {HammerEvent{HammerStep::MagnetOn, now_ns, 0, 0, 0, {}}};
}

std::vector<HammerEvent> HammerSequencer::on_latched(std::int64_t now_ns) {
  if (stage_ == Stage::WaitingForPull) {
    stage_ = Stage::Timing;
    latched_at_ = now_ns;
  }
  return {};
}

void HammerSequencer::cancel() { stage_ = Stage::Idle; }

std::vector<HammerEvent> HammerSequencer::tick(std::int64_t now_ns, std::uint64_t block_start,
                                               std::span<const float> hammer_block) {
  std::vector<HammerEvent> out;
  const auto window = static_cast<std::size_t>(cfg_.noise_window_samples);
  for (std::size_t i = 0; i < hammer_block.size(); ++i) {
    const float a = std::abs(hammer_block[i]);
    if (stage_ == Stage::Released && a > cfg_.impact_threshold * noise_floor()) {
      impact_sample_ = block_start + i;
      stage_ = Stage::Capturing;
      out.push_back({HammerStep::ImpactDetected, now_ns, impact_sample_, 0, 0, {}});
    }
    if (stage_ != Stage::Capturing) {
      recent_.push_back(a);
      recent_sum_ += a;
      if (recent_.size() > window) {
        recent_sum_ -= recent_.front();
        recent_.pop_front();
      }
    }
  }
  if (!hammer_block.empty()) samples_seen_ = std::max(samples_seen_, block_start + hammer_block.size());

  const auto ns = [](double s) { return static_cast<std::int64_t>(std::llround(s * 1e9)); };
  switch (stage_) {
    case Stage::WaitingForPull:
      if (now_ns - armed_at_ >= ns(cfg_.pull_timeout_s)) {
        stage_ = Stage::Finished;
        out.push_back({HammerStep::Aborted, now_ns, 0, 0, 0, "no hammer pull before timeout"});
      }
      break;
    case Stage::Timing:
      if (now_ns - latched_at_ >= ns(cfg_.release_delay_s)) {
        stage_ = Stage::Released;
        released_at_ = now_ns;
        out.push_back({HammerStep::MagnetOff, now_ns, 0, 0, 0, {}});
      }
      break;
    case Stage::Released:
      if (now_ns - released_at_ >= ns(cfg_.impact_timeout_s)) {
        stage_ = Stage::Finished;
        out.push_back({HammerStep::AudioFailed, now_ns, 0, 0, 0, "no impact detected"});
      }
      break;
    case Stage::Capturing: {
      const auto pre = static_cast<std::uint64_t>(std::llround(cfg_.record_pre_s * sample_rate_hz_));
      const auto post = static_cast<std::uint64_t>(std::llround(cfg_.record_post_s * sample_rate_hz_));
      if (samples_seen_ >= impact_sample_ + post) {
        stage_ = Stage::Finished;
        HammerEvent ev{HammerStep::RecordingWindow, now_ns, impact_sample_, 0, 0, {}};
        ev.window_start = impact_sample_ >= pre ? impact_sample_ - pre : 0;
        ev.window_end = impact_sample_ + post;
        out.push_back(ev);
      }
      break;
    }
    case Stage::Idle:
    case Stage::Finished:
      break;
  }
  return out;
}

SampleBuffer::SampleBuffer(std::size_t capacity_samples) : capacity_(capacity_samples) {
  if (capacity_ == 0) throw ArgumentError("sample buffer: capacity must be positive");
}

void SampleBuffer::append(std::uint64_t start_sample, std::span<const float> mic,
                          std::span<const float> hammer) {
  if (mic.size() != hammer.size()) throw ArgumentError("sample buffer: channel length mismatch");
  if (mic_.empty() || start_sample != end_sample()) {
    mic_.clear();
    hammer_.clear();
    begin_ = start_sample;
  }
  mic_.insert(mic_.end(), mic.begin(), mic.end());
  hammer_.insert(hammer_.end(), hammer.begin(), hammer.end());
  while (mic_.size() > capacity_) {
    mic_.pop_front();
    hammer_.pop_front();
    ++begin_;
  }
}

void SampleBuffer::extract(std::uint64_t start, std::uint64_t end, std::vector<float>& mic,
                           std::vector<float>& hammer) const {
  if (start > end || start < begin_ || end > end_sample())
    throw ArgumentError("sample buffer: requested window not buffered");
  const auto a = static_cast<std::ptrdiff_t>(start - begin_);
  const auto b = static_cast<std::ptrdiff_t>(end - begin_);
  mic.assign(mic_.begin() + a, mic_.begin() + b);
  hammer.assign(hammer_.begin() + a, hammer_.begin() + b);
}

}  // namespace xcap::capture
