#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xcap/model/types.hpp"

namespace xcap::audio {

inline constexpr double kClipThreshold = 0.99;

double peak_abs(std::span<const float> samples);
/// 20·log10(linear); -inf for 0.
double to_dbfs(double linear);
double db_to_linear(double db);

/// True iff any |sample| >= threshold.
bool detect_clipping(std::span<const float> samples, double threshold = kClipThreshold);

struct GainRange {
  double min_db = -20.0;
  double max_db = 60.0;
  double step_db = 1.0;
  double max_step_db = 20.0;  // largest single adjustment without peak information
};

void validate(const GainRange& range);

/// prev_gain + (target - dBFS(prev_peak)), quantized to step_db and clamped to
/// the range. A silent previous take raises the gain by max_step_db.
double choose_gain(double prev_peak_linear, double prev_gain_db, double target_peak_dbfs,
                   const GainRange& range = {});

struct AgcConfig {
  double default_gain_db = 0.0;
  double target_peak_dbfs = -3.0;
  double accept_min_dbfs = -6.0;  // accepted peak band is [min, max)
  double accept_max_dbfs = 0.0;
  double clip_threshold = kClipThreshold;
  GainRange range;
};

void validate(const AgcConfig& cfg);

struct AgcDecision {
  bool accept = false;
  bool clipped = false;
  double peak_dbfs = 0.0;
  double next_gain_db = 0.0;  // gain for the next take (== current gain when accepted)
};

/// Judges one channel of a take recorded at gain_db. A clipped take backs
/// the gain off by max_step_db since its true peak is unknown.
AgcDecision agc_evaluate(std::span<const float> samples, double gain_db, const AgcConfig& cfg);

struct ImpulseInfo {
  std::size_t peak_index = 0;
  double peak_value = 0.0;
  double secondary_peak_ratio = 0.0;
  std::size_t window_start = 0;  // [start, end)
  std::size_t window_end = 0;
};

/// Peak at argmax |x|; the pulse window is the contiguous run around it with
/// |x| above window_fraction·peak. Throws NoImpulseError when the peak is not
/// above min_snr·noise_floor.
ImpulseInfo find_impulse(std::span<const float> hammer, double noise_floor,
                         double window_fraction = 0.05, double min_snr = 10.0);

/// secondary_peak_ratio <= max_secondary_ratio
bool verify_clean_impulse(const ImpulseInfo& info, double max_secondary_ratio = 0.2);

enum class WindowKind { Rectangular, Hann };

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window_samples = 0;
  std::size_t hop_samples = 0;
  int sample_rate_hz = 0;
  std::vector<double> magnitudes;  // frames × bins, row-major, linear

  [[nodiscard]] double at(std::size_t frame, std::size_t bin) const { return magnitudes[frame * bins + bin]; }
  [[nodiscard]] double bin_hz(std::size_t bin) const;
};

/// One-sided STFT magnitudes scaled so that, with a rectangular window and
/// non-overlapping frames, Σ|M|² equals Σx². A signal shorter than the
/// window yields a single zero-padded frame.
Spectrogram spectrogram(std::span<const float> samples, int sample_rate_hz, std::size_t window,
                        std::size_t hop, WindowKind kind = WindowKind::Hann);

/// Decibel copy of a magnitude array, floored at floor_db.
std::vector<double> magnitudes_db(const Spectrogram& s, double floor_db = -120.0);

/// mic·10^((ref−g_mic)/20) / max|hammer·10^((ref−g_hammer)/20)|
std::vector<float> normalize_recording(const model::AudioTake& take, double reference_gain_db);

/// RMS of (a−b) over the larger RMS of a and b. Sizes must match.
double relative_rms_difference(std::span<const float> a, std::span<const float> b);

}  // namespace xcap::audio
