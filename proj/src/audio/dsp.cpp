#include "xcap/audio/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include "xcap/error.hpp"

namespace xcap::audio {

double peak_abs(std::span<const float> samples) {
  double p = 0.0;
  for (float s : samples) p = std::max(p, static_cast<double>(std::abs(s)));
  return p;
}

double to_dbfs(double linear) {
  if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(linear);
}

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

bool detect_clipping(std::span<const float> samples, double threshold) {
  return std::any_of(samples.begin(), samples.end(),
                     [threshold](float s) { return std::abs(s) >= threshold; });
}

void validate(const GainRange& range) {
  if (!(range.min_db < range.max_db)) throw ArgumentError("gain range: min must be below max");
  if (!(range.step_db > 0.0) || !(range.max_step_db > 0.0))
    throw ArgumentError("gain range: steps must be positive");
}

namespace {

double quantize_clamp(double gain, const GainRange& range) {
  const double q = range.min_db + std::round((gain - range.min_db) / range.step_db) * range.step_db;
  return std::clamp(q, range.min_db, range.max_db);
}

}  // namespace

double choose_gain(double prev_peak_linear, double prev_gain_db, double target_peak_dbfs,
                   const GainRange& range) {
  validate(range);
  if (!(prev_peak_linear >= 0.0)) throw ArgumentError("choose_gain: peak must be >= 0");
  if (prev_peak_linear == 0.0) return quantize_clamp(prev_gain_db + range.max_step_db, range);
  return quantize_clamp(prev_gain_db + (target_peak_dbfs - to_dbfs(prev_peak_linear)), range);
}

void validate(const AgcConfig& cfg) {
  validate(cfg.range);
  if (!(cfg.accept_min_dbfs < cfg.accept_max_dbfs)) throw ArgumentError("agc: empty accept band");
  if (!(cfg.clip_threshold > 0.0 && cfg.clip_threshold <= 1.0))
    throw ArgumentError("agc: clip threshold must be in (0, 1]");
}

AgcDecision agc_evaluate(std::span<const float> samples, double gain_db, const AgcConfig& cfg) {
  validate(cfg);
  AgcDecision d;
  const double peak = peak_abs(samples);
  d.peak_dbfs = to_dbfs(peak);
  d.clipped = detect_clipping(samples, cfg.clip_threshold);
  if (d.clipped) {
    d.next_gain_db = quantize_clamp(gain_db - cfg.range.max_step_db, cfg.range);
    return d;
  }
  d.accept = d.peak_dbfs >= cfg.accept_min_dbfs && d.peak_dbfs < cfg.accept_max_dbfs;
  d.next_gain_db = d.accept ? gain_db : choose_gain(peak, gain_db, cfg.target_peak_dbfs, cfg.range);
  return d;
}

ImpulseInfo find_impulse(std::span<const float> hammer, double noise_floor, double window_fraction,
                         double min_snr) {
  if (hammer.empty()) throw NoImpulseError("find_impulse: empty signal");
  ImpulseInfo info;
  for (std::size_t i = 0; i < hammer.size(); ++i) {
    if (std::abs(hammer[i]) > info.peak_value) {
      info.peak_value = std::abs(hammer[i]);
      info.peak_index = i;
    }
  }
  if (!(info.peak_value > min_snr * noise_floor) || info.peak_value == 0.0)
    throw NoImpulseError("find_impulse: peak not above noise floor");
  const double level = window_fraction * info.peak_value;
  std::size_t a = info.peak_index;
  while (a > 0 && std::abs(hammer[a - 1]) > level) --a;
  std::size_t b = info.peak_index + 1;
  while (b < hammer.size() && std::abs(hammer[b]) > level) ++b;
  info.window_start = a;
  info.window_end = b;
  double outside = 0.0;
  for (std::size_t i = 0; i < a; ++i) outside = std::max(outside, static_cast<double>(std::abs(hammer[i])));
  for (std::size_t i = b; i < hammer.size(); ++i)
    outside = std::max(outside, static_cast<double>(std::abs(hammer[i])));
  info.secondary_peak_ratio = outside / info.peak_value;
  return info;
}

bool verify_clean_impulse(const ImpulseInfo& info, double max_secondary_ratio) {
  return info.secondary_peak_ratio <= max_secondary_ratio;
}

double Spectrogram::bin_hz(std::size_t bin) const {
  return static_cast<double>(bin) * sample_rate_hz / static_cast<double>(window_samples);
}

namespace {

std::mutex g_plan_mutex;  // FFTW planning is not thread-safe

struct Fft {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Fft(std::size_t n) {
    std::lock_guard lock(g_plan_mutex);
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(g_plan_mutex);
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
};

}  // namespace

Spectrogram spectrogram(std::span<const float> samples, int sample_rate_hz, std::size_t window,
                        std::size_t hop, WindowKind kind) {
  if (window < 2 || (window & (window - 1)) != 0)
    throw ArgumentError("spectrogram: window must be a power of two >= 2");
  if (hop == 0 || hop > window) throw ArgumentError("spectrogram: hop must be in [1, window]");
  if (sample_rate_hz <= 0) throw ArgumentError("spectrogram: sample rate must be positive");

  Spectrogram s;
  s.window_samples = window;
  s.hop_samples = hop;
  s.sample_rate_hz = sample_rate_hz;
  s.bins = window / 2 + 1;
  s.frames = samples.size() <= window ? 1 : 1 + (samples.size() - window) / hop;
  s.magnitudes.assign(s.frames * s.bins, 0.0);

  std::vector<double> w(window, 1.0);
  if (kind == WindowKind::Hann)
    for (std::size_t i = 0; i < window; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(window));

  Fft fft(window);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(window));
  for (std::size_t f = 0; f < s.frames; ++f) {
    const std::size_t off = f * hop;
    for (std::size_t i = 0; i < window; ++i)
      fft.in[i] = off + i < samples.size() ? w[i] * samples[off + i] : 0.0;
    fftw_execute(fft.plan);
    for (std::size_t k = 0; k < s.bins; ++k) {
      const double mag = std::hypot(fft.out[k][0], fft.out[k][1]) * inv_sqrt_n;
      const bool edge = k == 0 || k == window / 2;
      s.magnitudes[f * s.bins + k] = edge ? mag : std::numbers::sqrt2 * mag;
    }
  }
  return s;
}

std::vector<double> magnitudes_db(const Spectrogram& s, double floor_db) {
  std::vector<double> out(s.magnitudes.size());
  std::transform(s.magnitudes.begin(), s.magnitudes.end(), out.begin(),
                 [floor_db](double m) { return std::max(to_dbfs(m), floor_db); });
  return out;
}

std::vector<float> normalize_recording(const model::AudioTake& take, double reference_gain_db) {
  if (take.mic_samples.size() != take.hammer_samples.size())
    throw NormalizationError("normalize_recording: mic and hammer lengths differ");
  const double k_mic = db_to_linear(reference_gain_db - take.mic_gain_db);
  const double k_ham = db_to_linear(reference_gain_db - take.hammer_gain_db);
  const double hammer_peak = k_ham * peak_abs(take.hammer_samples);
  if (!(hammer_peak > 1e-12)) throw NormalizationError("normalize_recording: hammer peak is zero");
  std::vector<float> out(take.mic_samples.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<float>(take.mic_samples[i] * k_mic / hammer_peak);
  return out;
}

double relative_rms_difference(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ArgumentError("relative_rms_difference: size mismatch");
  double d = 0.0, ea = 0.0, eb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    d += (x - y) * (x - y);
    ea += x * x;
    eb += y * y;
  }
  const double denom = std::max(ea, eb);
  if (denom == 0.0) return 0.0;
  return std::sqrt(d / denom);
}

}  // namespace xcap::audio
