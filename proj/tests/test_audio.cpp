#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "support.hpp"
#include "xcap/audio/dsp.hpp"
#include "xcap/error.hpp"

using namespace xcap;
using namespace xcap::audio;

namespace {

std::vector<float> raised_cosine(std::size_t n, std::size_t onset, std::size_t width, double amp) {
  std::vector<float> x(n, 0.0f);
  for (std::size_t k = 0; k < width; ++k)
    x[onset + k] = static_cast<float>(amp * (1 - std::cos(2 * std::numbers::pi * k / width)) / 2);
  return x;
}

std::vector<float> sine(std::size_t n, double hz, int sr, double amp = 1.0) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / sr));
  return x;
}

// Naive one-sided DFT magnitude with the same scaling as the spectrogram.
double dft_mag(const std::vector<double>& x, std::size_t k) {
  std::complex<double> acc = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
  const double m = std::abs(acc) / std::sqrt(n);
  return (k == 0 || k == x.size() / 2) ? m : std::numbers::sqrt2 * m;
}

}  // namespace

TEST(Clipping, Examples) {
  EXPECT_FALSE(detect_clipping(std::vector<float>(100, 0.0f)));
  std::vector<float> x(100, 0.1f);
  x[50] = 1.0f;
  EXPECT_TRUE(detect_clipping(x));
  x[50] = -0.99f;
  EXPECT_TRUE(detect_clipping(x));
  x[50] = 0.989f;
  EXPECT_FALSE(detect_clipping(x));
}

TEST(ChooseGain, Examples) {
  EXPECT_DOUBLE_EQ(choose_gain(db_to_linear(-20.0), 0.0, -3.0), 17.0);
  EXPECT_DOUBLE_EQ(choose_gain(db_to_linear(-3.0), 12.0, -3.0), 12.0);
  EXPECT_DOUBLE_EQ(choose_gain(0.0, 5.0, -3.0), 25.0);
  EXPECT_DOUBLE_EQ(choose_gain(db_to_linear(-80.0), 0.0, -3.0), 60.0);   // clamped high
  EXPECT_DOUBLE_EQ(choose_gain(db_to_linear(-0.5), -19.0, -3.0), -20.0);  // clamped low
  EXPECT_DOUBLE_EQ(choose_gain(db_to_linear(-20.4), 0.0, -3.0), 17.0);    // quantized
  EXPECT_THROW(choose_gain(-1.0, 0.0, -3.0), ArgumentError);
  EXPECT_THROW(choose_gain(0.1, 0.0, -3.0, GainRange{10, 0, 1, 20}), ArgumentError);
}

TEST(Agc, DecisionBands) {
  const AgcConfig cfg;
  auto d = agc_evaluate(std::vector<float>{0.0f, static_cast<float>(db_to_linear(-4.0))}, 7.0, cfg);
  EXPECT_TRUE(d.accept);
  EXPECT_EQ(d.next_gain_db, 7.0);
  d = agc_evaluate(std::vector<float>{static_cast<float>(db_to_linear(-6.5))}, 7.0, cfg);
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.next_gain_db, 10.0);
  d = agc_evaluate(std::vector<float>{0.995f}, 7.0, cfg);
  EXPECT_TRUE(d.clipped);
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.next_gain_db, -13.0);
  d = agc_evaluate(std::vector<float>(10, 0.0f), 7.0, cfg);
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.next_gain_db, 27.0);
}

TEST(Agc, ConvergesWithinTwoTakesOnSim) {
  // Objects whose first take at the default gain does not clip converge on the
  // second take under the linear sim model, whatever their loudness.
  const AgcConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> target_db(-45.0, -4.0);
  const simrig::HammerPulse pulse{40.0, 48, 480};
  for (int i = 0; i < 30; ++i) {
    auto obj = xcap::testing::make_object("a" + std::to_string(i), 100 + i);
    const auto base = simrig::record_take(simrig::synth_impact(obj, 0, pulse, 48000, 0.3), 0.0, 0.0);
    obj.points[0].loudness_scale *= db_to_linear(target_db(rng) - to_dbfs(peak_abs(base.mic_samples)));
    const auto sig = simrig::synth_impact(obj, 0, pulse, 48000, 0.3);
    double gain = cfg.default_gain_db;
    int takes = 0;
    AgcDecision d;
    do {
      d = agc_evaluate(simrig::record_take(sig, gain, 0.0).mic_samples, gain, cfg);
      gain = d.next_gain_db;
      ++takes;
    } while (!d.accept && takes < 5);
    EXPECT_TRUE(d.accept) << i;
    EXPECT_LE(takes, 2) << i;
    EXPECT_FALSE(d.clipped);
    EXPECT_GE(d.peak_dbfs, -6.0);
    EXPECT_LT(d.peak_dbfs, 0.0);
  }
}

TEST(Impulse, ConstructedPulse) {
  const auto x = raised_cosine(4000, 1000, 40, 0.8);
  const auto info = find_impulse(x, 1e-3);
  EXPECT_NEAR(static_cast<double>(info.peak_index), 1020.0, 1.0);
  EXPECT_NEAR(info.peak_value, 0.8, 1e-6);
  EXPECT_LE(info.window_start, info.peak_index);
  EXPECT_GT(info.window_end, info.peak_index);
  EXPECT_LE(info.secondary_peak_ratio, 0.05);  // pulse tails below the window edge
  EXPECT_TRUE(verify_clean_impulse(info));
}

TEST(Impulse, SilenceAndNoiseRejected) {
  EXPECT_THROW(find_impulse(std::vector<float>(1000, 0.0f), 1e-4), NoImpulseError);
  EXPECT_THROW(find_impulse(std::vector<float>{}, 1e-4), NoImpulseError);
  EXPECT_THROW(find_impulse(raised_cosine(1000, 100, 40, 0.009), 1e-3), NoImpulseError);
}

TEST(Impulse, DoubleHitRatio) {
  auto x = raised_cosine(4000, 1000, 40, 0.8);
  const auto second = raised_cosine(4000, 1600, 40, 0.4);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += second[i];
  const auto info = find_impulse(x, 1e-3);
  EXPECT_NEAR(info.secondary_peak_ratio, 0.5, 1e-3);
  EXPECT_FALSE(verify_clean_impulse(info));
}

TEST(Impulse, ThresholdInclusive) {
  ImpulseInfo info;
  info.secondary_peak_ratio = 0.2;
  EXPECT_TRUE(verify_clean_impulse(info, 0.2));
  info.secondary_peak_ratio = std::nextafter(0.2, 1.0);
  EXPECT_FALSE(verify_clean_impulse(info, 0.2));
}

TEST(Impulse, SimFixturesClassified) {
  const auto obj = xcap::testing::make_object("imp", 3);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> delay(200, 4000);
  std::uniform_real_distribution<double> ratio(0.3, 1.0);
  for (int i = 0; i < 40; ++i) {
    const simrig::HammerPulse pulse{20.0 + i, 40 + i % 16, 480};
    const auto one = simrig::record_take(simrig::synth_impact(obj, i % 6, pulse, 48000, 0.2), 0.0, 12.0);
    EXPECT_TRUE(verify_clean_impulse(find_impulse(one.hammer_samples, 1e-4))) << i;
    const double r = ratio(rng);
    const auto two = simrig::record_take(
        simrig::synth_double_hit(obj, i % 6, pulse, delay(rng), r, 48000, 0.2), 0.0, 12.0);
    const auto info = find_impulse(two.hammer_samples, 1e-4);
    EXPECT_FALSE(verify_clean_impulse(info)) << i;
    EXPECT_NEAR(info.secondary_peak_ratio, r, 1e-3) << i;
  }
}

TEST(Spectrogram, SineBin) {
  const auto s = spectrogram(sine(48000, 1000.0, 48000), 48000, 1024, 512);
  EXPECT_EQ(s.bins, 513u);
  EXPECT_EQ(s.frames, 1u + (48000 - 1024) / 512);
  for (std::size_t f = 0; f < s.frames; f += 17) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < s.bins; ++k)
      if (s.at(f, k) > s.at(f, best)) best = k;
    EXPECT_EQ(best, 21u);
  }
  EXPECT_NEAR(s.bin_hz(21), 21 * 48000.0 / 1024, 1e-9);
}

TEST(Spectrogram, ZerosLinearityShortSignal) {
  const auto z = spectrogram(std::vector<float>(5000, 0.0f), 48000, 256, 128);
  for (double m : z.magnitudes) EXPECT_EQ(m, 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n(0.0f, 0.1f);
  std::vector<float> x(3000), x2(3000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    x2[i] = 2 * x[i];
  }
  const auto a = spectrogram(x, 48000, 256, 64), b = spectrogram(x2, 48000, 256, 64);
  for (std::size_t i = 0; i < a.magnitudes.size(); ++i) EXPECT_NEAR(b.magnitudes[i], 2 * a.magnitudes[i], 1e-9);
  const auto s = spectrogram(std::vector<float>(100, 0.5f), 48000, 256, 64);
  EXPECT_EQ(s.frames, 1u);
  EXPECT_GT(s.at(0, 0), 0.0);
  EXPECT_THROW(spectrogram(x, 48000, 300, 64), ArgumentError);
  EXPECT_THROW(spectrogram(x, 48000, 256, 512), ArgumentError);
  EXPECT_THROW(spectrogram(x, 48000, 256, 0), ArgumentError);
}

TEST(Spectrogram, MatchesNaiveDft) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0.0f, 0.3f);
  std::vector<float> x(128);
  for (auto& v : x) v = n(rng);
  const auto s = spectrogram(x, 8000, 64, 64, WindowKind::Rectangular);
  ASSERT_EQ(s.frames, 2u);
  for (std::size_t f = 0; f < 2; ++f) {
    std::vector<double> frame(x.begin() + f * 64, x.begin() + (f + 1) * 64);
    for (std::size_t k = 0; k < s.bins; ++k) EXPECT_NEAR(s.at(f, k), dft_mag(frame, k), 1e-9);
  }
  const auto h = spectrogram(x, 8000, 64, 64, WindowKind::Hann);
  std::vector<double> frame(64);
  for (std::size_t i = 0; i < 64; ++i) frame[i] = x[i] * (0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / 64));
  for (std::size_t k = 0; k < h.bins; ++k) EXPECT_NEAR(h.at(0, k), dft_mag(frame, k), 1e-9);
}

TEST(Spectrogram, ParsevalRectangular) {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> n(0.0f, 0.2f);
  for (std::size_t w : {16u, 256u, 1024u}) {
    std::vector<float> x(w * 7);
    for (auto& v : x) v = n(rng);
    const auto s = spectrogram(x, 48000, w, w, WindowKind::Rectangular);
    double em = 0, ex = 0;
    for (double m : s.magnitudes) em += m * m;
    for (float v : x) ex += static_cast<double>(v) * v;
    EXPECT_NEAR(em / ex, 1.0, 1e-6) << w;
  }
}

TEST(Spectrogram, DecibelFloor) {
  Spectrogram s;
  s.frames = 1;
  s.bins = 3;
  s.magnitudes = {0.0, 1.0, 0.1};
  const auto db = magnitudes_db(s, -100.0);
  EXPECT_EQ(db[0], -100.0);
  EXPECT_NEAR(db[1], 0.0, 1e-12);
  EXPECT_NEAR(db[2], -20.0, 1e-12);
}

TEST(Normalize, IdentityAtReference) {
  model::AudioTake t;
  t.mic_samples = {0.1f, -0.2f, 0.3f};
  t.hammer_samples = {0.0f, -1.0f, 0.5f};
  t.mic_gain_db = t.hammer_gain_db = 6.0;
  EXPECT_EQ(normalize_recording(t, 6.0), t.mic_samples);
}

TEST(Normalize, ClosedForm) {
  model::AudioTake t;
  t.mic_samples = {0.1f, -0.2f};
  t.hammer_samples = {0.25f, -0.5f};
  t.mic_gain_db = 12.0;
  t.hammer_gain_db = 6.0;
  const auto y = normalize_recording(t, 0.0);
  const double k_mic = std::pow(10.0, -12.0 / 20), k_ham = std::pow(10.0, -6.0 / 20);
  EXPECT_NEAR(y[1], -0.2 * k_mic / (0.5 * k_ham), 1e-6);
}

TEST(Normalize, Errors) {
  model::AudioTake t;
  t.mic_samples = {0.1f, 0.2f};
  t.hammer_samples = {0.0f, 0.0f};
  EXPECT_THROW(normalize_recording(t, 0.0), NormalizationError);
  t.hammer_samples = {0.5f};
  EXPECT_THROW(normalize_recording(t, 0.0), NormalizationError);
}

TEST(Normalize, InvariantToStrikeAndGains) {
  for (int o = 0; o < 5; ++o) {
    const auto obj = xcap::testing::make_object("n" + std::to_string(o), 40 + o);
    for (int p = 0; p < 6; p += 2) {
      std::vector<std::vector<float>> outs;
      for (double a : {5.0, 10.0, 20.0})
        for (double g : {0.0, 6.0, 12.0}) {
          const auto sig = simrig::synth_impact(obj, p, {a, 48, 480}, 48000, 0.25);
          const auto take = simrig::record_take(sig, g - 12.0, g);
          ASSERT_FALSE(detect_clipping(take.mic_samples));
          ASSERT_FALSE(detect_clipping(take.hammer_samples));
          outs.push_back(normalize_recording(take, 0.0));
        }
      for (std::size_t i = 1; i < outs.size(); ++i) EXPECT_LE(relative_rms_difference(outs[0], outs[i]), 0.01);
    }
  }
}

TEST(Normalize, RelativeRms) {
  const std::vector<float> a{1, 0, 0, 0}, b{0.99f, 0, 0, 0};
  EXPECT_NEAR(relative_rms_difference(a, b), 0.01, 1e-6);
  EXPECT_EQ(relative_rms_difference(std::vector<float>(3, 0.0f), std::vector<float>(3, 0.0f)), 0.0);
  EXPECT_THROW(relative_rms_difference(a, std::vector<float>(2)), ArgumentError);
}
