#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xcap/image.hpp"

namespace xcap::model {

using Bytes = std::vector<std::uint8_t>;

// PNG: 8-bit RGB and 16-bit grayscale, lossless both ways.
Bytes encode_png(const RgbImage& img);
Bytes encode_png(const DepthImage& img);
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);
DepthImage decode_png_depth(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_png(const std::filesystem::path& path, const DepthImage& img);
RgbImage read_png_rgb(const std::filesystem::path& path);
DepthImage read_png_depth(const std::filesystem::path& path);

// Mono IEEE-float WAV (format tag 3), 32 bits per sample.
struct WavData {
  std::vector<float> samples;
  int sample_rate_hz = 0;
};

Bytes encode_wav(std::span<const float> samples, int sample_rate_hz);
WavData decode_wav(std::span<const std::uint8_t> bytes);
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate_hz);
WavData read_wav(const std::filesystem::path& path);

// Standard alphabet with padding. Decoding rejects malformed input.
std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace xcap::model
