#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace xcap {

/// Dense row-major image with interleaved channels.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> pixels;

  Image() = default;
  Image(int w, int h, int c = 1, T fill = T{})
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  [[nodiscard]] bool empty() const { return pixels.empty(); }
  [[nodiscard]] std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  T& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
  [[nodiscard]] bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  [[nodiscard]] bool same_size(int w, int h) const { return width == w && height == h; }

  bool operator==(const Image&) const = default;
};

using RgbImage = Image<std::uint8_t>;     // 3 channels
using DepthImage = Image<std::uint16_t>;  // millimeters, 0 = invalid
using FloatImage = Image<float>;
using Mask = Image<std::uint8_t>;         // 1 channel, 0 or 1

inline std::size_t count_true(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m.pixels) n += v != 0;
  return n;
}

}  // namespace xcap
