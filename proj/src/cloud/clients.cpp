#include "xcap/cloud/clients.hpp"

#include <cstdlib>
#include <deque>

#include "xcap/error.hpp"

namespace xcap::cloud {

FloatImage StubDepthClient::predict(const RgbImage& rgb) {
  if (!depth_.same_size(rgb.width, rgb.height)) throw ArgumentError("stub depth: size mismatch");
  return depth_;
}

std::vector<MaskProposal> StubSegmenter::segment(const RgbImage& rgb, std::span<const Pixel>) {
  for (const auto& p : proposals_)
    if (!p.mask.same_size(rgb.width, rgb.height)) throw ArgumentError("stub segmenter: size mismatch");
  return proposals_;
}

FloatImage NearestFillDepthClient::predict(const RgbImage& rgb) {
  if (!depth_.same_size(rgb.width, rgb.height)) throw ArgumentError("fill depth: size mismatch");
  const int w = depth_.width, h = depth_.height;
  FloatImage out(w, h, 1, 0.0f);
  std::vector<std::uint8_t> seen(out.pixels.size(), 0);
  std::deque<Pixel> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (depth_.at(x, y) != 0) {
        out.at(x, y) = static_cast<float>(depth_.at(x, y) / 1000.0);
        seen[out.index(x, y)] = 1;
        queue.push_back({x, y});
      }
  if (queue.empty()) return out;
  constexpr int du[4] = {1, -1, 0, 0};
  constexpr int dv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int x = p.u + du[k], y = p.v + dv[k];
      if (!out.contains(x, y) || seen[out.index(x, y)]) continue;
      seen[out.index(x, y)] = 1;
      out.at(x, y) = out.at(p.u, p.v);
      queue.push_back({x, y});
    }
  }
  return out;
}

std::vector<MaskProposal> DepthFloodSegmenter::segment(const RgbImage& rgb, std::span<const Pixel> points) {
  if (!depth_.same_size(rgb.width, rgb.height)) throw ArgumentError("flood segmenter: size mismatch");
  const int w = depth_.width, h = depth_.height;
  std::optional<Pixel> seed;
  for (const auto& p : points)
    if (depth_.contains(p.u, p.v) && depth_.at(p.u, p.v) != 0) {
      seed = p;
      break;
    }
  std::vector<MaskProposal> out;
  for (int tol : tol_) {
    Mask m(w, h, 1, 0);
    if (seed) {
      std::deque<Pixel> queue{*seed};
      m.at(seed->u, seed->v) = 1;
      constexpr int du[4] = {1, -1, 0, 0};
      constexpr int dv[4] = {0, 0, 1, -1};
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        const int d0 = depth_.at(p.u, p.v);
        for (int k = 0; k < 4; ++k) {
          const int x = p.u + du[k], y = p.v + dv[k];
          if (!m.contains(x, y) || m.at(x, y)) continue;
          const int d = depth_.at(x, y);
          if (d == 0 || std::abs(d - d0) > tol) continue;
          m.at(x, y) = 1;
          queue.push_back({x, y});
        }
      }
    }
    out.push_back(make_proposal(std::move(m)));
  }
  return out;
}

nlohmann::json rle_encode(const Mask& mask) {
  nlohmann::json counts = nlohmann::json::array();
  std::uint8_t cur = 0;
  std::size_t run = 0;
  for (auto v : mask.pixels) {
    const std::uint8_t b = v != 0;
    if (b != cur) {
      counts.push_back(run);
      cur = b;
      run = 0;
    }
    ++run;
  }
  counts.push_back(run);
  return {{"width", mask.width}, {"height", mask.height}, {"counts", counts}};
}

Mask rle_decode(const nlohmann::json& j) {
  try {
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    if (w < 0 || h < 0) throw ParseError("rle: negative size");
    Mask m(w, h, 1, 0);
    std::size_t pos = 0;
    std::uint8_t cur = 0;
    for (const auto& c : j.at("counts")) {
      const auto run = c.get<std::size_t>();
      if (pos + run > m.pixels.size()) throw ParseError("rle: runs exceed mask size");
      std::fill_n(m.pixels.begin() + static_cast<std::ptrdiff_t>(pos), run, cur);
      pos += run;
      cur ^= 1;
    }
    if (pos != m.pixels.size()) throw ParseError("rle: runs do not cover the mask");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("rle: ") + e.what());
  }
}

}  // namespace xcap::cloud
