#include "xcap/cloud/pipeline.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

namespace xcap::cloud {

void validate(const Intrinsics& intr) {
  if (!(intr.fx > 0 && intr.fy > 0)) throw ArgumentError("intrinsics: focal lengths must be positive");
  if (intr.width <= 0 || intr.height <= 0) throw ArgumentError("intrinsics: empty image size");
  if (!(intr.cx >= 0 && intr.cx < intr.width && intr.cy >= 0 && intr.cy < intr.height))
    throw ArgumentError("intrinsics: principal point outside the image");
}

DepthAlignment align_depth(std::span<const double> pred, std::span<const double> sparse) {
  if (pred.size() != sparse.size()) throw ArgumentError("align_depth: size mismatch");
  const std::size_t n = pred.size();
  if (n < 2) throw DegenerateRegressionError("align_depth: fewer than 2 valid pixels");
  double mp = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += pred[i];
    ms += sparse[i];
  }
  mp /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, spp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mp;
    sxx += dp * dp;
    sxy += dp * (sparse[i] - ms);
    spp += pred[i] * pred[i];
  }
  if (!(sxx > 1e-20 * spp) || sxx == 0.0)
    throw DegenerateRegressionError("align_depth: prediction values are constant");
  DepthAlignment out;
  out.a = sxy / sxx;
  out.b = ms - out.a * mp;
  out.n = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = out.a * pred[i] + out.b - sparse[i];
    ss += r * r;
  }
  out.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return out;
}

DepthAlignment align_depth(const FloatImage& pred, const FloatImage& sparse_m, const Mask& valid) {
  if (!pred.same_size(sparse_m.width, sparse_m.height) || !pred.same_size(valid.width, valid.height))
    throw ArgumentError("align_depth: image sizes differ");
  std::vector<double> p, s;
  for (std::size_t i = 0; i < valid.pixels.size(); ++i) {
    if (!valid.pixels[i]) continue;
    p.push_back(pred.pixels[i]);
    s.push_back(sparse_m.pixels[i]);
  }
  return align_depth(p, s);
}

FloatImage depth_to_meters(const DepthImage& depth_mm) {
  FloatImage out(depth_mm.width, depth_mm.height, 1, 0.0f);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = static_cast<float>(depth_mm.pixels[i] / 1000.0);
  return out;
}

Mask valid_depth_mask(const DepthImage& depth_mm) {
  Mask out(depth_mm.width, depth_mm.height, 1, 0);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = depth_mm.pixels[i] != 0;
  return out;
}

MaskProposal make_proposal(Mask mask) {
  const std::size_t area = count_true(mask);
  return {std::move(mask), area};
}

std::size_t select_mask(std::span<const MaskProposal> proposals, Pixel center) {
  if (proposals.size() != 3) throw ArgumentError("select_mask: expected exactly 3 proposals");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Mask& m = proposals[i].mask;
    if (!m.contains(center.u, center.v) || !m.at(center.u, center.v)) continue;
    if (!best || proposals[i].area > proposals[*best].area) best = i;
  }
  if (!best) throw NoMaskError("select_mask: no proposal is active at the center pixel");
  return *best;
}

Mask erode(const Mask& mask, int kernel_px) {
  if (kernel_px < 1 || kernel_px % 2 == 0) throw ArgumentError("erode: kernel must be odd and >= 1");
  const int r = kernel_px / 2;
  const int w = mask.width, h = mask.height;
  // Separable: horizontal then vertical minimum.
  Mask tmp(w, h, 1, 0), out(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (int k = -r; k <= r && v; ++k) v = mask.contains(x + k, y) && mask.at(x + k, y);
      tmp.at(x, y) = v;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (int k = -r; k <= r && v; ++k) v = tmp.contains(x, y + k) && tmp.at(x, y + k);
      out.at(x, y) = v;
    }
  return out;
}

PointCloud backproject(const FloatImage& depth_m, const Intrinsics& intr, const Mask& mask,
                       const RgbImage& rgb) {
  validate(intr);
  if (!depth_m.same_size(intr.width, intr.height) || !mask.same_size(intr.width, intr.height))
    throw ArgumentError("backproject: depth/mask size differs from intrinsics");
  const bool color = !rgb.empty();
  if (color && (!rgb.same_size(intr.width, intr.height) || rgb.channels != 3))
    throw ArgumentError("backproject: rgb size differs from intrinsics");
  PointCloud cloud;
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const double z = depth_m.at(u, v);
      if (!mask.at(u, v) || !(z > 0.0)) continue;
      CloudPoint p;
      p.x = (u - intr.cx) * z / intr.fx;
      p.y = (v - intr.cy) * z / intr.fy;
      p.z = z;
      if (color) {
        p.r = rgb.at(u, v, 0);
        p.g = rgb.at(u, v, 1);
        p.b = rgb.at(u, v, 2);
      }
      p.pixel = {u, v};
      cloud.push_back(p);
    }
  return cloud;
}

std::vector<Pixel> center_query_points(Pixel center) {
  std::vector<Pixel> out;
  for (int dv : {-3, 0, 3})
    for (int du : {-3, 0, 3}) out.push_back({center.u + du, center.v + dv});
  return out;
}

CloudResult extract_pointcloud(const model::RgbdFrame& frame, const Intrinsics& intr,
                               DepthPredictorClient& depth_client, SegmenterClient& seg_client,
                               int kernel_px) {
  validate(intr);
  if (!frame.rgb.same_size(intr.width, intr.height))
    throw ArgumentError("extract_pointcloud: frame size differs from intrinsics");
  const FloatImage pred = depth_client.predict(frame.rgb);
  if (!pred.same_size(intr.width, intr.height))
    throw ArgumentError("extract_pointcloud: depth prediction has wrong size");

  CloudResult res;
  res.alignment = align_depth(pred, depth_to_meters(frame.depth), valid_depth_mask(frame.depth));
  FloatImage dense(intr.width, intr.height, 1, 0.0f);
  for (std::size_t i = 0; i < dense.pixels.size(); ++i)
    dense.pixels[i] = static_cast<float>(res.alignment.a * pred.pixels[i] + res.alignment.b);

  const Pixel center{intr.width / 2, intr.height / 2};
  const auto queries = center_query_points(center);
  const auto proposals = seg_client.segment(frame.rgb, queries);
  for (const auto& p : proposals)
    if (!p.mask.same_size(intr.width, intr.height))
      throw ArgumentError("extract_pointcloud: mask proposal has wrong size");
  res.selected = select_mask(proposals, center);
  res.mask = erode(proposals[res.selected].mask, kernel_px);
  res.points = backproject(dense, intr, res.mask, frame.rgb);
  return res;
}

std::string ply_string(const PointCloud& cloud) {
  std::string out = fmt::format(
      "ply\nformat ascii 1.0\nelement vertex {}\n"
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
      cloud.size());
  for (const auto& p : cloud)
    out += fmt::format("{} {} {} {} {} {}\n", static_cast<float>(p.x), static_cast<float>(p.y),
                       static_cast<float>(p.z), p.r, p.g, p.b);
  return out;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  model::write_text(path, ply_string(cloud));
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::istringstream in(model::read_text(path));
  std::string line;
  std::size_t n = 0;
  bool header_ok = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex ", 0) == 0) n = std::stoul(line.substr(15));
    if (line == "end_header") {
      header_ok = true;
      break;
    }
  }
  if (!header_ok) throw ParseError(path.string() + ": missing PLY header");
  PointCloud cloud(n);
  for (auto& p : cloud) {
    float x, y, z;
    int r, g, b;
    if (!(in >> x >> y >> z >> r >> g >> b)) throw ParseError(path.string() + ": truncated vertex list");
    p.x = x;
    p.y = y;
    p.z = z;
    p.r = static_cast<std::uint8_t>(r);
    p.g = static_cast<std::uint8_t>(g);
    p.b = static_cast<std::uint8_t>(b);
  }
  return cloud;
}

}  // namespace xcap::cloud
