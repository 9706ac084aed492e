#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xcap/image.hpp"
#include "xcap/model/types.hpp"

namespace xcap::cloud {

struct Intrinsics {
  double fx = 60.0;
  double fy = 60.0;
  double cx = 32.0;
  double cy = 24.0;
  int width = 64;
  int height = 48;
};

void validate(const Intrinsics& intr);

struct Pixel {
  int u = 0;
  int v = 0;
  bool operator==(const Pixel&) const = default;
};

struct DepthAlignment {
  double a = 1.0;
  double b = 0.0;
  double residual_rms = 0.0;
  std::size_t n = 0;
};

/// Least-squares a·pred + b ≈ sparse over pixels where valid is set.
/// Throws DegenerateRegressionError with fewer than 2 samples or constant pred.
DepthAlignment align_depth(const FloatImage& pred, const FloatImage& sparse_m, const Mask& valid);
DepthAlignment align_depth(std::span<const double> pred, std::span<const double> sparse);

/// Metric sparse depth and its valid mask from a millimeter depth image.
FloatImage depth_to_meters(const DepthImage& depth_mm);
Mask valid_depth_mask(const DepthImage& depth_mm);

struct MaskProposal {
  Mask mask;
  std::size_t area = 0;
};

MaskProposal make_proposal(Mask mask);

/// Index of the largest proposal active at center, lowest index on ties.
/// Throws NoMaskError when none is active.
std::size_t select_mask(std::span<const MaskProposal> proposals, Pixel center);

/// Binary erosion with a kernel_px × kernel_px square; outside pixels count as false.
Mask erode(const Mask& mask, int kernel_px);

struct CloudPoint {
  double x = 0.0, y = 0.0, z = 0.0;
  std::uint8_t r = 0, g = 0, b = 0;
  Pixel pixel;
};

using PointCloud = std::vector<CloudPoint>;

/// Row-major over masked pixels with z > 0. rgb may be empty (color stays 0).
PointCloud backproject(const FloatImage& depth_m, const Intrinsics& intr, const Mask& mask,
                       const RgbImage& rgb = {});

/// Query points around center: 3×3 lattice at ±3 px, all inside a 5 px disk.
std::vector<Pixel> center_query_points(Pixel center);

class DepthPredictorClient {
 public:
  virtual ~DepthPredictorClient() = default;
  /// Relative depth, same size as rgb.
  virtual FloatImage predict(const RgbImage& rgb) = 0;
};

class SegmenterClient {
 public:
  virtual ~SegmenterClient() = default;
  /// Exactly three proposals, each the size of rgb.
  virtual std::vector<MaskProposal> segment(const RgbImage& rgb, std::span<const Pixel> points) = 0;
};

struct CloudResult {
  PointCloud points;
  DepthAlignment alignment;
  std::size_t selected = 0;
  Mask mask;  // eroded
};

inline constexpr int kDefaultErosionKernel = 5;

CloudResult extract_pointcloud(const model::RgbdFrame& frame, const Intrinsics& intr,
                               DepthPredictorClient& depth_client, SegmenterClient& seg_client,
                               int kernel_px = kDefaultErosionKernel);

/// ASCII PLY with float x,y,z and uchar r,g,b per vertex.
std::string ply_string(const PointCloud& cloud);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace xcap::cloud
