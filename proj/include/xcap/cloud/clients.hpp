#pragma once

#include <array>
#include <memory>
#include <string>

#include "json.hpp"
#include "xcap/cloud/pipeline.hpp"

namespace xcap::cloud {

/// Returns a fixed depth map.
class StubDepthClient : public DepthPredictorClient {
 public:
  explicit StubDepthClient(FloatImage depth) : depth_(std::move(depth)) {}
  FloatImage predict(const RgbImage& rgb) override;

 private:
  FloatImage depth_;
};

/// Returns fixed proposals regardless of the query.
class StubSegmenter : public SegmenterClient {
 public:
  explicit StubSegmenter(std::vector<MaskProposal> proposals) : proposals_(std::move(proposals)) {}
  std::vector<MaskProposal> segment(const RgbImage& rgb, std::span<const Pixel> points) override;

 private:
  std::vector<MaskProposal> proposals_;
};

/// Dense depth from the sensor's own sparse depth: each invalid pixel takes
/// the value of its nearest valid pixel (breadth-first, 4-neighbour).
class NearestFillDepthClient : public DepthPredictorClient {
 public:
  explicit NearestFillDepthClient(DepthImage depth_mm) : depth_(std::move(depth_mm)) {}
  FloatImage predict(const RgbImage& rgb) override;

 private:
  DepthImage depth_;
};

/// Flood fills from the first query point with valid depth, joining
/// neighbours whose depth step is within a tolerance; three tolerances give
/// three nested proposals.
class DepthFloodSegmenter : public SegmenterClient {
 public:
  explicit DepthFloodSegmenter(DepthImage depth_mm, std::array<int, 3> step_tolerance_mm = {1, 3, 10})
      : depth_(std::move(depth_mm)), tol_(step_tolerance_mm) {}
  std::vector<MaskProposal> segment(const RgbImage& rgb, std::span<const Pixel> points) override;

 private:
  DepthImage depth_;
  std::array<int, 3> tol_;
};

// Run-length mask encoding: {"width", "height", "counts"} where counts
// alternate false/true runs in row-major order, starting with false.
nlohmann::json rle_encode(const Mask& mask);
Mask rle_decode(const nlohmann::json& j);

/// Clients for a model service speaking
///   POST /predict_depth {"png": base64} -> {"width", "height", "depth": [float]}
///   POST /segment {"png": base64, "points": [[u, v], ...]} -> {"masks": [rle × 3]}
class RemoteDepthClient : public DepthPredictorClient {
 public:
  RemoteDepthClient(std::string host, int port) : host_(std::move(host)), port_(port) {}
  FloatImage predict(const RgbImage& rgb) override;

 private:
  std::string host_;
  int port_;
};

class RemoteSegmenterClient : public SegmenterClient {
 public:
  RemoteSegmenterClient(std::string host, int port) : host_(std::move(host)), port_(port) {}
  std::vector<MaskProposal> segment(const RgbImage& rgb, std::span<const Pixel> points) override;

 private:
  std::string host_;
  int port_;
};

/// Serves the model contract in-process from local clients. Blocks in
/// listen(); stop() from another thread. Used for tests and for exposing the
/// stub models to out-of-process tools.
class ModelServer {
 public:
  ModelServer(DepthPredictorClient& depth, SegmenterClient& seg);
  ~ModelServer();
  ModelServer(const ModelServer&) = delete;
  ModelServer& operator=(const ModelServer&) = delete;

  /// Binds to host and an ephemeral port when port == 0; returns the port.
  int bind(const std::string& host, int port);
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xcap::cloud
