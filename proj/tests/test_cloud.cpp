#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <thread>

#include "support.hpp"
#include "xcap/cloud/clients.hpp"
#include "xcap/cloud/pipeline.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

using namespace xcap;
using namespace xcap::cloud;

namespace {

// Least squares through a QR solve, independent of the normal equations.
Eigen::Vector2d qr_fit(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd A(x.size(), 2);
  Eigen::VectorXd b(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  return A.colPivHouseholderQr().solve(b);
}

// Direct definition: a pixel survives if every pixel in its k×k neighbourhood is set.
Mask naive_erode(const Mask& m, int k) {
  Mask out(m.width, m.height, 1, 0);
  const int r = k / 2;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy)
        for (int dx = -r; dx <= r && all; ++dx)
          all = m.contains(x + dx, y + dy) && m.at(x + dx, y + dy);
      out.at(x, y) = all;
    }
  return out;
}

Mask box_mask(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h, 1, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
  return m;
}

Intrinsics intrinsics_of(const simrig::Camera& c) { return {c.fx, c.fy, c.cx, c.cy, c.width, c.height}; }

double cloud_rms_to_surface(const PointCloud& cloud, const simrig::SimObject& obj, const simrig::DevicePose& pose) {
  double acc = 0.0;
  for (const auto& p : cloud) {
    const Eigen::Vector3d w = pose.position + pose.orientation.normalized() * Eigen::Vector3d(p.x, p.y, p.z);
    const double d = simrig::surface_distance(obj.surface, w);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(cloud.size()));
}

}  // namespace

TEST(Align, Examples) {
  const std::vector<double> p{1, 2, 3}, s{3, 5, 7};
  const auto a = align_depth(p, s);
  EXPECT_NEAR(a.a, 2.0, 1e-12);
  EXPECT_NEAR(a.b, 1.0, 1e-12);
  EXPECT_NEAR(a.residual_rms, 0.0, 1e-12);
  EXPECT_EQ(a.n, 3u);
  const auto id = align_depth(p, p);
  EXPECT_NEAR(id.a, 1.0, 1e-12);
  EXPECT_NEAR(id.b, 0.0, 1e-12);
}

TEST(Align, NoiselessExactProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.01, 10.0), ub(-5.0, 5.0), up(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const double a = ua(rng), b = ub(rng);
    std::vector<double> p(50 + t), s(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = up(rng);
      s[i] = a * p[i] + b;
    }
    const auto fit = align_depth(p, s);
    EXPECT_NEAR(fit.a, a, 1e-9 * std::max(1.0, a));
    EXPECT_NEAR(fit.b, b, 1e-9 * std::max(1.0, std::abs(b)));
    EXPECT_LT(fit.residual_rms, 1e-9);
  }
}

TEST(Align, NoisyMatchesQrOracleAndRecovers) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> up(0.5, 2.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(10000), s(10000);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = up(rng);
      const double clean = 0.5 * p[i] + 0.2;
      s[i] = clean * (1.0 + 0.05 * n(rng));
    }
    const auto fit = align_depth(p, s);
    const auto ref = qr_fit(p, s);
    EXPECT_NEAR(fit.a, ref(0), 1e-9);
    EXPECT_NEAR(fit.b, ref(1), 1e-9);
    EXPECT_LE(std::abs(fit.a - 0.5) / 0.5, 0.02);
    EXPECT_LE(std::abs(fit.b - 0.2) / 0.2, 0.02);
  }
}

TEST(Align, DegenerateAndMasked) {
  EXPECT_THROW(align_depth(std::vector<double>{1.0}, std::vector<double>{2.0}), DegenerateRegressionError);
  EXPECT_THROW(align_depth(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DegenerateRegressionError);
  FloatImage pred(4, 1), sparse(4, 1);
  pred.pixels = {1, 2, 3, 4};
  sparse.pixels = {3, 5, 100, 9};
  Mask valid(4, 1, 1, 1);
  valid.at(2, 0) = 0;
  const auto fit = align_depth(pred, sparse, valid);
  EXPECT_EQ(fit.n, 3u);
  EXPECT_NEAR(fit.a, 2.0, 1e-9);
  EXPECT_NEAR(fit.b, 1.0, 1e-9);
}

TEST(DepthConversion, MetersAndValidity) {
  DepthImage d(3, 1);
  d.pixels = {0, 100, 1234};
  const auto m = depth_to_meters(d);
  EXPECT_FLOAT_EQ(m.pixels[1], 0.1f);
  EXPECT_FLOAT_EQ(m.pixels[2], 1.234f);
  EXPECT_EQ(valid_depth_mask(d).pixels, (std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(SelectMask, Examples) {
  const Pixel c{5, 5};
  std::vector<MaskProposal> p{make_proposal(box_mask(40, 40, 0, 0, 10, 10)),
                              make_proposal(box_mask(40, 40, 20, 0, 40, 20)),
                              make_proposal(box_mask(40, 40, 0, 0, 25, 10))};
  EXPECT_EQ(p[0].area, 100u);
  EXPECT_EQ(p[1].area, 400u);
  EXPECT_EQ(p[2].area, 250u);
  EXPECT_EQ(select_mask(p, c), 2u);
  EXPECT_EQ(select_mask(p, {30, 5}), 1u);
  EXPECT_THROW(select_mask(p, {5, 30}), NoMaskError);
  std::vector<MaskProposal> tie{make_proposal(box_mask(20, 20, 0, 0, 10, 10)),
                                make_proposal(box_mask(20, 20, 0, 0, 10, 10)),
                                make_proposal(box_mask(20, 20, 0, 0, 5, 5))};
  EXPECT_EQ(select_mask(tie, c), 0u);
}

TEST(Erode, ExamplesAndOracle) {
  const auto full = box_mask(10, 10, 0, 0, 10, 10);
  EXPECT_EQ(erode(full, 1), full);
  EXPECT_EQ(erode(full, 3), box_mask(10, 10, 1, 1, 9, 9));
  Mask dot(7, 7, 1, 0);
  dot.at(3, 3) = 1;
  EXPECT_EQ(count_true(erode(dot, 3)), 0u);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    Mask m(23, 17, 1, 0);
    for (auto& v : m.pixels) v = rng() % 5 != 0;
    for (int k : {1, 3, 5, 7}) {
      const auto e = erode(m, k);
      EXPECT_EQ(e, naive_erode(m, k)) << k;
      for (std::size_t i = 0; i < e.pixels.size(); ++i) EXPECT_LE(e.pixels[i], m.pixels[i]);
    }
  }
}

TEST(Backproject, ExamplesAndRoundTrip) {
  const Intrinsics in{60, 50, 32, 24, 64, 48};
  FloatImage d(64, 48, 1, 0.0f);
  d.at(32, 24) = 0.1f;
  Mask m(64, 48, 1, 1);
  auto c = backproject(d, in, m);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].x, 0.0, 1e-12);
  EXPECT_NEAR(c[0].y, 0.0, 1e-12);
  EXPECT_NEAR(c[0].z, 0.1, 1e-7);

  const Intrinsics wide{10, 10, 5, 5, 64, 48};
  FloatImage u(64, 48, 1, 0.0f);
  u.at(15, 5) = 1.0f;
  c = backproject(u, wide, m);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].x, 1.0, 1e-12);
  EXPECT_NEAR(c[0].y, 0.0, 1e-12);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> z(0.05f, 2.0f);
  for (auto& v : d.pixels) v = rng() % 4 ? z(rng) : 0.0f;
  Mask half(64, 48, 1, 0);
  for (auto& v : half.pixels) v = rng() % 2;
  c = backproject(d, in, half);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < d.pixels.size(); ++i) expected += half.pixels[i] && d.pixels[i] > 0;
  EXPECT_EQ(c.size(), expected);
  for (const auto& p : c) {
    EXPECT_NEAR(in.fx * p.x / p.z + in.cx, p.pixel.u, 0.5);
    EXPECT_NEAR(in.fy * p.y / p.z + in.cy, p.pixel.v, 0.5);
  }
}

TEST(QueryPoints, InsideSmallDisk) {
  const auto q = center_query_points({32, 24});
  EXPECT_EQ(q.size(), 9u);
  for (const auto& p : q) EXPECT_LE(std::hypot(p.u - 32, p.v - 24), 5.0);
  EXPECT_NE(std::find(q.begin(), q.end(), Pixel{32, 24}), q.end());
}

TEST(Intrinsics, Validation) {
  EXPECT_NO_THROW(validate(Intrinsics{}));
  EXPECT_THROW(validate(Intrinsics{0, 60, 32, 24, 64, 48}), ArgumentError);
  EXPECT_THROW(validate(Intrinsics{60, 60, 70, 24, 64, 48}), ArgumentError);
}

TEST(Pipeline, StubGroundTruthWithinOneMillimeter) {
  const simrig::Camera cam;
  const std::vector<std::pair<simrig::Surface, simrig::DevicePose>> scenes{
      {{simrig::Surface::Kind::Plane, 0.10, 0.0}, simrig::DevicePose::tilted(20.0, 10.0)},
      {{simrig::Surface::Kind::Plane, 0.11, 0.0}, simrig::DevicePose::tilted(-15.0, -25.0)},
      {{simrig::Surface::Kind::Sphere, 0.14, 0.04}, simrig::DevicePose{}},
      {{simrig::Surface::Kind::Sphere, 0.17, 0.07}, simrig::DevicePose::tilted(5.0, 5.0)}};
  for (const auto& [surface, pose] : scenes) {
    const auto obj = xcap::testing::make_object("scene", 1, surface);
    const auto frame = simrig::render_rgbd(obj, pose, cam);
    StubDepthClient depth(simrig::render_depth_exact(obj, pose, cam));
    const auto truth_mask = simrig::render_object_mask(obj, pose, cam);
    StubSegmenter seg({make_proposal(truth_mask), make_proposal(truth_mask), make_proposal(truth_mask)});
    const auto res = extract_pointcloud(frame, intrinsics_of(cam), depth, seg);
    ASSERT_GT(res.points.size(), 100u);
    EXPECT_LT(cloud_rms_to_surface(res.points, obj, pose), 1e-3);
    EXPECT_NEAR(res.alignment.a, 1.0, 0.01);
    for (std::size_t i = 0; i < res.mask.pixels.size(); ++i) EXPECT_LE(res.mask.pixels[i], truth_mask.pixels[i]);
  }
}

TEST(Pipeline, NoCenterMaskFlagged) {
  const simrig::Camera cam;
  const auto obj = xcap::testing::make_object("m", 1, {simrig::Surface::Kind::Sphere, 0.14, 0.04});
  const auto frame = simrig::render_rgbd(obj, {}, cam);
  StubDepthClient depth(simrig::render_depth_exact(obj, {}, cam));
  const auto corner = make_proposal(box_mask(64, 48, 0, 0, 5, 5));
  StubSegmenter seg({corner, corner, corner});
  EXPECT_THROW(extract_pointcloud(frame, intrinsics_of(cam), depth, seg), NoMaskError);
}

TEST(Pipeline, SensorOnlyStubsAreDeterministic) {
  xcap::testing::TempDir dir;
  const simrig::Camera cam;
  const auto obj = xcap::testing::make_object("d", 1, {simrig::Surface::Kind::Sphere, 0.15, 0.06});
  const auto pose = simrig::DevicePose::tilted(8.0, 3.0);
  std::vector<std::string> texts;
  for (int run = 0; run < 2; ++run) {
    const auto frame = simrig::render_rgbd(obj, pose, cam);
    NearestFillDepthClient depth(frame.depth);
    DepthFloodSegmenter seg(frame.depth);
    const auto res = extract_pointcloud(frame, intrinsics_of(cam), depth, seg);
    EXPECT_LT(cloud_rms_to_surface(res.points, obj, pose), 1e-3);
    const auto path = dir.path() / ("c" + std::to_string(run) + ".ply");
    write_ply(path, res.points);
    texts.push_back(model::read_text(path));
  }
  EXPECT_EQ(texts[0], texts[1]);
}

TEST(Ply, RoundTripAndErrors) {
  xcap::testing::TempDir dir;
  PointCloud c{{0.125, -0.5, 1.0, 1, 2, 3, {}}, {1e-3, 2e-3, 0.3, 255, 0, 128, {}}};
  write_ply(dir.path() / "a.ply", c);
  const auto back = read_ply(dir.path() / "a.ply");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(static_cast<float>(back[i].x), static_cast<float>(c[i].x));
    EXPECT_EQ(static_cast<float>(back[i].z), static_cast<float>(c[i].z));
    EXPECT_EQ(back[i].r, c[i].r);
    EXPECT_EQ(back[i].b, c[i].b);
  }
  EXPECT_EQ(ply_string(back), ply_string(c));
  EXPECT_NE(ply_string(c).find("element vertex 2\n"), std::string::npos);
  model::write_text(dir.path() / "bad.ply", "ply\nelement vertex 3\nend_header\n1 2 3 4 5 6\n");
  EXPECT_THROW(read_ply(dir.path() / "bad.ply"), ParseError);
  model::write_text(dir.path() / "nohdr.ply", "1 2 3\n");
  EXPECT_THROW(read_ply(dir.path() / "nohdr.ply"), ParseError);
}

TEST(Rle, RoundTripAndFormat) {
  Mask m(4, 2, 1, 0);
  m.at(1, 0) = m.at(2, 0) = m.at(0, 1) = 1;
  const auto j = rle_encode(m);
  EXPECT_EQ(j["width"], 4);
  EXPECT_EQ(j["counts"], nlohmann::json({1, 2, 1, 1, 3}));
  EXPECT_EQ(rle_decode(j), m);
  const auto on = box_mask(3, 3, 0, 0, 3, 3);
  EXPECT_EQ(rle_encode(on)["counts"], nlohmann::json({0, 9}));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    Mask r(1 + rng() % 30, 1 + rng() % 30, 1, 0);
    for (auto& v : r.pixels) v = rng() % 3 == 0;
    EXPECT_EQ(rle_decode(rle_encode(r)), r);
  }
  EXPECT_THROW(rle_decode(nlohmann::json{{"width", 2}, {"height", 2}, {"counts", {1, 1}}}), ParseError);
}

TEST(ModelService, RemoteClientsMatchLocal) {
  const simrig::Camera cam;
  const auto obj = xcap::testing::make_object("r", 2, {simrig::Surface::Kind::Sphere, 0.14, 0.05});
  const auto frame = simrig::render_rgbd(obj, {}, cam);
  NearestFillDepthClient local_depth(frame.depth);
  DepthFloodSegmenter local_seg(frame.depth);
  ModelServer server(local_depth, local_seg);
  const int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen(); });
  RemoteDepthClient rdepth("127.0.0.1", port);
  RemoteSegmenterClient rseg("127.0.0.1", port);
  const auto queries = center_query_points({32, 24});
  EXPECT_EQ(rdepth.predict(frame.rgb), local_depth.predict(frame.rgb));
  const auto a = rseg.segment(frame.rgb, queries), b = local_seg.segment(frame.rgb, queries);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].area, b[i].area);
  }
  const auto remote = extract_pointcloud(frame, intrinsics_of(cam), rdepth, rseg);
  const auto direct = extract_pointcloud(frame, intrinsics_of(cam), local_depth, local_seg);
  EXPECT_EQ(ply_string(remote.points), ply_string(direct.points));
  server.stop();
  t.join();
  EXPECT_THROW(RemoteDepthClient("127.0.0.1", port).predict(frame.rgb), IoError);
}
