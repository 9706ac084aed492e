#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "support.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"
#include "xcap/model/dataset.hpp"

using namespace xcap;
using namespace xcap::model;
using xcap::testing::TempDir;
using xcap::testing::make_object;
using xcap::testing::make_record;

namespace {

std::string bytes_str(const Bytes& b) { return {b.begin(), b.end()}; }
Bytes str_bytes(const std::string& s) { return {s.begin(), s.end()}; }

void write_complete_object(const std::filesystem::path& root, const std::string& id, std::uint64_t seed,
                           int points = kPointsPerObject) {
  const auto obj = make_object(id, seed);
  for (int k = 0; k < points; ++k) write_point_record(make_record(obj, k, seed + k), root);
  write_object_meta(root, {id, obj.label, obj.environment, {}});
}

}  // namespace

TEST(Base64, Rfc4648Vectors) {
  const std::pair<const char*, const char*> v[] = {{"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},
                                                   {"foo", "Zm9v"},  {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
                                                   {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : v) {
    EXPECT_EQ(base64_encode(str_bytes(plain)), enc);
    EXPECT_EQ(bytes_str(base64_decode(enc)), plain);
  }
}

TEST(Base64, RejectsMalformed) {
  EXPECT_THROW(base64_decode("abc"), ParseError);
  EXPECT_THROW(base64_decode("ab!="), ParseError);
  EXPECT_THROW(base64_decode("Zg==Zg=="), ParseError);
}

TEST(Base64, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    Bytes b(rng() % 97);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(base64_decode(base64_encode(b)), b);
  }
}

TEST(Png, RgbAndDepthLossless) {
  std::mt19937_64 rng(5);
  RgbImage rgb(17, 9, 3);
  for (auto& p : rgb.pixels) p = static_cast<std::uint8_t>(rng());
  DepthImage depth(17, 9, 1);
  for (auto& p : depth.pixels) p = static_cast<std::uint16_t>(rng());
  EXPECT_EQ(decode_png_rgb(encode_png(rgb)), rgb);
  EXPECT_EQ(decode_png_depth(encode_png(depth)), depth);
}

TEST(Png, RejectsGarbage) {
  const Bytes junk{1, 2, 3, 4, 5};
  EXPECT_THROW(decode_png_rgb(junk), Error);
}

TEST(Wav, FloatSamplesBitExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> s(4097);
  for (auto& x : s) x = u(rng);
  s[0] = -0.0f;
  s[1] = std::numeric_limits<float>::denorm_min();
  const auto wav = decode_wav(encode_wav(s, 44100));
  EXPECT_EQ(wav.sample_rate_hz, 44100);
  ASSERT_EQ(wav.samples.size(), s.size());
  EXPECT_EQ(std::memcmp(wav.samples.data(), s.data(), s.size() * sizeof(float)), 0);
}

TEST(Wav, HeaderFields) {
  const std::vector<float> s{0.5f, -0.5f};
  const auto b = encode_wav(s, 48000);
  ASSERT_EQ(b.size(), 44u + 8u);
  EXPECT_EQ(bytes_str(Bytes(b.begin(), b.begin() + 4)), "RIFF");
  EXPECT_EQ(bytes_str(Bytes(b.begin() + 8, b.begin() + 12)), "WAVE");
  EXPECT_EQ(b[20], 3);  // IEEE float
  EXPECT_EQ(b[34], 32);  // bits per sample
}

TEST(RgbdFrame, CenterDepthFromPrincipalPixel) {
  RgbImage rgb(8, 6, 3);
  DepthImage depth(8, 6, 1);
  depth.at(4, 3) = 123;
  auto f = make_rgbd_frame(rgb, depth, 5);
  ASSERT_TRUE(f.center_depth_m);
  EXPECT_DOUBLE_EQ(*f.center_depth_m, 0.123);
  depth.at(4, 3) = 0;
  EXPECT_FALSE(make_rgbd_frame(rgb, depth, 5).center_depth_m);
  EXPECT_THROW(validate(make_rgbd_frame(rgb, DepthImage(7, 6, 1), 5)), ValidationError);
}

TEST(PointRecord, WriteReadRoundTripIsExact) {
  TempDir dir;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto obj = make_object("obj" + std::to_string(seed), seed);
    for (int k = 0; k < kPointsPerObject; ++k) {
      const auto rec = make_record(obj, k, seed * 10 + k);
      const auto pdir = write_point_record(rec, dir.path());
      EXPECT_EQ(pdir, dir.path() / "objects" / obj.object_id / "points" / std::to_string(k));
      for (const char* f : {"rgb.png", "depth.png", "tactile_10N.png", "tactile_15N.png", "tactile_20N.png",
                            "audio.wav", "hammer.wav", "gains.json", "poses.json", "force_log.csv"})
        EXPECT_TRUE(std::filesystem::is_regular_file(pdir / f)) << f;
      const auto back = read_point_record(pdir);
      EXPECT_EQ(back, rec);
      ASSERT_EQ(back.audio.mic_samples.size(), rec.audio.mic_samples.size());
      EXPECT_EQ(std::memcmp(back.audio.mic_samples.data(), rec.audio.mic_samples.data(),
                            rec.audio.mic_samples.size() * sizeof(float)),
                0);
    }
  }
}

TEST(PointRecord, ForceLogCsvHeader) {
  TempDir dir;
  const auto rec = make_record(make_object("a", 1), 0, 1);
  const auto pdir = write_point_record(rec, dir.path());
  std::ifstream in(pdir / "force_log.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "timestamp_ns,raw_counts,contact_force_n");
}

TEST(PointRecord, IncompleteTactileIsRejected) {
  TempDir dir;
  auto rec = make_record(make_object("a", 1), 0, 1);
  rec.tactile.pop_back();
  try {
    write_point_record(rec, dir.path());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("tactile targets incomplete"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(std::filesystem::exists(point_dir(dir.path(), "a", 0)));
}

TEST(PointRecord, OtherInvariantsNameTheField) {
  auto rec = make_record(make_object("a", 1), 0, 1);
  auto bad = rec;
  bad.point_index = 6;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = rec;
  bad.tactile[0].measured_force_n = bad.tactile[0].target_force_n + 0.6;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = rec;
  bad.audio.hammer_samples.pop_back();
  EXPECT_THROW(validate(bad), ValidationError);
  bad = rec;
  bad.rgbd_pose.gravity_dir *= 1.01;
  EXPECT_THROW(validate(bad), ValidationError);
}

TEST(PointRecord, MissingFileNamesIt) {
  TempDir dir;
  const auto pdir = write_point_record(make_record(make_object("a", 1), 0, 1), dir.path());
  std::filesystem::remove(pdir / "audio.wav");
  try {
    read_point_record(pdir);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("audio.wav"), std::string::npos);
  }
}

TEST(PointRecord, MismatchedDepthSizeIsValidationError) {
  TempDir dir;
  const auto pdir = write_point_record(make_record(make_object("a", 1), 0, 1), dir.path());
  write_png(pdir / "depth.png", DepthImage(10, 10, 1));
  EXPECT_THROW(read_point_record(pdir), ValidationError);
}

TEST(PointRecord, MalformedMetadataNamesFileAndKey) {
  TempDir dir;
  const auto pdir = write_point_record(make_record(make_object("a", 1), 0, 1), dir.path());
  write_text(pdir / "gains.json", R"({"mic_gain_db": "loud", "hammer_gain_db": 0, "reference_gain_db": 0})");
  try {
    read_point_record(pdir);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("gains.json"), std::string::npos) << what;
    EXPECT_NE(what.find("mic_gain_db"), std::string::npos) << what;
  }
}

TEST(Manifest, EmptyRoot) {
  TempDir dir;
  EXPECT_TRUE(build_manifest(dir.path()).objects.empty());
}

TEST(Manifest, CompletenessFlags) {
  TempDir dir;
  write_complete_object(dir.path(), "a", 1);
  write_complete_object(dir.path(), "b", 2);
  write_complete_object(dir.path(), "c", 3, 4);
  const auto m = build_manifest(dir.path());
  ASSERT_EQ(m.objects.size(), 3u);
  EXPECT_TRUE(m.objects[0].complete);
  EXPECT_TRUE(m.objects[1].complete);
  EXPECT_FALSE(m.objects[2].complete);
  EXPECT_EQ(m.complete_count(), 2u);
  EXPECT_EQ(build_manifest(dir.path()), m);  // idempotent

  write_manifest(m);
  EXPECT_EQ(read_manifest(dir.path()), m);
}

TEST(Manifest, DuplicateObjectIdIsValidationError) {
  TempDir dir;
  write_complete_object(dir.path(), "a", 1, 1);
  write_object_meta(dir.path(), {"b", "", std::nullopt, {}});
  // A second directory whose metadata claims the same id.
  write_text(object_dir(dir.path(), "b") / "meta.json",
             R"({"format_version": 1, "object_id": "a", "label": "", "environment": null})");
  EXPECT_THROW(build_manifest(dir.path()), ValidationError);
}

TEST(Split, PaperProportions) {
  Manifest m;
  for (int i = 0; i < 500; ++i) m.objects.push_back({"o" + std::to_string(i), std::nullopt, true});
  const auto s = split_dataset(m, 400, 0);
  EXPECT_EQ(s.train_ids.size(), 400u);
  EXPECT_EQ(s.test_ids.size(), 100u);
  for (const auto& id : s.test_ids) EXPECT_FALSE(s.train_ids.contains(id));
}

TEST(Split, PropertiesOverSeeds) {
  Manifest m;
  std::set<std::string> complete;
  for (int i = 0; i < 60; ++i) {
    const bool c = i % 7 != 0;
    m.objects.push_back({"o" + std::to_string(i), std::nullopt, c});
    if (c) complete.insert("o" + std::to_string(i));
  }
  std::mt19937_64 rng(11);
  std::set<std::set<std::string>> distinct;
  for (int t = 0; t < 100; ++t) {
    const auto seed = rng();
    const std::size_t n = rng() % (complete.size() + 1);
    const auto s = split_dataset(m, n, seed);
    EXPECT_EQ(s, split_dataset(m, n, seed));
    EXPECT_EQ(s.train_ids.size(), n);
    std::set<std::string> all = s.train_ids;
    for (const auto& id : s.test_ids) EXPECT_TRUE(all.insert(id).second) << "overlap " << id;
    EXPECT_EQ(all, complete);
    if (n == 20) distinct.insert(s.train_ids);
  }
  // The shuffle does not depend on manifest order.
  Manifest reversed = m;
  std::reverse(reversed.objects.begin(), reversed.objects.end());
  EXPECT_EQ(split_dataset(reversed, 20, 9), split_dataset(m, 20, 9));
}

TEST(Split, EdgeCases) {
  Manifest m;
  for (int i = 0; i < 5; ++i) m.objects.push_back({"o" + std::to_string(i), std::nullopt, true});
  EXPECT_TRUE(split_dataset(m, 5, 1).test_ids.empty());
  EXPECT_THROW(split_dataset(m, 6, 1), ArgumentError);
}

TEST(Split, FileRoundTrip) {
  TempDir dir;
  Manifest m;
  for (int i = 0; i < 10; ++i) m.objects.push_back({"o" + std::to_string(i), std::nullopt, true});
  const auto s = split_dataset(m, 7, 42);
  const auto path = write_split(dir.path(), "main", s);
  EXPECT_EQ(path, dir.path() / "splits" / "main.json");
  EXPECT_EQ(read_split(path), s);
}
