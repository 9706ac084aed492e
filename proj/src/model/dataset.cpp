#include "xcap/model/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

namespace xcap::model {

using nlohmann::json;

namespace {

constexpr const char* kRequiredPointFiles[] = {
    "rgb.png",  "depth.png",  "tactile_10N.png", "tactile_15N.png", "tactile_20N.png",
    "audio.wav", "hammer.wav", "gains.json",     "poses.json"};

std::string tactile_file(double target_n) {
  return "tactile_" + std::to_string(static_cast<int>(target_n)) + "N.png";
}

json pose_json(const AccelPose& p) {
  return {{"gravity_dir", {p.gravity_dir.x(), p.gravity_dir.y(), p.gravity_dir.z()}},
          {"raw_accel", {p.raw_accel.x(), p.raw_accel.y(), p.raw_accel.z()}},
          {"timestamp_ns", p.timestamp_ns}};
}

// Fetches a required key; parse errors carry the file and the dotted key path.
class JsonReader {
 public:
  JsonReader(std::string file, const json& root) : file_(std::move(file)), root_(root) {}

  template <typename T>
  T get(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) fail(path + key, "missing");
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(path + key, "wrong type");
    }
  }

  const json& child(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) fail(path + key, "missing");
    return obj.at(key);
  }

  Eigen::Vector3d vec3(const json& obj, const std::string& key, const std::string& path) const {
    auto v = get<std::vector<double>>(obj, key, path);
    if (v.size() != 3) fail(path + key, "expected 3 components");
    return {v[0], v[1], v[2]};
  }

  AccelPose pose(const json& obj, const std::string& path) const {
    AccelPose p;
    p.gravity_dir = vec3(obj, "gravity_dir", path);
    p.raw_accel = vec3(obj, "raw_accel", path);
    p.timestamp_ns = get<std::int64_t>(obj, "timestamp_ns", path);
    return p;
  }

  const json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ParseError(file_ + ": key '" + key + "' " + why);
  }

 private:
  std::string file_;
  const json& root_;
};

json parse_json_file(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string force_log_csv(const std::vector<ForceSample>& log) {
  std::string out = "timestamp_ns,raw_counts,contact_force_n\n";
  for (const auto& s : log) {
    out += std::to_string(s.timestamp_ns) + ',' + format_double(s.raw_counts) + ',' +
           format_double(s.contact_force_n) + '\n';
  }
  return out;
}

std::vector<ForceSample> parse_force_log(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (line.rfind("timestamp_ns,raw_counts,contact_force_n", 0) != 0)
    throw ParseError("force_log.csv: unexpected header");
  std::vector<ForceSample> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    ForceSample s;
    std::istringstream fields(line);
    std::string a, b, c;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c))
      throw ParseError("force_log.csv: malformed row " + std::to_string(row));
    try {
      s.timestamp_ns = std::stoll(a);
      s.raw_counts = std::stod(b);
      s.contact_force_n = std::stod(c);
    } catch (const std::exception&) {
      throw ParseError("force_log.csv: malformed row " + std::to_string(row));
    }
    out.push_back(s);
  }
  return out;
}

// Unbiased bounded draw; std::uniform_int_distribution is not specified
// bit-for-bit across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace

fs::path object_dir(const fs::path& root, const std::string& object_id) {
  return root / "objects" / object_id;
}

fs::path point_dir(const fs::path& root, const std::string& object_id, int point_index) {
  return object_dir(root, object_id) / "points" / std::to_string(point_index);
}

fs::path write_point_record(const PointRecord& record, const fs::path& root) {
  validate(record);
  const auto final_dir = point_dir(root, record.object_id, record.point_index);
  const auto staging = final_dir.parent_path() / (".staging-" + std::to_string(record.point_index));
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging, ec);
  if (ec) throw IoError("cannot create " + staging.string() + ": " + ec.message());

  write_png(staging / "rgb.png", record.rgbd.rgb);
  write_png(staging / "depth.png", record.rgbd.depth);
  json tactile = json::array();
  for (const auto& snap : record.tactile) {
    write_png(staging / tactile_file(snap.target_force_n), snap.image);
    tactile.push_back({{"target_force_n", snap.target_force_n},
                       {"measured_force_n", snap.measured_force_n},
                       {"timestamp_ns", snap.timestamp_ns},
                       {"pose", pose_json(snap.pose)}});
  }
  write_wav(staging / "audio.wav", record.audio.mic_samples, record.audio.sample_rate_hz);
  write_wav(staging / "hammer.wav", record.audio.hammer_samples, record.audio.sample_rate_hz);

  const json gains{{"mic_gain_db", record.audio.mic_gain_db},
                   {"hammer_gain_db", record.audio.hammer_gain_db},
                   {"reference_gain_db", record.audio.reference_gain_db}};
  write_text(staging / "gains.json", gains.dump(2) + "\n");

  const json poses{{"format_version", kFormatVersion},
                   {"object_id", record.object_id},
                   {"point_index", record.point_index},
                   {"rgbd", {{"timestamp_ns", record.rgbd.timestamp_ns},
                             {"pose", pose_json(record.rgbd_pose)}}},
                   {"tactile", tactile},
                   {"audio", {{"timestamp_ns", record.audio.timestamp_ns}}}};
  write_text(staging / "poses.json", poses.dump(2) + "\n");
  write_text(staging / "force_log.csv", force_log_csv(record.force_log));

  fs::remove_all(final_dir, ec);
  fs::rename(staging, final_dir, ec);
  if (ec) throw IoError("cannot move point into place: " + ec.message());
  return final_dir;
}

PointRecord read_point_record(const fs::path& dir) {
  for (const char* name : kRequiredPointFiles) {
    if (!fs::is_regular_file(dir / name))
      throw LoadError(std::string("missing ") + name + " in " + dir.string());
  }
  PointRecord r;
  const auto poses = parse_json_file(dir / "poses.json");
  const JsonReader pj("poses.json", poses);
  const auto version = pj.get<int>(poses, "format_version", "");
  if (version != kFormatVersion) pj.fail("format_version", "unsupported value");
  r.object_id = pj.get<std::string>(poses, "object_id", "");
  r.point_index = pj.get<int>(poses, "point_index", "");

  const auto& rgbd = pj.child(poses, "rgbd", "");
  r.rgbd = make_rgbd_frame(read_png_rgb(dir / "rgb.png"), read_png_depth(dir / "depth.png"),
                           pj.get<std::int64_t>(rgbd, "timestamp_ns", "rgbd."));
  r.rgbd_pose = pj.pose(pj.child(rgbd, "pose", "rgbd."), "rgbd.pose.");

  const auto& tactile = pj.child(poses, "tactile", "");
  if (!tactile.is_array()) pj.fail("tactile", "expected array");
  for (std::size_t i = 0; i < tactile.size(); ++i) {
    const auto path = "tactile[" + std::to_string(i) + "].";
    TactileSnapshot s;
    s.target_force_n = pj.get<double>(tactile[i], "target_force_n", path);
    s.measured_force_n = pj.get<double>(tactile[i], "measured_force_n", path);
    s.timestamp_ns = pj.get<std::int64_t>(tactile[i], "timestamp_ns", path);
    s.pose = pj.pose(pj.child(tactile[i], "pose", path), path + "pose.");
    const auto file = dir / tactile_file(s.target_force_n);
    if (!fs::is_regular_file(file)) throw LoadError("missing " + file.filename().string());
    s.image = read_png_rgb(file);
    r.tactile.push_back(std::move(s));
  }

  const auto gains = parse_json_file(dir / "gains.json");
  const JsonReader gj("gains.json", gains);
  r.audio.mic_gain_db = gj.get<double>(gains, "mic_gain_db", "");
  r.audio.hammer_gain_db = gj.get<double>(gains, "hammer_gain_db", "");
  r.audio.reference_gain_db = gj.get<double>(gains, "reference_gain_db", "");
  r.audio.timestamp_ns =
      pj.get<std::int64_t>(pj.child(poses, "audio", ""), "timestamp_ns", "audio.");
  auto mic = read_wav(dir / "audio.wav");
  auto hammer = read_wav(dir / "hammer.wav");
  if (mic.sample_rate_hz != hammer.sample_rate_hz)
    throw ValidationError("hammer.wav: sample rate differs from audio.wav");
  r.audio.sample_rate_hz = mic.sample_rate_hz;
  r.audio.mic_samples = std::move(mic.samples);
  r.audio.hammer_samples = std::move(hammer.samples);

  if (fs::is_regular_file(dir / "force_log.csv")) r.force_log = parse_force_log(dir / "force_log.csv");
  if (fs::is_regular_file(dir / "pointcloud.ply")) r.pointcloud_path = "pointcloud.ply";

  validate(r);
  return r;
}

void write_object_meta(const fs::path& root, const ObjectRecord& object) {
  const auto dir = object_dir(root, object.object_id);
  std::error_code ec;
  fs::create_directories(dir / "points", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const json meta{{"format_version", kFormatVersion},
                  {"object_id", object.object_id},
                  {"label", object.label},
                  {"environment", object.environment ? json(std::string(to_string(*object.environment)))
                                                     : json(nullptr)}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

ObjectRecord read_object_meta(const fs::path& dir) {
  const auto meta = parse_json_file(dir / "meta.json");
  const JsonReader mj("meta.json", meta);
  ObjectRecord o;
  o.object_id = mj.get<std::string>(meta, "object_id", "");
  o.label = mj.get<std::string>(meta, "label", "");
  const auto& env = mj.child(meta, "environment", "");
  if (!env.is_null()) {
    if (!env.is_string()) mj.fail("environment", "wrong type");
    o.environment = environment_from_string(env.get<std::string>());
    if (!o.environment) mj.fail("environment", "unknown environment");
  }
  return o;
}

Manifest build_manifest(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset root is not a directory: " + root.string());
  Manifest m;
  m.dataset_root = root;
  const auto objects = root / "objects";
  if (!fs::exists(objects)) return m;

  std::error_code ec;
  fs::directory_iterator it(objects, ec);
  if (ec) throw IoError("cannot read " + objects.string() + ": " + ec.message());
  std::map<std::string, ManifestEntry> by_id;
  for (const auto& entry : it) {
    if (!entry.is_directory()) continue;
    const auto dirname = entry.path().filename().string();
    if (dirname.starts_with('.')) continue;
    ManifestEntry e;
    e.object_id = dirname;
    if (fs::is_regular_file(entry.path() / "meta.json")) {
      const auto meta = read_object_meta(entry.path());
      e.object_id = meta.object_id;
      e.environment = meta.environment;
    }
    int valid = 0;
    for (int k = 0; k < kPointsPerObject; ++k) {
      const auto pdir = entry.path() / "points" / std::to_string(k);
      if (!fs::is_directory(pdir)) continue;
      try {
        auto rec = read_point_record(pdir);
        valid += rec.object_id == e.object_id && rec.point_index == k;
      } catch (const Error&) {
      }
    }
    e.complete = valid == kPointsPerObject;
    if (by_id.contains(e.object_id))
      throw ValidationError("duplicate object_id '" + e.object_id + "' in " + objects.string());
    by_id.emplace(e.object_id, std::move(e));
  }
  for (auto& [id, e] : by_id) m.objects.push_back(std::move(e));
  return m;
}

json to_json(const Manifest& manifest) {
  json objects = json::array();
  for (const auto& e : manifest.objects) {
    objects.push_back({{"object_id", e.object_id},
                       {"environment", e.environment ? json(std::string(to_string(*e.environment)))
                                                     : json(nullptr)},
                       {"complete", e.complete}});
  }
  return {{"format_version", manifest.format_version}, {"objects", objects}};
}

void write_manifest(const Manifest& manifest) {
  const auto path = manifest.dataset_root / "manifest.json";
  const auto tmp = manifest.dataset_root / ".manifest.json.tmp";
  write_text(tmp, to_json(manifest).dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace manifest.json: " + ec.message());
}

Manifest read_manifest(const fs::path& root) {
  const auto j = parse_json_file(root / "manifest.json");
  const JsonReader r("manifest.json", j);
  Manifest m;
  m.dataset_root = root;
  m.format_version = r.get<int>(j, "format_version", "");
  const auto& objects = r.child(j, "objects", "");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto path = "objects[" + std::to_string(i) + "].";
    ManifestEntry e;
    e.object_id = r.get<std::string>(objects[i], "object_id", path);
    e.complete = r.get<bool>(objects[i], "complete", path);
    const auto& env = r.child(objects[i], "environment", path);
    if (!env.is_null()) e.environment = environment_from_string(env.get<std::string>());
    m.objects.push_back(std::move(e));
  }
  return m;
}

Split split_dataset(const Manifest& manifest, std::size_t n_train, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& e : manifest.objects)
    if (e.complete) ids.push_back(e.object_id);
  if (n_train > ids.size())
    throw ArgumentError("n_train " + std::to_string(n_train) + " exceeds " +
                        std::to_string(ids.size()) + " complete objects");
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[bounded(rng, i)]);
  Split s;
  s.seed = seed;
  s.train_ids.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return s;
}

json to_json(const Split& split) {
  return {{"seed", split.seed},
          {"train", std::vector<std::string>(split.train_ids.begin(), split.train_ids.end())},
          {"test", std::vector<std::string>(split.test_ids.begin(), split.test_ids.end())}};
}

fs::path write_split(const fs::path& root, const std::string& name, const Split& split) {
  std::error_code ec;
  fs::create_directories(root / "splits", ec);
  if (ec) throw IoError("cannot create splits directory: " + ec.message());
  const auto path = root / "splits" / (name + ".json");
  write_text(path, to_json(split).dump(2) + "\n");
  return path;
}

Split read_split(const fs::path& path) {
  const auto j = parse_json_file(path);
  const JsonReader r(path.filename().string(), j);
  Split s;
  s.seed = r.get<std::uint64_t>(j, "seed", "");
  for (auto& id : r.get<std::vector<std::string>>(j, "train", "")) s.train_ids.insert(id);
  for (auto& id : r.get<std::vector<std::string>>(j, "test", "")) s.test_ids.insert(id);
  return s;
}

}  // namespace xcap::model
