#include "xcap/bridge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "xcap/audio/dsp.hpp"
#include "xcap/bridge/daemon.hpp"
#include "xcap/bridge/server.hpp"
#include "xcap/cloud/clients.hpp"
#include "xcap/cloud/pipeline.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"
#include "xcap/model/dataset.hpp"
#include "xcap/xsrl/metrics.hpp"
#include "xcap/xsrl/train.hpp"

namespace xcap::bridge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

json load_json(const fs::path& path) {
  try {
    return json::parse(model::read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::pair<std::string, int> split_host_port(const std::string& s, int default_port) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) return {s, default_port};
  try {
    return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ArgumentError("bad host:port '" + s + "'");
  }
}

void write_or_print(const json& report, const std::string& out_path, std::ostream& out) {
  if (!out_path.empty()) model::write_text(out_path, report.dump(2) + "\n");
  out << xsrl::report_text(report);
}

cloud::Intrinsics intrinsics_from_json(const json& j) {
  cloud::Intrinsics c;
  c.fx = j.value("fx", c.fx);
  c.fy = j.value("fy", c.fy);
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.cx = j.value("cx", c.width / 2.0);
  c.cy = j.value("cy", c.height / 2.0);
  cloud::validate(c);
  return c;
}

xsrl::SyntheticSpec synthetic_from_json(const json& j) {
  xsrl::SyntheticSpec s;
  s.n_objects = j.value("n_objects", s.n_objects);
  s.m_points = j.value("m_points", s.m_points);
  s.latent_dim = j.value("latent_dim", s.latent_dim);
  s.point_spread = j.value("point_spread", s.point_spread);
  s.noise = j.value("noise", s.noise);
  s.seed = j.value("seed", s.seed);
  if (j.contains("input_dims")) {
    s.input_dims.clear();
    for (const auto& [name, d] : j.at("input_dims").items()) {
      const auto m = xsrl::modality_from_string(name);
      if (!m) throw ArgumentError("synthetic: unknown modality '" + name + "'");
      s.input_dims[*m] = d.get<int>();
    }
  }
  return s;
}

// Splits synthetic objects into train and held-out sets by id order.
std::pair<xsrl::FeatureSet, xsrl::FeatureSet> synthetic_split(const xsrl::SyntheticSpec& spec, int test_objects) {
  const auto all = xsrl::synthetic_features(spec);
  auto ids = all.object_ids();
  if (test_objects <= 0 || test_objects >= static_cast<int>(ids.size()))
    throw ArgumentError("test_objects must be in (0, n_objects)");
  const std::vector<std::string> test(ids.end() - test_objects, ids.end());
  const std::vector<std::string> train(ids.begin(), ids.end() - test_objects);
  return {xsrl::subset_objects(all, train), xsrl::subset_objects(all, test)};
}

int cmd_capture(const std::string& scenario_path, const std::string& dataset, const std::string& listen,
                bool auto_op, const std::string& config_path, bool fast, double max_seconds, bool verbose,
                std::ostream& out) {
  DaemonConfig cfg;
  if (!config_path.empty()) cfg = daemon_config_from_json(load_json(config_path));
  cfg.dataset_root = dataset;
  cfg.auto_operator = auto_op;
  auto backend = std::make_unique<SimBackend>(simrig::load_scenario(scenario_path));
  auto hub = std::make_shared<Hub>();
  Daemon daemon(cfg, std::move(backend), hub);

  std::unique_ptr<TcpServer> server;
  if (!listen.empty()) {
    const auto [host, port] = split_host_port(listen, kDefaultPort);
    server = std::make_unique<TcpServer>(hub);
    const int bound = server->bind(host, port);
    server->start();
    out << "listening on " << host << ":" << bound << "\n" << std::flush;
  }

  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto max_ns = static_cast<std::int64_t>(max_seconds * 1e9);
  const auto period = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / cfg.session.tick_rate_hz));
  auto next = std::chrono::steady_clock::now();
  while (!g_stop && !(auto_op && daemon.finished())) {
    daemon.tick();
    if (max_seconds > 0 && daemon.now_ns() >= max_ns) break;
    if (!fast) {
      next += period;
      std::this_thread::sleep_until(next);
    }
  }
  if (server) server->stop();
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);

  if (verbose)
    for (const auto& d : daemon.diagnostics()) out << "  " << d << "\n";
  out << "sim time " << static_cast<double>(daemon.now_ns()) / 1e9 << " s, points persisted "
      << daemon.persisted_points() << ", audio takes " << daemon.audio_takes() << "\n";
  if (!dataset.empty() && fs::exists(fs::path(dataset) / "manifest.json")) {
    const auto m = model::read_manifest(dataset);
    out << "complete objects " << m.complete_count() << "/" << m.objects.size() << "\n";
  }
  return 0;
}

int cmd_postprocess(const std::string& dataset, bool stub_models, const std::string& service,
                    const std::string& intr_path, std::ostream& out) {
  if (stub_models == !service.empty())
    throw ArgumentError("postprocess: pass exactly one of --stub-models or --model-service");
  const auto intr = intr_path.empty() ? cloud::Intrinsics{} : intrinsics_from_json(load_json(intr_path));
  cloud::validate(intr);
  const auto objects = fs::path(dataset) / "objects";
  if (!fs::is_directory(objects)) throw LoadError("postprocess: no objects directory in " + dataset);

  std::vector<fs::path> point_dirs;
  for (const auto& o : fs::directory_iterator(objects)) {
    if (!fs::is_directory(o.path() / "points")) continue;
    for (const auto& p : fs::directory_iterator(o.path() / "points"))
      if (p.is_directory() && p.path().filename().string().front() != '.') point_dirs.push_back(p.path());
  }
  std::sort(point_dirs.begin(), point_dirs.end());

  int failures = 0;
  for (const auto& dir : point_dirs) {
    json status{{"audio", "ok"}, {"pointcloud", "ok"}};
    model::PointRecord rec;
    try {
      rec = model::read_point_record(dir);
    } catch (const std::exception& e) {
      status = {{"record", e.what()}};
      model::write_text(dir / "postprocess.json", status.dump(2) + "\n");
      out << dir.string() << ": FAILED record: " << e.what() << "\n";
      ++failures;
      continue;
    }
    try {
      const auto norm = audio::normalize_recording(rec.audio, rec.audio.reference_gain_db);
      model::write_wav(dir / "audio_norm.wav", norm, rec.audio.sample_rate_hz);
    } catch (const std::exception& e) {
      status["audio"] = e.what();
    }
    try {
      std::unique_ptr<cloud::DepthPredictorClient> depth;
      std::unique_ptr<cloud::SegmenterClient> seg;
      if (stub_models) {
        depth = std::make_unique<cloud::NearestFillDepthClient>(rec.rgbd.depth);
        seg = std::make_unique<cloud::DepthFloodSegmenter>(rec.rgbd.depth);
      } else {
        const auto [host, port] = split_host_port(service, 8000);
        depth = std::make_unique<cloud::RemoteDepthClient>(host, port);
        seg = std::make_unique<cloud::RemoteSegmenterClient>(host, port);
      }
      const auto res = cloud::extract_pointcloud(rec.rgbd, intr, *depth, *seg);
      cloud::write_ply(dir / "pointcloud.ply", res.points);
      status["points"] = res.points.size();
      status["alignment"] = {{"a", res.alignment.a}, {"b", res.alignment.b}, {"residual_rms", res.alignment.residual_rms}};
    } catch (const std::exception& e) {
      status["pointcloud"] = e.what();
    }
    model::write_text(dir / "postprocess.json", status.dump(2) + "\n");
    const bool ok = status["audio"] == "ok" && status["pointcloud"] == "ok";
    if (!ok) ++failures;
    out << dir.string() << ": " << (ok ? "ok" : "FAILED " + status.dump()) << "\n";
  }
  out << point_dirs.size() - static_cast<std::size_t>(failures) << "/" << point_dirs.size() << " points processed\n";
  return failures == 0 ? 0 : 2;
}

int cmd_validate(const std::string& dataset, std::ostream& out) {
  const auto m = model::build_manifest(dataset);
  model::write_manifest(m);
  for (const auto& e : m.objects) {
    out << e.object_id << ": " << (e.complete ? "complete" : "incomplete") << "\n";
    if (e.complete) continue;
    for (int k = 0; k < model::kPointsPerObject; ++k) {
      const auto dir = model::point_dir(dataset, e.object_id, k);
      try {
        model::read_point_record(dir);
      } catch (const std::exception& ex) {
        out << "  point " << k << ": " << ex.what() << "\n";
      }
    }
  }
  out << m.complete_count() << "/" << m.objects.size() << " objects complete\n";
  return m.complete_count() == m.objects.size() ? 0 : 1;
}

int cmd_split(const std::string& dataset, std::size_t n_train, std::uint64_t seed, const std::string& name,
              std::ostream& out) {
  const auto m = model::read_manifest(dataset);
  const auto s = model::split_dataset(m, n_train, seed);
  const auto path = model::write_split(dataset, name, s);
  out << "train " << s.train_ids.size() << ", test " << s.test_ids.size() << " -> " << path.string() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_path, std::ostream& out) {
  const json j = config_path.empty() ? json::object() : load_json(config_path);
  const auto spec = synthetic_from_json(j.value("synthetic", json::object()));
  const auto cfg = xsrl::train_config_from_json(j.value("train", json::object()));
  const auto [train, test] = synthetic_split(spec, j.value("test_objects", 50));
  const auto res = xsrl::train_linear(train, cfg);
  const auto table = xsrl::embed(res.encoders, test);
  xsrl::write_embedding_table(out_path, table);
  out << "loss " << res.loss_trace.front() << " -> " << res.loss_trace.back() << "; "
      << test.object_ids().size() << " held-out objects embedded to " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& kind, const std::string& table_path, const std::string& config_path,
             const std::string& out_path, std::ostream& out) {
  const json j = config_path.empty() ? json::object() : load_json(config_path);
  if (kind == "retrieval" || kind == "localization") {
    if (table_path.empty()) throw ArgumentError("eval " + kind + ": --table is required");
    const auto table = xsrl::read_embedding_table(table_path);
    const auto cfg = xsrl::eval_config_from_json(j.value("eval", j));
    const auto k = kind == "retrieval" ? xsrl::EvalKind::Retrieval : xsrl::EvalKind::Localization;
    write_or_print(xsrl::evaluation_report(table, k, cfg), out_path, out);
    return 0;
  }
  if (kind == "sweep") {
    xsrl::SweepConfig sc;
    if (j.contains("sizes")) sc.sizes = j.at("sizes").get<std::vector<int>>();
    if (j.contains("seeds")) sc.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("train")) sc.train = xsrl::train_config_from_json(j.at("train"));
    if (j.contains("eval")) sc.eval = xsrl::eval_config_from_json(j.at("eval"));
    sc.metric_k = j.value("metric_k", sc.metric_k);
    const auto spec = synthetic_from_json(j.value("synthetic", json::object()));
    const auto [train, test] = synthetic_split(spec, j.value("test_objects", 50));
    const auto points = xsrl::scaling_sweep(train, test, sc);
    const auto report = xsrl::sweep_report(points, sc);
    if (!out_path.empty()) model::write_text(out_path, report.dump(2) + "\n");
    for (const auto& [size, mean] : xsrl::sweep_means(points))
      out << "objects " << size << ": mean top-" << sc.metric_k << " " << mean << "\n";
    return 0;
  }
  throw ArgumentError("eval: unknown kind '" + kind + "' (retrieval, localization, sweep)");
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"xcap: multisensory capture daemon, dataset tools and evaluation"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string scenario, dataset, listen, config, service, intr, table, out_path, name = "default", kind;
  bool auto_op = false, fast = false, stub = false, verbose = false;
  double max_seconds = 0.0;
  std::size_t n_train = 0;
  std::uint64_t seed = 0;

  auto* capture = app.add_subcommand("capture", "Run the capture daemon against the simulated rig");
  capture->add_option("--sim", scenario, "Scenario JSON for the simulated rig")->required()->check(CLI::ExistingFile);
  capture->add_option("--dataset", dataset, "Dataset root to write completed points into");
  capture->add_option("--listen", listen, "host:port for UI connections (empty: no server)");
  capture->add_flag("--auto", auto_op, "Drive every object through all points with the built-in operator");
  capture->add_option("--config", config, "Daemon configuration JSON")->check(CLI::ExistingFile);
  capture->add_flag("--fast", fast, "Do not pace ticks to wall-clock time");
  capture->add_flag("--verbose", verbose, "Print the daemon diagnostics log on exit");
  capture->add_option("--max-seconds", max_seconds, "Stop after this much rig time (0: no limit)");

  auto* post = app.add_subcommand("postprocess", "Normalize audio and extract object point clouds");
  post->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  post->add_flag("--stub-models", stub, "Use depth-derived stand-ins for the depth and segmentation models");
  post->add_option("--model-service", service, "host:port of the depth/segmentation service");
  post->add_option("--intrinsics", intr, "Camera intrinsics JSON")->check(CLI::ExistingFile);

  auto* val = app.add_subcommand("validate", "Rebuild and check the dataset manifest");
  val->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);

  auto* split = app.add_subcommand("split", "Write a seeded train/test split of complete objects");
  split->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  split->add_option("--train", n_train, "Number of training objects")->required();
  split->add_option("--seed", seed);
  split->add_option("--name", name);

  auto* train = app.add_subcommand("train", "Train linear encoders on synthetic features and write an embedding table");
  train->add_option("--config", config)->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Embedding index path (*.idx.json)")->required();

  auto* eval = app.add_subcommand("eval", "Retrieval, localization or scaling-sweep evaluation");
  eval->add_option("kind", kind, "retrieval | localization | sweep")->required();
  eval->add_option("--table", table, "Embedding index path")->check(CLI::ExistingFile);
  eval->add_option("--config", config)->check(CLI::ExistingFile);
  eval->add_option("--out", out_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*capture) return cmd_capture(scenario, dataset, listen, auto_op, config, fast, max_seconds, verbose, out);
    if (*post) return cmd_postprocess(dataset, stub, service, intr, out);
    if (*val) return cmd_validate(dataset, out);
    if (*split) return cmd_split(dataset, n_train, seed, name, out);
    if (*train) return cmd_train(config, out_path, out);
    if (*eval) return cmd_eval(kind, table, config, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace xcap::bridge
