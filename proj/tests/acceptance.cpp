// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <fmt/core.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "fsm_explore.hpp"
#include "support.hpp"
#include "xcap/audio/dsp.hpp"
#include "xcap/capture/force.hpp"
#include "xcap/capture/trigger.hpp"
#include "xcap/cloud/clients.hpp"
#include "xcap/cloud/pipeline.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"
#include "xcap/model/dataset.hpp"
#include "xcap/simrig/render.hpp"
#include "xcap/simrig/simulator.hpp"
#include "xcap/xsrl/loss.hpp"
#include "xcap/xsrl/metrics.hpp"
#include "xcap/xsrl/train.hpp"

using namespace xcap;
using Eigen::MatrixXd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<simrig::SimObject> corpus_objects() {
  auto objects = simrig::load_scenario(std::string(XCAP_SOURCE_DIR) + "/scenarios/two_objects.json").world.objects;
  for (int i = 0; i < 20; ++i) objects.push_back(xcap::testing::make_object("corpus" + std::to_string(i), 500 + i));
  return objects;
}

// 1. Noisy ramps through the load-cell model, compensated and triggered.
Outcome force_triggering() {
  const auto t0 = Clock::now();
  const capture::TriggerConfig cfg;
  const simrig::LoadCellTruth truth{0.01, 8000.0, 0.05};
  capture::ForceCalibration calib;
  calib.scale_n_per_count = truth.scale_n_per_count;
  calib.tare_counts = truth.tare_counts;
  calib.m_eff_kg = truth.m_eff_kg;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> rate(2.0, 10.0), peak(21.0, 25.0), pitch(-90, 30), yaw(-180, 180);
  std::normal_distribution<double> noise(0.0, 0.1);  // Newtons of load-cell noise
  constexpr int kHz = 200;
  int bad = 0, fired = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = peak(rng);
    const auto profile = simrig::ForceProfile::ramp(p, p / rate(rng), 0.5);
    const auto pose = simrig::DevicePose::tilted(pitch(rng), yaw(rng));
    const auto accel = simrig::accel_pose(pose, 0);
    capture::TriggerEngine engine(cfg);
    std::vector<capture::TriggerFire> fires;
    const int n = static_cast<int>(profile.duration_s() * kHz) + 1;
    for (int i = 0; i < n; ++i) {
      const double f = profile.at(static_cast<double>(i) / kHz);
      const double counts = simrig::load_cell_counts(f + noise(rng), pose, truth);
      if (auto fire = engine.push(i * 5'000'000LL, capture::contact_force(counts, accel, calib))) fires.push_back(*fire);
    }
    bool ok = fires.size() == cfg.targets_n.size();
    for (std::size_t k = 0; k < fires.size(); ++k) {
      const double err = std::abs(fires[k].measured_n - fires[k].target_n);
      worst = std::max(worst, err);
      ok = ok && k < cfg.targets_n.size() && fires[k].target_n == cfg.targets_n[k] && err <= cfg.window_n;
    }
    fired += static_cast<int>(fires.size());
    bad += ok ? 0 : 1;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0,
          fmt::format("1000 ramps, {} snapshots, {} bad profiles, max |err| {:.3f} N, {:.2f} s", fired, bad, worst, secs)};
}

// 2. 100 device orientations at 10 N true contact force.
Outcome gravity_compensation() {
  const simrig::LoadCellTruth truth{0.01, 8000.0, 0.05};
  const double h = simrig::load_cell_counts(0.0, simrig::DevicePose::tilted(0.0), truth);
  const double v = simrig::load_cell_counts(0.0, simrig::DevicePose::tilted(-90.0), truth);
  const auto calib = capture::calibrate_two_pose(h, v, truth.scale_n_per_count);
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> pitch(-90, 90), yaw(-180, 180);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto pose = simrig::DevicePose::tilted(pitch(rng), yaw(rng));
    const double f = capture::contact_force(simrig::load_cell_counts(10.0, pose, truth), simrig::accel_pose(pose, 0), calib);
    worst = std::max(worst, std::abs(f - 10.0));
  }
  return {worst < 0.01, fmt::format("two-pose calibration, 100 orientations, max |err| {:.2e} N", worst)};
}

// 3. Loudness spread over 40 dB below the default-gain ceiling, both channels.
Outcome agc() {
  const audio::AgcConfig cfg;
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> strike(10.0, 80.0);
  const int n = 81;
  int max_takes = 0, failures = 0;
  double lo = 0.0, hi = -100.0;
  for (int i = 0; i < n; ++i) {
    auto obj = xcap::testing::make_object("agc" + std::to_string(i), 3000 + i);
    const simrig::HammerPulse pulse{strike(rng), 48, 480};
    const double target_db = -45.0 + 40.0 * i / (n - 1);  // default-gain peak, evenly over 40 dB
    const auto base = simrig::record_take(simrig::synth_impact(obj, i % 6, pulse, 48000, 0.3), 0.0, 0.0);
    obj.points[i % 6].loudness_scale *= audio::db_to_linear(target_db - audio::to_dbfs(audio::peak_abs(base.mic_samples)));
    const auto sig = simrig::synth_impact(obj, i % 6, pulse, 48000, 0.3);
    double g_mic = cfg.default_gain_db, g_ham = cfg.default_gain_db;
    int takes = 0;
    audio::AgcDecision dm, dh;
    do {
      const auto take = simrig::record_take(sig, g_mic, g_ham);
      dm = audio::agc_evaluate(take.mic_samples, g_mic, cfg);
      dh = audio::agc_evaluate(take.hammer_samples, g_ham, cfg);
      g_mic = dm.next_gain_db;
      g_ham = dh.next_gain_db;
      ++takes;
    } while (!(dm.accept && dh.accept) && takes < 10);
    const bool ok = dm.accept && dh.accept && !dm.clipped && !dh.clipped && takes <= 2 &&
                    dm.peak_dbfs >= -6.0 && dm.peak_dbfs < 0.0 && dh.peak_dbfs >= -6.0 && dh.peak_dbfs < 0.0;
    failures += ok ? 0 : 1;
    max_takes = std::max(max_takes, takes);
    lo = std::min({lo, dm.peak_dbfs, dh.peak_dbfs});
    hi = std::max({hi, dm.peak_dbfs, dh.peak_dbfs});
  }
  return {failures == 0, fmt::format("{} objects over 40 dB, max {} takes, final peaks in [{:.2f}, {:.2f}] dBFS, {} failures",
                                     n, max_takes, lo, hi, failures)};
}

// 4. Normalized recordings agree across strike amplitude and gain.
Outcome normalization() {
  double worst = 0.0;
  int clipped = 0, cases = 0;
  for (const auto& obj : corpus_objects()) {
    for (int p = 0; p < static_cast<int>(obj.points.size()); ++p) {
      std::vector<std::vector<float>> outs;
      for (double a : {5.0, 10.0, 20.0})
        for (double g : {0.0, 6.0, 12.0}) {
          const auto take = simrig::record_take(simrig::synth_impact(obj, p, {a, 48, 480}, 48000, 0.25), g - 12.0, g);
          clipped += audio::detect_clipping(take.mic_samples) || audio::detect_clipping(take.hammer_samples);
          outs.push_back(audio::normalize_recording(take, 0.0));
        }
      for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j)
          worst = std::max(worst, audio::relative_rms_difference(outs[i], outs[j]));
      ++cases;
    }
  }
  return {worst <= 0.01 && clipped == 0,
          fmt::format("{} object points × 9 takes, max pairwise RMS diff {:.3e}, {} clipped takes", cases, worst, clipped)};
}

// 5. Clean single strikes pass, double hits with ratio >= 0.3 fail.
Outcome impulse_classifier() {
  const auto objects = corpus_objects();
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> amp(10.0, 60.0), ratio(0.3, 1.0);
  std::uniform_int_distribution<int> width(32, 96), delay(150, 9000);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 200; ++i) {
    const auto& obj = objects[i % objects.size()];
    const simrig::HammerPulse pulse{amp(rng), width(rng), 480};
    const auto one = simrig::record_take(simrig::synth_impact(obj, i % 6, pulse, 48000, 0.25), 0.0, 12.0);
    try {
      accepted += audio::verify_clean_impulse(audio::find_impulse(one.hammer_samples, 1e-4));
    } catch (const NoImpulseError&) {
    }
    const auto two =
        simrig::record_take(simrig::synth_double_hit(obj, i % 6, pulse, delay(rng), ratio(rng), 48000, 0.25), 0.0, 12.0);
    try {
      rejected += !audio::verify_clean_impulse(audio::find_impulse(two.hammer_samples, 1e-4));
    } catch (const NoImpulseError&) {
      ++rejected;
    }
  }
  return {accepted == 200 && rejected == 200,
          fmt::format("single strikes accepted {}/200, double hits rejected {}/200", accepted, rejected)};
}

// 6. Scale/offset recovery, checked against a QR least-squares oracle.
Outcome depth_alignment() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> ua(0.2, 5.0), ub(0.1, 1.0), up(0.5, 3.0);
  std::normal_distribution<double> n(0.0, 1.0);
  double exact_residual = 0.0, exact_param = 0.0, worst_rel = 0.0, oracle_gap = 0.0;
  constexpr std::size_t kPixels = 640 * 480;
  std::vector<double> p(kPixels), s(kPixels);
  for (int t = 0; t < 100; ++t) {
    const double a = ua(rng), b = ub(rng);
    for (std::size_t i = 0; i < kPixels; ++i) {
      p[i] = up(rng);
      s[i] = a * p[i] + b;
    }
    const auto exact = cloud::align_depth(p, s);
    exact_residual = std::max(exact_residual, exact.residual_rms);
    exact_param = std::max({exact_param, std::abs(exact.a - a) / a, std::abs(exact.b - b) / b});
    for (std::size_t i = 0; i < kPixels; ++i) s[i] = (a * p[i] + b) * (1.0 + 0.05 * n(rng));
    const auto fit = cloud::align_depth(p, s);
    worst_rel = std::max({worst_rel, std::abs(fit.a - a) / a, std::abs(fit.b - b) / b});
    if (t < 5) {
      Eigen::MatrixXd A(kPixels, 2);
      Eigen::VectorXd y(kPixels);
      for (std::size_t i = 0; i < kPixels; ++i) {
        A(static_cast<Eigen::Index>(i), 0) = p[i];
        A(static_cast<Eigen::Index>(i), 1) = 1.0;
        y(static_cast<Eigen::Index>(i)) = s[i];
      }
      const Eigen::Vector2d ref = A.colPivHouseholderQr().solve(y);
      oracle_gap = std::max({oracle_gap, std::abs(fit.a - ref(0)), std::abs(fit.b - ref(1))});
    }
  }
  const bool ok = exact_residual < 1e-9 && exact_param < 1e-9 && worst_rel <= 0.02 && oracle_gap < 1e-9;
  return {ok, fmt::format("noiseless residual {:.1e} (param err {:.1e}); 5% noise max rel err {:.2e} over 100 VGA "
                          "trials; QR oracle gap {:.1e}",
                          exact_residual, exact_param, worst_rel, oracle_gap)};
}

double cloud_rms(const cloud::PointCloud& c, const simrig::SimObject& obj, const simrig::DevicePose& pose) {
  double acc = 0.0;
  for (const auto& p : c) {
    const Eigen::Vector3d w = pose.position + pose.orientation.normalized() * Eigen::Vector3d(p.x, p.y, p.z);
    const double d = simrig::surface_distance(obj.surface, w);
    acc += d * d;
  }
  return c.empty() ? INFINITY : std::sqrt(acc / static_cast<double>(c.size()));
}

// 7. Stub-client clouds on plane and sphere scenes; reruns are byte-identical.
Outcome pointcloud() {
  const simrig::Camera cam;
  const cloud::Intrinsics intr{cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height};
  const std::vector<std::pair<simrig::Surface, simrig::DevicePose>> scenes{
      {{simrig::Surface::Kind::Plane, 0.10, 0.0}, simrig::DevicePose::tilted(20.0, 10.0)},
      {{simrig::Surface::Kind::Plane, 0.12, 0.0}, simrig::DevicePose::tilted(-15.0, -25.0)},
      {{simrig::Surface::Kind::Plane, 0.09, 0.0}, simrig::DevicePose::tilted(30.0, 0.0)},
      {{simrig::Surface::Kind::Sphere, 0.14, 0.04}, simrig::DevicePose{}},
      {{simrig::Surface::Kind::Sphere, 0.17, 0.07}, simrig::DevicePose::tilted(5.0, 5.0)},
      {{simrig::Surface::Kind::Sphere, 0.15, 0.06}, simrig::DevicePose::tilted(8.0, 3.0)}};
  double worst = 0.0;
  bool identical = true;
  std::size_t points = 0;
  for (const auto& [surface, pose] : scenes) {
    const auto obj = xcap::testing::make_object("scene", 7, surface);
    std::vector<std::string> plys;
    for (int run = 0; run < 2; ++run) {
      const auto frame = simrig::render_rgbd(obj, pose, cam);
      const auto truth = simrig::render_object_mask(obj, pose, cam);
      cloud::StubDepthClient exact(simrig::render_depth_exact(obj, pose, cam));
      cloud::StubSegmenter seg({cloud::make_proposal(truth), cloud::make_proposal(truth), cloud::make_proposal(truth)});
      const auto a = cloud::extract_pointcloud(frame, intr, exact, seg);
      cloud::NearestFillDepthClient fill(frame.depth);
      cloud::DepthFloodSegmenter flood(frame.depth);
      const auto b = cloud::extract_pointcloud(frame, intr, fill, flood);
      worst = std::max({worst, cloud_rms(a.points, obj, pose), cloud_rms(b.points, obj, pose)});
      points += a.points.size();
      plys.push_back(cloud::ply_string(a.points) + cloud::ply_string(b.points));
    }
    identical = identical && plys[0] == plys[1];
  }
  return {worst < 1e-3 && identical,
          fmt::format("{} scenes × 2 client sets, max RMS {:.3f} mm, {} points, reruns {}", scenes.size(), worst * 1e3,
                      points, identical ? "byte-identical" : "DIFFER")};
}

xsrl::EmbeddingTable random_table(int objects, int points, int dim, std::uint64_t seed, bool identical) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  xsrl::EmbeddingTable t(dim);
  std::vector<float> v(dim);
  for (int o = 0; o < objects; ++o)
    for (int p = 0; p < points; ++p) {
      const auto id = fmt::format("o{:05d}", o);
      for (auto& x : v) x = n(rng);
      t.set(xsrl::Modality::Rgb, id, p, v);
      if (!identical)
        for (auto& x : v) x = n(rng);
      t.set(xsrl::Modality::Audio, id, p, v);
    }
  return t;
}

// 8. Monte-Carlo chance levels and the perfect-embedding ceiling.
Outcome metric_baselines() {
  xsrl::EvalConfig cfg;
  cfg.n_objects = 100;
  cfg.n_samplings = 200;
  cfg.seed = 8;
  const auto rnd = random_table(2000, 6, 32, 8008, false);
  const auto r = xsrl::retrieval_eval(rnd, xsrl::Modality::Audio, xsrl::Modality::Rgb, cfg);
  const auto l = xsrl::localization_eval(rnd, xsrl::Modality::Audio, xsrl::Modality::Rgb, cfg);
  const auto same = random_table(200, 6, 32, 8009, true);
  const auto ri = xsrl::retrieval_eval(same, xsrl::Modality::Audio, xsrl::Modality::Rgb, cfg);
  const auto li = xsrl::localization_eval(same, xsrl::Modality::Audio, xsrl::Modality::Rgb, cfg);
  const bool ok = r.trials >= 10000 && l.trials >= 10000 && std::abs(r.top_k.at(5) - 0.05) <= 0.01 &&
                  std::abs(l.top1 - 1.0 / 6.0) <= 0.01 && ri.top_k.at(1) == 1.0 && li.top1 == 1.0;
  return {ok, fmt::format("random top-5 {:.2f}% (N=100, {} trials), localization top-1 {:.2f}% (M=6, {} trials); "
                          "identical tables {:.0f}% / {:.0f}%",
                          100 * r.top_k.at(5), r.trials, 100 * l.top1, l.trials, 100 * ri.top_k.at(1), 100 * li.top1)};
}

MatrixXd random_rows(int b, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  MatrixXd X(b, d);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  X.rowwise().normalize();
  return X;
}

double max_fd_error(const xsrl::ModalityBatch& batch, bool cross, double tau) {
  const auto loss = [&](const xsrl::ModalityBatch& b) {
    return (cross ? xsrl::cross_sensory_loss(b, tau) : xsrl::image_loss(b, tau)).loss;
  };
  const auto analytic = cross ? xsrl::cross_sensory_loss(batch, tau) : xsrl::image_loss(batch, tau);
  double worst = 0.0;
  constexpr double h = 1e-6;
  for (const auto& [m, X] : batch)
    for (Eigen::Index i = 0; i < X.size(); ++i) {
      auto plus = batch, minus = batch;
      plus[m].data()[i] += h;
      minus[m].data()[i] -= h;
      const double fd = (loss(plus) - loss(minus)) / (2 * h);
      worst = std::max(worst, std::abs(fd - analytic.grads.at(m).data()[i]));
    }
  return worst;
}

// 9. Loss identities, gradients and the uniform-batch value.
Outcome loss_correctness() {
  std::mt19937_64 rng(9009);
  bool identity = true;
  for (int t = 0; t < 20; ++t) {
    const xsrl::ModalityBatch two{{xsrl::Modality::Rgb, random_rows(16, 8, rng)},
                                  {xsrl::kAllModalities[2 + t % 3], random_rows(16, 8, rng)}};
    const auto a = xsrl::image_loss(two, 0.07), b = xsrl::cross_sensory_loss(two, 0.07);
    identity = identity && a.loss == b.loss;
    for (const auto& [m, g] : a.grads) identity = identity && g == b.grads.at(m);
  }
  double fd = 0.0;
  for (int t = 0; t < 3; ++t) {
    const xsrl::ModalityBatch batch{{xsrl::Modality::Rgb, random_rows(8, 4, rng)},
                                    {xsrl::Modality::Tactile, random_rows(8, 4, rng)},
                                    {xsrl::Modality::Audio, random_rows(8, 4, rng)},
                                    {xsrl::Modality::PointCloud, random_rows(8, 4, rng)}};
    fd = std::max({fd, max_fd_error(batch, false, 0.07), max_fd_error(batch, true, 0.07)});
  }
  const MatrixXd U = MatrixXd::Constant(64, 8, 1.0 / std::sqrt(8.0));
  const double uniform = xsrl::info_nce_symmetric(U, U, 0.07).loss;
  const bool ok = identity && fd < 1e-4 && std::abs(uniform - 4.1589) <= 1e-4 && std::abs(uniform - std::log(64.0)) <= 1e-6;
  return {ok, fmt::format("2-modality identity {}, max FD gradient error {:.1e}, uniform B=64 loss {:.10f} (ln 64 = {:.10f})",
                          identity ? "exact" : "BROKEN", fd, uniform, std::log(64.0))};
}

xsrl::TrainConfig desk_train(std::uint64_t seed) {
  xsrl::TrainConfig c;
  c.learning_rate = 0.01;
  c.steps = 300;
  c.seed = seed;
  return c;
}

// 10. Linear encoders on shared-latent data beat chance for every pair; the
// scaling sweep rises with subset size.
Outcome desk_trainer() {
  const auto t0 = Clock::now();
  xsrl::EvalConfig eval;
  eval.n_objects = 100;
  double worst = 1.0;
  std::string worst_pair;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    xsrl::SyntheticSpec spec;
    spec.n_objects = 250;
    spec.seed = 100 + seed;
    const auto all = xsrl::synthetic_features(spec);
    const auto ids = all.object_ids();
    const auto train = xsrl::subset_objects(all, {ids.begin(), ids.begin() + 150});
    const auto test = xsrl::subset_objects(all, {ids.begin() + 150, ids.end()});
    const auto table = xsrl::embed(xsrl::train_linear(train, desk_train(seed)).encoders, test);
    for (auto q : table.modalities())
      for (auto g : table.modalities())
        if (q != g) {
          const double acc = xsrl::retrieval_eval(table, q, g, eval).top_k.at(5);
          if (acc < worst) {
            worst = acc;
            worst_pair = fmt::format("{}->{} seed {}", xsrl::to_string(q), xsrl::to_string(g), seed);
          }
        }
  }
  xsrl::SyntheticSpec spec;
  spec.n_objects = 250;
  spec.seed = 77;
  const auto all = xsrl::synthetic_features(spec);
  const auto ids = all.object_ids();
  const auto train = xsrl::subset_objects(all, {ids.begin(), ids.begin() + 150});
  const auto test = xsrl::subset_objects(all, {ids.begin() + 150, ids.end()});
  xsrl::SweepConfig sweep;
  sweep.train = desk_train(0);
  sweep.train.steps = 200;
  sweep.eval = eval;
  const auto means = xsrl::sweep_means(xsrl::scaling_sweep(train, test, sweep));
  const int smallest = means.begin()->first, largest = means.rbegin()->first;
  std::string curve;
  for (const auto& [size, m] : means) curve += fmt::format(" {}:{:.1f}%", size, 100 * m);
  const bool ok = worst >= 5 * 0.05 && means.at(largest) > means.at(smallest);
  return {ok, fmt::format("min held-out top-5 {:.1f}% ({}), chance 5%; sweep seed-means{}; {:.1f} s", 100 * worst,
                          worst_pair, curve, seconds_since(t0))};
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  const auto text = model::read_text(p);
  return {text.begin(), text.end()};
}

// 11. Exhaustive FSM exploration and a bit-exact dataset round trip.
Outcome fsm_and_dataset() {
  const auto t0 = Clock::now();
  const auto r = xcap::testing::explore_fsm(12, capture::SessionConfig{});
  xcap::testing::TempDir a, b;
  bool exact = true;
  std::size_t files = 0;
  for (const auto& obj : corpus_objects()) {
    if (obj.points.size() != static_cast<std::size_t>(model::kPointsPerObject)) continue;
    for (int k = 0; k < model::kPointsPerObject; ++k) {
      const auto rec = xcap::testing::make_record(obj, k, 11000 + k);
      const auto dir_a = model::write_point_record(rec, a.path());
      const auto back = model::read_point_record(dir_a);
      exact = exact && back == rec &&
              std::memcmp(back.audio.mic_samples.data(), rec.audio.mic_samples.data(),
                          rec.audio.mic_samples.size() * sizeof(float)) == 0 &&
              std::memcmp(back.audio.hammer_samples.data(), rec.audio.hammer_samples.data(),
                          rec.audio.hammer_samples.size() * sizeof(float)) == 0;
      const auto dir_b = model::write_point_record(back, b.path());
      for (const auto& e : std::filesystem::directory_iterator(dir_a)) {
        exact = exact && file_bytes(e.path()) == file_bytes(dir_b / e.path().filename());
        ++files;
      }
    }
  }
  const bool ok = r.violations.empty() && r.rejected_changed == 0 && r.point_complete > 0 && exact;
  return {ok, fmt::format("depth 12: {} states, {} sequences, {} PointComplete states, {} violations, {} mutating "
                          "rejections; dataset round trip {} over {} files; {:.1f} s",
                          r.states, r.sequences, r.point_complete, r.violations.size(), r.rejected_changed,
                          exact ? "bit-exact" : "DIFFERS", files, seconds_since(t0))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Force triggering", force_triggering},
      {"Gravity compensation", gravity_compensation},
      {"Automatic gain control", agc},
      {"Audio normalization", normalization},
      {"Clean-impulse classifier", impulse_classifier},
      {"Depth alignment", depth_alignment},
      {"Point-cloud pipeline", pointcloud},
      {"Metric baselines", metric_baselines},
      {"Loss correctness", loss_correctness},
      {"Desk-scale trainer", desk_trainer},
      {"FSM safety and dataset round trip", fsm_and_dataset},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {:>2}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
