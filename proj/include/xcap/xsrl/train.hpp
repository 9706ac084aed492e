#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "xcap/xsrl/embedding.hpp"
#include "xcap/xsrl/loss.hpp"
#include "xcap/xsrl/metrics.hpp"

namespace xcap::xsrl {

/// Raw per-modality features with rows aligned on keys[i] = (object, point).
struct FeatureSet {
  std::vector<std::pair<std::string, int>> keys;
  std::map<Modality, Eigen::MatrixXd> features;

  [[nodiscard]] std::size_t rows() const { return keys.size(); }
  [[nodiscard]] std::vector<std::string> object_ids() const;  // sorted, unique
};

void validate(const FeatureSet& fs);
/// Rows belonging to the given objects, in original order.
FeatureSet subset_objects(const FeatureSet& fs, const std::vector<std::string>& ids);
/// Keys present in every listed modality of the table.
FeatureSet features_from_table(const EmbeddingTable& table, const std::vector<Modality>& modalities);

struct SyntheticSpec {
  int n_objects = 200;
  int m_points = 6;
  int latent_dim = 32;
  std::map<Modality, int> input_dims{{Modality::Rgb, 64},
                                     {Modality::Tactile, 48},
                                     {Modality::Audio, 48},
                                     {Modality::PointCloud, 48}};
  double point_spread = 0.5;  // per-point latent offset scale relative to the object
  double noise = 0.05;
  std::uint64_t seed = 0;
};

/// x_m = M_m·z + ε with z = c_object + spread·u_point shared across modalities.
FeatureSet synthetic_features(const SyntheticSpec& spec);

enum class LossKind { Image, CrossSensory, Mse };

std::string_view to_string(LossKind k);
std::optional<LossKind> loss_kind_from_string(std::string_view name);

struct TrainConfig {
  LossKind loss = LossKind::CrossSensory;
  int embed_dim = 16;
  int batch_size = 64;
  int steps = 200;
  double learning_rate = 1e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double temperature = kDefaultTemperature;
  bool rgb_frozen = true;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct LinearEncoderSet {
  std::map<Modality, Eigen::MatrixXd> weights;  // d_in × embed_dim
  bool rgb_frozen = true;

  /// Row-normalized X·W.
  [[nodiscard]] Eigen::MatrixXd encode(Modality m, const Eigen::MatrixXd& X) const;
};

struct TrainResult {
  LinearEncoderSet encoders;
  std::vector<double> loss_trace;  // one entry per optimizer step
};

/// AdamW on the chosen loss. Mse aligns every other modality to the frozen
/// RGB embedding. Throws TrainingError on a non-finite loss.
TrainResult train_linear(const FeatureSet& data, const TrainConfig& cfg);

/// Loss over the full set with the given encoders (no update).
double evaluate_loss(const LinearEncoderSet& enc, const FeatureSet& data, LossKind kind, double tau);

EmbeddingTable embed(const LinearEncoderSet& enc, const FeatureSet& data);

struct SweepConfig {
  std::vector<int> sizes{1, 10, 50, 150};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainConfig train;
  EvalConfig eval;
  int metric_k = 5;
};

struct SweepPoint {
  int size = 0;
  std::uint64_t seed = 0;
  std::map<std::pair<Modality, Modality>, double> accuracy;  // top-metric_k per ordered pair
  double mean = 0.0;
};

/// For each (size, seed): train on a seeded subset of train objects, embed
/// the test set and evaluate retrieval for every ordered modality pair.
std::vector<SweepPoint> scaling_sweep(const FeatureSet& train, const FeatureSet& test, const SweepConfig& cfg);

/// Seed-mean of SweepPoint::mean per size.
std::map<int, double> sweep_means(const std::vector<SweepPoint>& points);
nlohmann::json sweep_report(const std::vector<SweepPoint>& points, const SweepConfig& cfg);

}  // namespace xcap::xsrl
