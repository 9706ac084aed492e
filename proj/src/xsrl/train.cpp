#include "xcap/xsrl/train.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "xcap/error.hpp"

namespace xcap::xsrl {

using Eigen::MatrixXd;

std::vector<std::string> FeatureSet::object_ids() const {
  std::set<std::string> s;
  for (const auto& k : keys) s.insert(k.first);
  return {s.begin(), s.end()};
}

void validate(const FeatureSet& fs) {
  if (fs.features.size() < 2) throw ArgumentError("features: need at least 2 modalities");
  for (const auto& [m, X] : fs.features)
    if (static_cast<std::size_t>(X.rows()) != fs.keys.size())
      throw ArgumentError(fmt::format("features: {} has {} rows, expected {}", to_string(m), X.rows(),
                                      fs.keys.size()));
}

FeatureSet subset_objects(const FeatureSet& fs, const std::vector<std::string>& ids) {
  const std::set<std::string> want(ids.begin(), ids.end());
  std::vector<Eigen::Index> rows;
  FeatureSet out;
  for (std::size_t i = 0; i < fs.keys.size(); ++i)
    if (want.contains(fs.keys[i].first)) {
      rows.push_back(static_cast<Eigen::Index>(i));
      out.keys.push_back(fs.keys[i]);
    }
  for (const auto& [m, X] : fs.features) out.features[m] = X(rows, Eigen::all);
  return out;
}

FeatureSet features_from_table(const EmbeddingTable& table, const std::vector<Modality>& modalities) {
  if (modalities.empty()) throw ArgumentError("features_from_table: no modalities");
  FeatureSet out;
  for (const auto& [k, v] : table.entries()) {
    if (k.modality != modalities.front()) continue;
    bool all = true;
    for (Modality m : modalities) all = all && table.find(m, k.object_id, k.point);
    if (all) out.keys.emplace_back(k.object_id, k.point);
  }
  for (Modality m : modalities) {
    MatrixXd X(static_cast<Eigen::Index>(out.keys.size()), table.dim());
    for (std::size_t i = 0; i < out.keys.size(); ++i) {
      const auto& v = table.at(m, out.keys[i].first, out.keys[i].second);
      for (int c = 0; c < table.dim(); ++c) X(static_cast<Eigen::Index>(i), c) = v[static_cast<std::size_t>(c)];
    }
    out.features[m] = std::move(X);
  }
  return out;
}

namespace {

MatrixXd gaussian(Eigen::Index r, Eigen::Index c, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd M(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) M(i, j) = n(rng);
  return M;
}

}  // namespace

FeatureSet synthetic_features(const SyntheticSpec& spec) {
  if (spec.n_objects < 1 || spec.m_points < 1 || spec.latent_dim < 1)
    throw ArgumentError("synthetic: sizes must be positive");
  if (spec.input_dims.size() < 2) throw ArgumentError("synthetic: need at least 2 modalities");
  std::mt19937_64 rng(spec.seed);
  const Eigen::Index n = static_cast<Eigen::Index>(spec.n_objects) * spec.m_points;
  const MatrixXd centers = gaussian(spec.n_objects, spec.latent_dim, 1.0, rng);
  const MatrixXd offsets = gaussian(n, spec.latent_dim, spec.point_spread, rng);
  MatrixXd Z(n, spec.latent_dim);
  FeatureSet fs;
  for (int o = 0; o < spec.n_objects; ++o)
    for (int p = 0; p < spec.m_points; ++p) {
      const Eigen::Index r = static_cast<Eigen::Index>(o) * spec.m_points + p;
      Z.row(r) = centers.row(o) + offsets.row(r);
      fs.keys.emplace_back(fmt::format("obj{:05d}", o), p);
    }
  for (const auto& [m, d_in] : spec.input_dims) {
    const MatrixXd Mm = gaussian(spec.latent_dim, d_in, 1.0 / std::sqrt(spec.latent_dim), rng);
    fs.features[m] = Z * Mm + gaussian(n, d_in, spec.noise, rng);
  }
  return fs;
}

std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::Image: return "image";
    case LossKind::CrossSensory: return "cross_sensory";
    case LossKind::Mse: return "mse";
  }
  return "cross_sensory";
}

std::optional<LossKind> loss_kind_from_string(std::string_view name) {
  for (LossKind k : {LossKind::Image, LossKind::CrossSensory, LossKind::Mse})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void validate(const TrainConfig& c) {
  if (c.embed_dim < 1 || c.batch_size < 2 || c.steps < 0) throw ArgumentError("train config: bad sizes");
  if (!(c.learning_rate >= 0.0) || !(c.weight_decay >= 0.0)) throw ArgumentError("train config: bad rates");
  if (!(c.temperature > 0.0)) throw ArgumentError("train config: temperature must be positive");
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    if (j.contains("loss")) {
      const auto k = loss_kind_from_string(j.at("loss").get<std::string>());
      if (!k) throw ParseError("train config: unknown loss " + j.at("loss").dump());
      c.loss = *k;
    }
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.steps = j.value("steps", c.steps);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.temperature = j.value("temperature", c.temperature);
    c.rgb_frozen = j.value("rgb_frozen", c.rgb_frozen);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  validate(c);
  return c;
}

namespace {

MatrixXd row_normalize(const MatrixXd& Z, Eigen::VectorXd* norms = nullptr) {
  Eigen::VectorXd n = Z.rowwise().norm();
  n = n.cwiseMax(1e-12);
  if (norms) *norms = n;
  return n.cwiseInverse().asDiagonal() * Z;
}

struct Forward {
  std::map<Modality, MatrixXd> E;
  std::map<Modality, Eigen::VectorXd> norms;
};

Forward forward(const LinearEncoderSet& enc, const std::map<Modality, MatrixXd>& X) {
  Forward f;
  for (const auto& [m, x] : X) f.E[m] = row_normalize(x * enc.weights.at(m), &f.norms[m]);
  return f;
}

// Loss and gradient with respect to each modality's normalized embedding.
MultiLoss loss_on(const std::map<Modality, MatrixXd>& E, LossKind kind, double tau) {
  if (kind == LossKind::Image) return image_loss(E, tau);
  if (kind == LossKind::CrossSensory) return cross_sensory_loss(E, tau);
  if (!E.contains(Modality::Rgb)) throw ArgumentError("mse loss: RGB modality missing");
  MultiLoss out;
  const MatrixXd& target = E.at(Modality::Rgb);
  out.grads[Modality::Rgb] = MatrixXd::Zero(target.rows(), target.cols());
  for (const auto& [m, e] : E) {
    if (m == Modality::Rgb) continue;
    const MseLoss l = mse_align_loss(e, target);
    out.loss += l.loss;
    out.grads[m] = l.dX;
    ++out.terms;
  }
  return out;
}

}  // namespace

MatrixXd LinearEncoderSet::encode(Modality m, const MatrixXd& X) const {
  auto it = weights.find(m);
  if (it == weights.end()) throw ArgumentError("encode: no encoder for " + std::string(to_string(m)));
  if (X.cols() != it->second.rows()) throw ArgumentError("encode: feature dimension mismatch");
  return row_normalize(X * it->second);
}

double evaluate_loss(const LinearEncoderSet& enc, const FeatureSet& data, LossKind kind, double tau) {
  validate(data);
  return loss_on(forward(enc, data.features).E, kind, tau).loss;
}

TrainResult train_linear(const FeatureSet& data, const TrainConfig& cfg) {
  validate(data);
  validate(cfg);
  if (data.rows() < 2) throw ArgumentError("train: need at least 2 rows");
  std::mt19937_64 rng(cfg.seed);

  TrainResult res;
  res.encoders.rgb_frozen = cfg.rgb_frozen;
  for (const auto& [m, X] : data.features)
    res.encoders.weights[m] = gaussian(X.cols(), cfg.embed_dim, 1.0 / std::sqrt(static_cast<double>(X.cols())), rng);

  std::map<Modality, MatrixXd> m1, m2;
  for (const auto& [m, W] : res.encoders.weights) {
    m1[m] = MatrixXd::Zero(W.rows(), W.cols());
    m2[m] = MatrixXd::Zero(W.rows(), W.cols());
  }

  const std::size_t n = data.rows();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;

  for (int step = 1; step <= cfg.steps; ++step) {
    if (cursor + batch > n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                         order.begin() + static_cast<std::ptrdiff_t>(cursor + batch));
    cursor += batch;

    std::map<Modality, MatrixXd> X;
    for (const auto& [m, F] : data.features) X[m] = F(rows, Eigen::all);
    const Forward f = forward(res.encoders, X);
    const MultiLoss L = loss_on(f.E, cfg.loss, cfg.temperature);
    if (!std::isfinite(L.loss))
      throw TrainingError(fmt::format("train: non-finite loss at step {} (lr {}, batch {})", step,
                                      cfg.learning_rate, batch));
    res.loss_trace.push_back(L.loss);

    const double bc1 = 1.0 - std::pow(cfg.beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (auto& [m, W] : res.encoders.weights) {
      if (m == Modality::Rgb && cfg.rgb_frozen) continue;
      // Back through row normalization: dZ = (dE − E·diag(⟨dE, E⟩)) / |z|.
      const MatrixXd& E = f.E.at(m);
      const MatrixXd& dE = L.grads.at(m);
      const Eigen::VectorXd proj = (dE.array() * E.array()).rowwise().sum();
      const MatrixXd dZ = f.norms.at(m).cwiseInverse().asDiagonal() * (dE - proj.asDiagonal() * E);
      const MatrixXd G = X.at(m).transpose() * dZ;
      m1[m] = cfg.beta1 * m1[m] + (1.0 - cfg.beta1) * G;
      m2[m] = cfg.beta2 * m2[m] + (1.0 - cfg.beta2) * G.cwiseProduct(G);
      W -= cfg.learning_rate * cfg.weight_decay * W;
      W.array() -= cfg.learning_rate * (m1[m].array() / bc1) / ((m2[m].array() / bc2).sqrt() + cfg.eps);
    }
  }
  return res;
}

EmbeddingTable embed(const LinearEncoderSet& enc, const FeatureSet& data) {
  validate(data);
  const int dim = static_cast<int>(enc.weights.begin()->second.cols());
  EmbeddingTable t(dim);
  std::vector<float> row(static_cast<std::size_t>(dim));
  for (const auto& [m, X] : data.features) {
    const MatrixXd E = enc.encode(m, X);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (int c = 0; c < dim; ++c) row[static_cast<std::size_t>(c)] = static_cast<float>(E(static_cast<Eigen::Index>(i), c));
      t.set(m, data.keys[i].first, data.keys[i].second, row, false);
    }
  }
  return t;
}

std::vector<SweepPoint> scaling_sweep(const FeatureSet& train, const FeatureSet& test, const SweepConfig& cfg) {
  validate(train);
  validate(test);
  const auto ids = train.object_ids();
  std::vector<SweepPoint> out;
  for (int size : cfg.sizes) {
    if (size < 1 || static_cast<std::size_t>(size) > ids.size())
      throw ArgumentError(fmt::format("sweep: size {} outside [1, {}]", size, ids.size()));
    for (std::uint64_t seed : cfg.seeds) {
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(size));
      auto pick = ids;
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(static_cast<std::size_t>(size));
      TrainConfig tc = cfg.train;
      tc.seed = seed;
      const auto trained = train_linear(subset_objects(train, pick), tc);
      const EmbeddingTable table = embed(trained.encoders, test);
      EvalConfig ec = cfg.eval;
      ec.seed = seed;
      SweepPoint sp;
      sp.size = size;
      sp.seed = seed;
      double sum = 0.0;
      for (const auto& [q, Xq] : test.features)
        for (const auto& [t, Xt] : test.features) {
          if (q == t) continue;
          const auto r = retrieval_eval(table, q, t, ec);
          const auto it = r.top_k.find(cfg.metric_k);
          if (it == r.top_k.end()) throw ArgumentError("sweep: metric_k not in eval top_k");
          sp.accuracy[{q, t}] = it->second;
          sum += it->second;
        }
      sp.mean = sum / static_cast<double>(sp.accuracy.size());
      out.push_back(std::move(sp));
    }
  }
  return out;
}

std::map<int, double> sweep_means(const std::vector<SweepPoint>& points) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& p : points) {
    acc[p.size].first += p.mean;
    ++acc[p.size].second;
  }
  std::map<int, double> out;
  for (const auto& [s, v] : acc) out[s] = v.first / v.second;
  return out;
}

nlohmann::json sweep_report(const std::vector<SweepPoint>& points, const SweepConfig& cfg) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json acc = nlohmann::json::array();
    for (const auto& [pair, v] : p.accuracy)
      acc.push_back({{"query", to_string(pair.first)}, {"target", to_string(pair.second)}, {"accuracy", v}});
    runs.push_back({{"size", p.size}, {"seed", p.seed}, {"mean", p.mean}, {"pairs", acc}});
  }
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [s, m] : sweep_means(points)) curve.push_back({{"size", s}, {"mean_accuracy", m}});
  return {{"kind", "sweep"},
          {"metric", "top" + std::to_string(cfg.metric_k)},
          {"loss", to_string(cfg.train.loss)},
          {"runs", runs},
          {"curve", curve}};
}

}  // namespace xcap::xsrl
