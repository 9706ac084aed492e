#include "xcap/xsrl/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "xcap/error.hpp"

namespace xcap::xsrl {

void validate(const EvalConfig& cfg) {
  if (cfg.n_objects < 0) throw ArgumentError("eval config: n_objects must be >= 0");
  if (cfg.m_points < 1) throw ArgumentError("eval config: m_points must be >= 1");
  if (cfg.n_samplings < 1) throw ArgumentError("eval config: n_samplings must be >= 1");
  if (cfg.top_k.empty()) throw ArgumentError("eval config: top_k is empty");
  for (int k : cfg.top_k)
    if (k < 1 || (cfg.n_objects > 0 && k > cfg.n_objects))
      throw ArgumentError("eval config: top_k entries must lie in [1, n_objects]");
  if (!(cfg.temperature > 0.0)) throw ArgumentError("eval config: temperature must be positive");
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  try {
    c.n_objects = j.value("n_objects", c.n_objects);
    c.m_points = j.value("m_points", c.m_points);
    c.top_k = j.value("top_k", c.top_k);
    c.n_samplings = j.value("n_samplings", c.n_samplings);
    c.temperature = j.value("temperature", c.temperature);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("eval config: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"n_objects", c.n_objects}, {"m_points", c.m_points},       {"top_k", c.top_k},
          {"n_samplings", c.n_samplings}, {"temperature", c.temperature}, {"seed", c.seed}};
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

std::size_t rank_of(const std::vector<float>& q, const std::vector<const std::vector<float>*>& candidates,
                    std::size_t truth) {
  const double s_true = cosine(q, *candidates[truth]);
  std::size_t rank = 1;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (j == truth) continue;
    const double s = cosine(q, *candidates[j]);
    if (s > s_true || (s == s_true && j < truth)) ++rank;
  }
  return rank;
}

namespace {

std::vector<std::string> common_objects(const EmbeddingTable& t, Modality q, Modality g) {
  const auto a = t.object_ids(q);
  const auto b = t.object_ids(g);
  std::vector<std::string> gaps;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(gaps));
  if (!gaps.empty()) {
    std::string list;
    for (std::size_t i = 0; i < gaps.size() && i < 10; ++i) list += (i ? ", " : "") + gaps[i];
    if (gaps.size() > 10) list += fmt::format(" (+{} more)", gaps.size() - 10);
    throw ArgumentError(fmt::format("evaluation: {} object(s) missing from {} or {}: {}", gaps.size(),
                                    to_string(q), to_string(g), list));
  }
  return a;
}

std::vector<int> common_points(const EmbeddingTable& t, Modality q, Modality g, const std::string& id) {
  const auto a = t.points(q, id);
  const auto b = t.points(g, id);
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng));
}

}  // namespace

RetrievalResult retrieval_eval(const EmbeddingTable& table, Modality query, Modality target,
                               const EvalConfig& cfg) {
  validate(cfg);
  const auto objects = common_objects(table, query, target);
  std::vector<std::vector<int>> pts(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    pts[i] = common_points(table, query, target, objects[i]);
    if (pts[i].empty())
      throw ArgumentError("retrieval: object " + objects[i] + " has no point present in both modalities");
  }
  const std::size_t pool = cfg.n_objects > 0 ? static_cast<std::size_t>(cfg.n_objects) : objects.size();
  if (pool > objects.size() || pool < 1)
    throw ArgumentError(fmt::format("retrieval: n_objects {} exceeds the {} objects available", pool,
                                    objects.size()));
  for (int k : cfg.top_k)
    if (static_cast<std::size_t>(k) > pool) throw ArgumentError("retrieval: k exceeds pool size");

  RetrievalResult res;
  res.n_objects = static_cast<int>(pool);
  res.n_samplings = cfg.n_samplings;
  std::map<int, long long> hits;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(objects.size());
  for (int s = 0; s < cfg.n_samplings; ++s) {
    std::iota(order.begin(), order.end(), 0);
    if (pool < objects.size()) {
      for (std::size_t i = 0; i < pool; ++i) std::swap(order[i], order[i + bounded(rng, objects.size() - i)]);
      order.resize(pool);
      std::sort(order.begin(), order.end());
    }
    std::vector<const std::vector<float>*> queries, targets;
    for (std::size_t idx : order) {
      const int p = pts[idx][bounded(rng, pts[idx].size())];
      queries.push_back(&table.at(query, objects[idx], p));
      targets.push_back(&table.at(target, objects[idx], p));
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const std::size_t r = rank_of(*queries[i], targets, i);
      for (int k : cfg.top_k) hits[k] += r <= static_cast<std::size_t>(k);
      ++res.trials;
    }
    order.resize(objects.size());
  }
  for (int k : cfg.top_k) res.top_k[k] = static_cast<double>(hits[k]) / static_cast<double>(res.trials);
  return res;
}

LocalizationResult localization_eval(const EmbeddingTable& table, Modality query, Modality target,
                                     const EvalConfig& cfg) {
  validate(cfg);
  const auto objects = common_objects(table, query, target);
  LocalizationResult res;
  long long hits = 0;
  for (const auto& id : objects) {
    const auto pts = common_points(table, query, target, id);
    if (static_cast<int>(pts.size()) < cfg.m_points) {
      res.skipped.push_back(id);
      continue;
    }
    std::vector<const std::vector<float>*> targets;
    for (int i = 0; i < cfg.m_points; ++i) targets.push_back(&table.at(target, id, pts[i]));
    for (int i = 0; i < cfg.m_points; ++i) {
      hits += rank_of(table.at(query, id, pts[i]), targets, static_cast<std::size_t>(i)) == 1;
      ++res.trials;
    }
    ++res.n_objects;
  }
  if (res.trials == 0) throw ArgumentError("localization: no object has all m_points points");
  res.top1 = static_cast<double>(hits) / static_cast<double>(res.trials);
  return res;
}

nlohmann::json evaluation_report(const EmbeddingTable& table, EvalKind kind, const EvalConfig& cfg) {
  nlohmann::json pairs = nlohmann::json::array();
  const auto mods = table.modalities();
  std::map<std::string, std::pair<double, int>> sums;
  for (Modality q : mods)
    for (Modality t : mods) {
      if (q == t) continue;
      nlohmann::json cell{{"query", to_string(q)}, {"target", to_string(t)}};
      nlohmann::json metrics;
      if (kind == EvalKind::Retrieval) {
        const auto r = retrieval_eval(table, q, t, cfg);
        for (const auto& [k, v] : r.top_k) metrics["top" + std::to_string(k)] = v;
        cell["trials"] = r.trials;
      } else {
        const auto r = localization_eval(table, q, t, cfg);
        metrics["top1"] = r.top1;
        cell["trials"] = r.trials;
        cell["skipped"] = r.skipped;
      }
      for (const auto& [name, v] : metrics.items()) {
        sums[name].first += v.get<double>();
        ++sums[name].second;
      }
      cell["metrics"] = metrics;
      pairs.push_back(cell);
    }
  nlohmann::json average = nlohmann::json::object();
  for (const auto& [name, s] : sums) average[name] = s.first / s.second;
  return {{"kind", kind == EvalKind::Retrieval ? "retrieval" : "localization"},
          {"config", to_json(cfg)},
          {"pairs", pairs},
          {"average", average}};
}

std::string report_text(const nlohmann::json& report) {
  std::vector<std::string> mods;
  for (const auto& p : report.at("pairs")) {
    for (const char* key : {"query", "target"}) {
      const auto m = p.at(key).get<std::string>();
      if (std::find(mods.begin(), mods.end(), m) == mods.end()) mods.push_back(m);
    }
  }
  std::string out;
  for (const auto& [metric, avg] : report.at("average").items()) {
    out += fmt::format("{} {} (%), rows = query, columns = target\n", report.at("kind").get<std::string>(), metric);
    out += fmt::format("{:<12}", "");
    for (const auto& m : mods) out += fmt::format("{:>12}", m);
    out += "\n";
    for (const auto& q : mods) {
      out += fmt::format("{:<12}", q);
      for (const auto& t : mods) {
        std::string cell = "-";
        for (const auto& p : report.at("pairs"))
          if (p.at("query") == q && p.at("target") == t)
            cell = fmt::format("{:.1f}", 100.0 * p.at("metrics").at(metric).get<double>());
        out += fmt::format("{:>12}", cell);
      }
      out += "\n";
    }
    out += fmt::format("{:<12}{:>12.1f}\n\n", "average", 100.0 * avg.get<double>());
  }
  return out;
}

}  // namespace xcap::xsrl
