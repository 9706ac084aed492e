#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcap/xsrl/embedding.hpp"

namespace xcap::xsrl {

struct EvalConfig {
  int n_objects = 0;  // retrieval pool size per sampling; 0 = every object
  int m_points = 6;
  std::vector<int> top_k{1, 5};
  int n_samplings = 5;
  double temperature = 0.07;
  std::uint64_t seed = 0;
};

void validate(const EvalConfig& cfg);
EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalConfig& cfg);

struct RetrievalResult {
  std::map<int, double> top_k;  // k -> accuracy in [0, 1]
  int n_objects = 0;
  int n_samplings = 0;
  long long trials = 0;
};

/// Per sampling: a seeded pool of objects, one seeded point per object;
/// each query is ranked against every pooled object's target vector.
RetrievalResult retrieval_eval(const EmbeddingTable& table, Modality query, Modality target,
                               const EvalConfig& cfg);

struct LocalizationResult {
  double top1 = 0.0;
  int n_objects = 0;
  long long trials = 0;
  std::vector<std::string> skipped;  // objects with fewer than m_points points
};

/// Every point of every object queried against the object's own M targets.
LocalizationResult localization_eval(const EmbeddingTable& table, Modality query, Modality target,
                                     const EvalConfig& cfg);

/// 1-based rank of candidates[truth] under cosine similarity to q; equal
/// scores are ordered by candidate index (callers pass key-sorted candidates).
std::size_t rank_of(const std::vector<float>& q, const std::vector<const std::vector<float>*>& candidates,
                    std::size_t truth);

double cosine(const std::vector<float>& a, const std::vector<float>& b);

enum class EvalKind { Retrieval, Localization };

/// Every ordered pair of distinct modalities present in the table.
nlohmann::json evaluation_report(const EmbeddingTable& table, EvalKind kind, const EvalConfig& cfg);
/// Query × target grid per metric, with the average of off-diagonal cells.
std::string report_text(const nlohmann::json& report);

}  // namespace xcap::xsrl
