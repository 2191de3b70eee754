#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/collapse.hpp"
#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

struct EvalPair {
  int gold = 1;
  int pred = 1;
};

// Quadratic weighted kappa over 1..num_levels with the standard
// confusion-matrix formulation: weights w_ij = (i-j)^2 / (K-1)^2, expected
// counts from the product of the gold and pred marginals,
// kappa = 1 - sum(w*O) / sum(w*E). The fully degenerate case where gold and
// pred both sit on one identical level has sum(w*E) == 0 and returns 1.0.
inline double qwk(std::span<const EvalPair> pairs, int num_levels = kNumLevels) {
  if (pairs.empty()) throw ValidationError("qwk on an empty pair list");
  if (num_levels < 2) throw ConfigError("qwk needs at least 2 levels");
  const int k = num_levels;
  std::vector<double> observed(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> gold_marginal(k, 0.0);
  std::vector<double> pred_marginal(k, 0.0);
  const double n = static_cast<double>(pairs.size());
  for (const auto& p : pairs) {
    if (p.gold < 1 || p.gold > k || p.pred < 1 || p.pred > k)
      throw ValidationError("qwk pair (" + std::to_string(p.gold) + ", " +
                            std::to_string(p.pred) + ") outside 1.." +
                            std::to_string(k));
    observed[static_cast<std::size_t>(p.gold - 1) * k + (p.pred - 1)] += 1.0;
    gold_marginal[p.gold - 1] += 1.0;
    pred_marginal[p.pred - 1] += 1.0;
  }
  const double denom_w = static_cast<double>(k - 1) * (k - 1);
  double weighted_observed = 0.0;
  double weighted_expected = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double w = static_cast<double>(i - j) * (i - j) / denom_w;
      weighted_observed +=
          w * observed[static_cast<std::size_t>(i) * k + j] / n;
      weighted_expected += w * (gold_marginal[i] / n) * (pred_marginal[j] / n);
    }
  }
  if (weighted_expected == 0.0) return 1.0;  // single-level total agreement
  return 1.0 - weighted_observed / weighted_expected;
}

// Fraction of pairs that land in the same bin of the collapse map.
inline double accuracy_at(std::span<const EvalPair> pairs,
                          const CollapseMap& map) {
  if (pairs.empty()) throw ValidationError("accuracy on an empty pair list");
  std::int64_t hits = 0;
  for (const auto& p : pairs)
    if (map.apply(p.gold) == map.apply(p.pred)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

inline double adjacent_accuracy(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ValidationError("accuracy on an empty pair list");
  std::int64_t hits = 0;
  for (const auto& p : pairs)
    if (std::abs(p.gold - p.pred) <= 1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

inline double avg_distance(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ValidationError("distance on an empty pair list");
  double sum = 0.0;
  for (const auto& p : pairs) sum += std::abs(p.gold - p.pred);
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Full evaluation report.
// ---------------------------------------------------------------------------

struct CollapseMaps {
  CollapseMap acc7 = CollapseMap::equal_width(7);
  CollapseMap acc5 = CollapseMap::equal_width(5);
  CollapseMap acc3 = CollapseMap::equal_width(3);
};

struct EvalReport {
  std::int64_t n = 0;
  double qwk = 0.0;
  double acc19 = 0.0;
  double acc7 = 0.0;
  double acc5 = 0.0;
  double acc3 = 0.0;
  double adjacent_acc = 0.0;
  double avg_dist = 0.0;
  std::array<std::int64_t, kNumLevels> gold_histogram{};
  std::array<std::int64_t, kNumLevels> pred_histogram{};
  // confusion[g-1][p-1] counts gold level g predicted as p
  std::array<std::array<std::int64_t, kNumLevels>, kNumLevels> confusion{};

  bool operator==(const EvalReport&) const = default;
};

inline EvalReport full_report(std::span<const EvalPair> pairs,
                              const CollapseMaps& maps = CollapseMaps{}) {
  if (pairs.empty()) throw ValidationError("report on an empty pair list");
  EvalReport report;
  report.n = static_cast<std::int64_t>(pairs.size());
  for (const auto& p : pairs) {
    require_level(p.gold, barec_scale());
    require_level(p.pred, barec_scale());
    ++report.confusion[p.gold - 1][p.pred - 1];
    ++report.gold_histogram[p.gold - 1];
    ++report.pred_histogram[p.pred - 1];
  }
  report.qwk = qwk(pairs);
  report.acc19 = accuracy_at(pairs, CollapseMap::identity());
  report.acc7 = accuracy_at(pairs, maps.acc7);
  report.acc5 = accuracy_at(pairs, maps.acc5);
  report.acc3 = accuracy_at(pairs, maps.acc3);
  report.adjacent_acc = adjacent_accuracy(pairs);
  report.avg_dist = avg_distance(pairs);
  return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : r.confusion) {
    nlohmann::json jrow = nlohmann::json::array();
    for (std::int64_t c : row) jrow.push_back(c);
    confusion.push_back(std::move(jrow));
  }
  return nlohmann::json{{"n", r.n},
                        {"qwk", r.qwk},
                        {"acc19", r.acc19},
                        {"acc7", r.acc7},
                        {"acc5", r.acc5},
                        {"acc3", r.acc3},
                        {"adjacent_acc", r.adjacent_acc},
                        {"avg_dist", r.avg_dist},
                        {"gold_histogram", r.gold_histogram},
                        {"pred_histogram", r.pred_histogram},
                        {"confusion", confusion}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.n = j.at("n").get<std::int64_t>();
  r.qwk = j.at("qwk").get<double>();
  r.acc19 = j.at("acc19").get<double>();
  r.acc7 = j.at("acc7").get<double>();
  r.acc5 = j.at("acc5").get<double>();
  r.acc3 = j.at("acc3").get<double>();
  r.adjacent_acc = j.at("adjacent_acc").get<double>();
  r.avg_dist = j.at("avg_dist").get<double>();
  const auto& gh = j.at("gold_histogram");
  const auto& ph = j.at("pred_histogram");
  const auto& cm = j.at("confusion");
  if (gh.size() != kNumLevels || ph.size() != kNumLevels ||
      cm.size() != kNumLevels)
    throw ParseError("eval report arrays must have 19 entries");
  for (int i = 0; i < kNumLevels; ++i) {
    r.gold_histogram[i] = gh[i].get<std::int64_t>();
    r.pred_histogram[i] = ph[i].get<std::int64_t>();
    if (cm[i].size() != kNumLevels)
      throw ParseError("confusion rows must have 19 entries");
    for (int k = 0; k < kNumLevels; ++k)
      r.confusion[i][k] = cm[i][k].get<std::int64_t>();
  }
  return r;
}

}  // namespace readlevel
