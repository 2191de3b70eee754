#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

enum class AggregationStrategy { max, mean_ceil, mean_floor_borderline };

inline std::string to_string(AggregationStrategy s) {
  switch (s) {
    case AggregationStrategy::max: return "max";
    case AggregationStrategy::mean_ceil: return "mean-ceil";
    case AggregationStrategy::mean_floor_borderline: return "mean-floor";
  }
  throw ConfigError("invalid aggregation strategy");
}

inline AggregationStrategy aggregation_strategy_from_string(
    const std::string& s) {
  if (s == "max") return AggregationStrategy::max;
  if (s == "mean-ceil") return AggregationStrategy::mean_ceil;
  if (s == "mean-floor") return AggregationStrategy::mean_floor_borderline;
  throw ConfigError("unknown aggregation strategy '" + s +
                    "' (expected max, mean-ceil or mean-floor)");
}

// How sentence predictions become one document label. borderline_threshold
// is the fractional-part cutoff under which the mean-floor strategy floors
// instead of ceiling; override_levels are the document labels that, when any
// single model predicts them, override a lower ensemble label.
struct AggregationPolicy {
  AggregationStrategy strategy = AggregationStrategy::max;
  double borderline_threshold = 0.5;
  std::set<int> override_levels{16, 17};

  void validate() const {
    if (!(borderline_threshold >= 0.0 && borderline_threshold <= 1.0))
      throw ConfigError("borderline threshold must be in [0, 1]");
    for (int lv : override_levels) require_level(lv, barec_scale());
  }
};

struct DocPrediction {
  std::string doc_id;
  int level = 1;
  std::vector<int> member_levels;
};

inline int aggregate_max(std::span<const int> members) {
  if (members.empty())
    throw ValidationError("cannot aggregate an empty document");
  int best = members.front();
  for (int lv : members) best = std::max(best, require_level(lv, barec_scale()));
  return best;
}

// Mean of the member values, snapped per policy: mean_ceil always rounds up,
// mean_floor_borderline floors when the fractional part is <= the threshold.
inline int aggregate_mean(std::span<const double> members,
                          const AggregationPolicy& policy) {
  if (members.empty())
    throw ValidationError("cannot aggregate an empty document");
  policy.validate();
  if (policy.strategy == AggregationStrategy::max)
    throw ConfigError("aggregate_mean called with the max strategy");
  double mean = 0.0;
  for (double v : members) {
    if (!barec_scale().contains(v))
      throw ValidationError("member value " + std::to_string(v) +
                            " outside [1, 19]");
    mean += v;
  }
  mean /= static_cast<double>(members.size());
  const double floor = std::floor(mean);
  const double frac = mean - floor;
  int level;
  if (policy.strategy == AggregationStrategy::mean_ceil)
    level = static_cast<int>(std::ceil(mean));
  else
    level = frac <= policy.borderline_threshold
                ? static_cast<int>(floor)
                : static_cast<int>(std::ceil(mean));
  return clamp_level(level, barec_scale());
}

// If any single model put the document at an override level above the
// ensemble label, promote to the highest such level. Never demotes.
inline int apply_override(int doc_level, std::span<const int> model_doc_levels,
                          const AggregationPolicy& policy) {
  require_level(doc_level, barec_scale());
  policy.validate();
  int result = doc_level;
  for (int lv : model_doc_levels) {
    require_level(lv, barec_scale());
    if (policy.override_levels.contains(lv) && lv > result) result = lv;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Distribution diagnostics over document predictions.
// ---------------------------------------------------------------------------

struct SkewReport {
  std::array<std::int64_t, kNumLevels> counts{};
  std::int64_t total = 0;
  double over_rep_multiple = 3.0;
  std::vector<int> zero_coverage;     // levels nothing was predicted for
  std::vector<int> over_represented;  // share above multiple * uniform share
};

inline SkewReport skew_report(std::span<const DocPrediction> docs,
                              double over_rep_multiple = 3.0) {
  if (docs.empty()) throw ValidationError("skew report needs predictions");
  if (!(over_rep_multiple > 0.0))
    throw ConfigError("over-representation multiple must be positive");
  SkewReport report;
  report.over_rep_multiple = over_rep_multiple;
  for (const auto& doc : docs) {
    require_level(doc.level, barec_scale());
    ++report.counts[doc.level - 1];
    ++report.total;
  }
  const double uniform_share = 1.0 / static_cast<double>(kNumLevels);
  for (int lv = 1; lv <= kNumLevels; ++lv) {
    const std::int64_t c = report.counts[lv - 1];
    if (c == 0) {
      report.zero_coverage.push_back(lv);
    } else {
      const double share =
          static_cast<double>(c) / static_cast<double>(report.total);
      if (share > over_rep_multiple * uniform_share)
        report.over_represented.push_back(lv);
    }
  }
  return report;
}

inline nlohmann::json to_json(const SkewReport& report) {
  nlohmann::json per_level = nlohmann::json::object();
  for (int lv = 1; lv <= kNumLevels; ++lv)
    per_level[std::to_string(lv)] = report.counts[lv - 1];
  return nlohmann::json{{"total", report.total},
                        {"counts", per_level},
                        {"over_rep_multiple", report.over_rep_multiple},
                        {"zero_coverage", report.zero_coverage},
                        {"over_represented", report.over_represented}};
}

}  // namespace readlevel
