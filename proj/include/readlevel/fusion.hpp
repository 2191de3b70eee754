#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "readlevel/decode.hpp"
#include "readlevel/errors.hpp"
#include "readlevel/io.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

struct FusionContributor {
  std::string model_id;
  double p = 0.0;  // the prediction that entered the average
  double c = 0.0;  // its confidence weight
};

struct FusedPrediction {
  std::string sentence_id;
  double value = 0.0;
  int level = 1;
  std::vector<FusionContributor> contributors;
};

// Confidence-weighted average of one sentence's per-model predictions:
// value = sum(p_i * c_i) / sum(c_i). With use_raw the continuous raw scores
// are averaged, otherwise the integer levels. Contributors are sorted by
// model id so the floating-point summation order is fixed.
inline FusedPrediction fuse_weighted(std::vector<DecodedPrediction> preds,
                                     bool use_raw) {
  if (preds.empty())
    throw ValidationError("fuse_weighted on an empty prediction list");
  std::sort(preds.begin(), preds.end(),
            [](const DecodedPrediction& a, const DecodedPrediction& b) {
              return a.model_id < b.model_id;
            });
  FusedPrediction fused;
  fused.sentence_id = preds.front().sentence_id;
  double num = 0.0;
  double den = 0.0;
  for (const auto& d : preds) {
    if (d.sentence_id != fused.sentence_id)
      throw ValidationError("fuse_weighted got mixed sentence ids '" +
                            fused.sentence_id + "' and '" + d.sentence_id +
                            "'");
    if (!std::isfinite(d.confidence) || d.confidence < 0.0)
      throw ValidationError("invalid confidence for model '" + d.model_id +
                            "'");
    const double p = use_raw ? d.raw_score : static_cast<double>(d.level);
    num += p * d.confidence;
    den += d.confidence;
    fused.contributors.push_back({d.model_id, p, d.confidence});
  }
  if (den <= 0.0)
    throw ValidationError("all confidences are zero for sentence '" +
                          fused.sentence_id + "'");
  fused.value = num / den;
  fused.level = clamp_level(round_half_away(fused.value), barec_scale());
  return fused;
}

// Borderline pair rule: the higher of two levels when they disagree by
// exactly one, their mean otherwise.
inline double fuse_pair(int p1, int p2) {
  require_level(p1, barec_scale());
  require_level(p2, barec_scale());
  if (std::abs(p1 - p2) == 1) return static_cast<double>(std::max(p1, p2));
  return (static_cast<double>(p1) + static_cast<double>(p2)) / 2.0;
}

// Property harness: the weighted average must not move when every
// confidence is rescaled by the same positive factor.
inline bool fusion_confidence_scale_invariance_check(
    const std::vector<DecodedPrediction>& preds, double k, bool use_raw,
    double tolerance = 1e-9) {
  if (!(k > 0.0)) throw ConfigError("rescale factor must be positive");
  const FusedPrediction base = fuse_weighted(preds, use_raw);
  std::vector<DecodedPrediction> rescaled = preds;
  for (auto& d : rescaled) d.confidence *= k;
  const FusedPrediction scaled = fuse_weighted(std::move(rescaled), use_raw);
  return std::abs(base.value - scaled.value) <= tolerance;
}

// ---------------------------------------------------------------------------
// Fused predictions on disk: TSV `id<TAB>value<TAB>level`.
// ---------------------------------------------------------------------------

inline void save_fused(const std::filesystem::path& path,
                       std::span<const FusedPrediction> preds) {
  auto out = detail::open_output(path);
  for (const auto& f : preds)
    out << f.sentence_id << '\t' << detail::format_double(f.value) << '\t'
        << f.level << '\n';
}

}  // namespace readlevel
