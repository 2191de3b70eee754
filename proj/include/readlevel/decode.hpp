#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/errors.hpp"
#include "readlevel/io.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

// One model's decoded opinion about one sentence: an integer level, the
// real-valued score it was rounded from, and the confidence that enters the
// weighted ensemble average.
struct DecodedPrediction {
  std::string sentence_id;
  std::string model_id;
  int level = 1;
  double raw_score = 1.0;
  double confidence = 1.0;
};

// Per-model residual variance on a calibration split; confidence of a
// regression head is 1 / (variance + epsilon).
struct CalibrationStats {
  std::string model_id;
  double residual_variance = 0.0;
  double epsilon = 1e-6;
};

using CalibrationTable = std::map<std::string, CalibrationStats>;

// Argmax level with ties broken toward the lower level; confidence is the
// winning probability.
inline DecodedPrediction decode_classification(const HeadOutput& h) {
  if (h.kind != HeadKind::classification)
    throw ConfigError("decode_classification on a " + to_string(h.kind) +
                      " head");
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.class_probs.size(); ++i)
    if (h.class_probs[i] > h.class_probs[best]) best = i;
  DecodedPrediction d;
  d.sentence_id = h.sentence_id;
  d.model_id = h.model_id;
  d.level = static_cast<int>(best) + 1;
  d.raw_score = static_cast<double>(d.level);
  d.confidence = h.class_probs[best];
  return d;
}

inline DecodedPrediction decode_regression(const HeadOutput& h,
                                           const CalibrationStats& cal) {
  if (h.kind != HeadKind::regression)
    throw ConfigError("decode_regression on a " + to_string(h.kind) + " head");
  if (!(cal.epsilon > 0.0))
    throw ConfigError("calibration epsilon must be positive");
  if (cal.residual_variance < 0.0)
    throw ConfigError("negative residual variance for model '" + h.model_id +
                      "'");
  DecodedPrediction d;
  d.sentence_id = h.sentence_id;
  d.model_id = h.model_id;
  d.raw_score = clamp_score(h.score, barec_scale());
  d.level = round_half_away(d.raw_score);
  d.confidence = 1.0 / (cal.residual_variance + cal.epsilon);
  return d;
}

// CORAL-style decode: the level is one plus the number of passed thresholds,
// the raw score one plus the sum of threshold probabilities. Confidence is
// the mean decisiveness |2p - 1| of the threshold decisions.
inline DecodedPrediction decode_ordinal(const HeadOutput& h) {
  if (h.kind != HeadKind::ordinal)
    throw ConfigError("decode_ordinal on a " + to_string(h.kind) + " head");
  int passed = 0;
  double sum = 0.0;
  double decisiveness = 0.0;
  for (double p : h.threshold_probs) {
    if (p > 0.5) ++passed;
    sum += p;
    decisiveness += std::abs(2.0 * p - 1.0);
  }
  DecodedPrediction d;
  d.sentence_id = h.sentence_id;
  d.model_id = h.model_id;
  d.level = 1 + passed;
  d.raw_score = 1.0 + sum;
  d.confidence = decisiveness / static_cast<double>(kNumThresholds);
  return d;
}

inline DecodedPrediction decode(const HeadOutput& h,
                                const CalibrationTable& calibration) {
  switch (h.kind) {
    case HeadKind::classification: return decode_classification(h);
    case HeadKind::ordinal: return decode_ordinal(h);
    case HeadKind::regression: {
      auto it = calibration.find(h.model_id);
      if (it == calibration.end())
        throw ConfigError("no calibration entry for regression model '" +
                          h.model_id + "'");
      return decode_regression(h, it->second);
    }
  }
  throw ConfigError("invalid head kind");
}

// Population variance of (score - gold) over a calibration split.
inline CalibrationStats calibrate_regression(
    std::string model_id, std::span<const std::pair<double, int>> score_and_gold,
    double epsilon = 1e-6) {
  if (score_and_gold.size() < 2)
    throw ValidationError("calibration for '" + model_id + "' needs >= 2 items, got " +
                          std::to_string(score_and_gold.size()));
  if (!(epsilon > 0.0)) throw ConfigError("calibration epsilon must be positive");
  double mean = 0.0;
  for (const auto& [score, gold] : score_and_gold)
    mean += score - static_cast<double>(gold);
  mean /= static_cast<double>(score_and_gold.size());
  double var = 0.0;
  for (const auto& [score, gold] : score_and_gold) {
    const double r = score - static_cast<double>(gold) - mean;
    var += r * r;
  }
  var /= static_cast<double>(score_and_gold.size());
  return CalibrationStats{std::move(model_id), var, epsilon};
}

// ---------------------------------------------------------------------------
// Calibration table persistence: JSON object keyed by model id.
// ---------------------------------------------------------------------------

inline void save_calibration(const std::filesystem::path& path,
                             const CalibrationTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [model, cal] : table)
    j[model] = {{"residual_variance", cal.residual_variance},
                {"epsilon", cal.epsilon}};
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

inline CalibrationTable load_calibration(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  if (!j.is_object())
    throw ParseError(path.string(), 0, "calibration file must be an object");
  CalibrationTable table;
  for (const auto& [model, entry] : j.items()) {
    CalibrationStats cal;
    cal.model_id = model;
    cal.residual_variance = entry.at("residual_variance").get<double>();
    cal.epsilon = entry.value("epsilon", 1e-6);
    if (!std::isfinite(cal.residual_variance) || cal.residual_variance < 0.0)
      throw ValidationError(path.string() + ": invalid residual variance for '" +
                            model + "'");
    if (!(cal.epsilon > 0.0))
      throw ValidationError(path.string() + ": non-positive epsilon for '" +
                            model + "'");
    table.emplace(model, std::move(cal));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Decoded predictions on disk: TSV `id<TAB>model<TAB>level<TAB>raw<TAB>conf`.
// ---------------------------------------------------------------------------

inline void save_decoded(const std::filesystem::path& path,
                         std::span<const DecodedPrediction> preds) {
  auto out = detail::open_output(path);
  for (const auto& d : preds)
    out << d.sentence_id << '\t' << d.model_id << '\t' << d.level << '\t'
        << detail::format_double(d.raw_score) << '\t'
        << detail::format_double(d.confidence) << '\n';
}

inline std::vector<DecodedPrediction> load_decoded(
    const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<DecodedPrediction> preds;
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_tsv(line);
    if (fields.size() != 5)
      throw ParseError(path.string(), lineno,
                       "expected `id<TAB>model<TAB>level<TAB>raw<TAB>conf`");
    DecodedPrediction d;
    d.sentence_id = std::string(fields[0]);
    d.model_id = std::string(fields[1]);
    if (!detail::parse_int(fields[2], d.level) ||
        !detail::parse_double(fields[3], d.raw_score) ||
        !detail::parse_double(fields[4], d.confidence))
      throw ParseError(path.string(), lineno, "malformed decoded row");
    require_level(d.level, barec_scale());
    preds.push_back(std::move(d));
  }
  return preds;
}

}  // namespace readlevel
