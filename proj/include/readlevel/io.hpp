#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

namespace detail {

inline std::vector<std::string_view> split_tsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline bool parse_int(std::string_view s, int& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() &&
         std::isfinite(out);
}

// Shortest round-trip representation; keeps emitted files byte-deterministic.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw ParseError(path.string(), 0, "cannot open file for writing");
  return out;
}

inline bool next_line(std::ifstream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gold labels: TSV `id<TAB>text<TAB>label`.
// ---------------------------------------------------------------------------

struct GoldRecord {
  std::string sentence_id;
  std::string text;
  int level = 1;
};

inline std::vector<GoldRecord> load_gold(const std::filesystem::path& path,
                                         const LevelScale& scale) {
  auto in = detail::open_input(path);
  std::vector<GoldRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_tsv(line);
    if (fields.size() != 3)
      throw ParseError(path.string(), lineno,
                       "expected `id<TAB>text<TAB>label`, got " +
                           std::to_string(fields.size()) + " fields");
    GoldRecord rec;
    rec.sentence_id = std::string(fields[0]);
    rec.text = std::string(fields[1]);
    if (rec.sentence_id.empty())
      throw ParseError(path.string(), lineno, "empty sentence id");
    if (!detail::parse_int(fields[2], rec.level))
      throw ParseError(path.string(), lineno,
                       "non-integer label '" + std::string(fields[2]) + "'");
    if (rec.level < scale.min_level || rec.level > scale.max_level)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": label " + std::to_string(rec.level) +
                            " outside " + scale.name + " scale");
    if (!seen.insert(rec.sentence_id).second)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": duplicate sentence id '" + rec.sentence_id +
                            "'");
    records.push_back(std::move(rec));
  }
  return records;
}

inline void save_gold(const std::filesystem::path& path,
                      std::span<const GoldRecord> records) {
  auto out = detail::open_output(path);
  for (const auto& rec : records) {
    if (rec.sentence_id.find('\t') != std::string::npos ||
        rec.text.find('\t') != std::string::npos)
      throw ValidationError("gold record '" + rec.sentence_id +
                            "' contains a tab");
    out << rec.sentence_id << '\t' << rec.text << '\t' << rec.level << '\n';
  }
}

// ---------------------------------------------------------------------------
// Model head outputs: JSONL, one object per line with fields `id`, `model`,
// `kind`, and exactly one of `probs` (19 reals), `score` (real),
// `thresholds` (18 reals).
// ---------------------------------------------------------------------------

enum class HeadKind { classification, regression, ordinal };

inline std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::classification: return "classification";
    case HeadKind::regression: return "regression";
    case HeadKind::ordinal: return "ordinal";
  }
  throw ConfigError("invalid head kind");
}

inline HeadKind head_kind_from_string(const std::string& s) {
  if (s == "classification") return HeadKind::classification;
  if (s == "regression") return HeadKind::regression;
  if (s == "ordinal") return HeadKind::ordinal;
  throw ValidationError("unknown head kind '" + s + "'");
}

struct HeadOutput {
  std::string sentence_id;
  std::string model_id;
  HeadKind kind = HeadKind::classification;
  std::vector<double> class_probs;      // classification: 19 entries
  double score = 0.0;                   // regression
  std::vector<double> threshold_probs;  // ordinal: 18 entries

  bool operator==(const HeadOutput&) const = default;
};

namespace detail {

// Probability vectors within 1e-6 of unit sum are renormalized silently;
// the threshold is generous enough that a renormalized vector re-loads
// untouched, so load -> save -> load is exact.
inline void validate_head(HeadOutput& h, const std::string& where) {
  switch (h.kind) {
    case HeadKind::classification: {
      if (h.class_probs.size() != kNumLevels)
        throw ValidationError(where + ": classification needs " +
                              std::to_string(kNumLevels) + " probs, got " +
                              std::to_string(h.class_probs.size()));
      double sum = 0.0;
      for (double p : h.class_probs) {
        if (!std::isfinite(p) || p < 0.0)
          throw ValidationError(where + ": invalid probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw ValidationError(where + ": probabilities sum to " +
                              std::to_string(sum) + ", not 1");
      if (std::abs(sum - 1.0) > 64 * std::numeric_limits<double>::epsilon())
        for (double& p : h.class_probs) p /= sum;
      break;
    }
    case HeadKind::regression:
      if (!std::isfinite(h.score))
        throw ValidationError(where + ": non-finite score");
      break;
    case HeadKind::ordinal:
      if (h.threshold_probs.size() != kNumThresholds)
        throw ValidationError(where + ": ordinal needs " +
                              std::to_string(kNumThresholds) +
                              " thresholds, got " +
                              std::to_string(h.threshold_probs.size()));
      for (double p : h.threshold_probs)
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
          throw ValidationError(where + ": threshold prob outside [0, 1]");
      break;
  }
}

}  // namespace detail

inline std::vector<HeadOutput> load_heads(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<HeadOutput> heads;
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!j.is_object() || !j.contains("id") || !j.contains("model") ||
        !j.contains("kind"))
      throw ParseError(path.string(), lineno,
                       "head line needs `id`, `model` and `kind`");
    HeadOutput h;
    h.sentence_id = j.at("id").get<std::string>();
    h.model_id = j.at("model").get<std::string>();
    h.kind = head_kind_from_string(j.at("kind").get<std::string>());
    if (h.sentence_id.empty())
      throw ValidationError(where + ": empty sentence id");
    const int payloads = static_cast<int>(j.contains("probs")) +
                         static_cast<int>(j.contains("score")) +
                         static_cast<int>(j.contains("thresholds"));
    if (payloads != 1)
      throw ValidationError(
          where + ": exactly one of probs/score/thresholds required");
    switch (h.kind) {
      case HeadKind::classification:
        if (!j.contains("probs"))
          throw ValidationError(where + ": classification line without probs");
        h.class_probs = j.at("probs").get<std::vector<double>>();
        break;
      case HeadKind::regression:
        if (!j.contains("score"))
          throw ValidationError(where + ": regression line without score");
        h.score = j.at("score").get<double>();
        break;
      case HeadKind::ordinal:
        if (!j.contains("thresholds"))
          throw ValidationError(where + ": ordinal line without thresholds");
        h.threshold_probs = j.at("thresholds").get<std::vector<double>>();
        break;
    }
    detail::validate_head(h, where);
    heads.push_back(std::move(h));
  }
  return heads;
}

inline void save_heads(const std::filesystem::path& path,
                       std::span<const HeadOutput> heads) {
  auto out = detail::open_output(path);
  for (const auto& h : heads) {
    nlohmann::json j;
    j["id"] = h.sentence_id;
    j["model"] = h.model_id;
    j["kind"] = to_string(h.kind);
    switch (h.kind) {
      case HeadKind::classification: j["probs"] = h.class_probs; break;
      case HeadKind::regression: j["score"] = h.score; break;
      case HeadKind::ordinal: j["thresholds"] = h.threshold_probs; break;
    }
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Document grouping: a document id is the first 7 characters of a sentence id.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDocKeyLength = 7;

inline std::string doc_key(const std::string& sentence_id) {
  if (sentence_id.size() < kDocKeyLength)
    throw ValidationError("malformed sentence id '" + sentence_id +
                          "': need at least 7 characters");
  return sentence_id.substr(0, kDocKeyLength);
}

// ---------------------------------------------------------------------------
// Generic prediction rows: TSV `id<TAB>level` or `id<TAB>value<TAB>level`.
// ---------------------------------------------------------------------------

struct PredictionRow {
  std::string id;
  double value = 0.0;
  int level = 1;
};

// Lenient id -> level reader for consumers that only need the final label:
// accepts `id<TAB>level`, `id<TAB>value<TAB>level` and gold-shaped
// `id<TAB>text<TAB>level` rows alike.
inline std::vector<std::pair<std::string, int>> load_level_tsv(
    const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<std::pair<std::string, int>> rows;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_tsv(line);
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError(path.string(), lineno,
                       "expected 2 or 3 tab-separated fields, got " +
                           std::to_string(fields.size()));
    std::string id(fields[0]);
    int level = 0;
    if (id.empty()) throw ParseError(path.string(), lineno, "empty id");
    if (!detail::parse_int(fields.back(), level))
      throw ParseError(path.string(), lineno,
                       "non-integer level '" + std::string(fields.back()) +
                           "'");
    if (!seen.insert(id).second)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": duplicate id '" + id + "'");
    rows.emplace_back(std::move(id), level);
  }
  return rows;
}

inline std::vector<PredictionRow> load_prediction_tsv(
    const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<PredictionRow> rows;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_tsv(line);
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError(path.string(), lineno,
                       "expected `id<TAB>[value<TAB>]level`, got " +
                           std::to_string(fields.size()) + " fields");
    PredictionRow row;
    row.id = std::string(fields[0]);
    if (row.id.empty())
      throw ParseError(path.string(), lineno, "empty id");
    if (!detail::parse_int(fields.back(), row.level))
      throw ParseError(path.string(), lineno,
                       "non-integer level '" + std::string(fields.back()) +
                           "'");
    if (fields.size() == 3) {
      if (!detail::parse_double(fields[1], row.value))
        throw ParseError(path.string(), lineno,
                         "non-numeric value '" + std::string(fields[1]) + "'");
    } else {
      row.value = static_cast<double>(row.level);
    }
    if (!seen.insert(row.id).second)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": duplicate id '" + row.id + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace readlevel
