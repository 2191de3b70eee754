#pragma once

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

// Monotone surjection from the 19-level scale onto 1..granularity, used for
// the coarse-grained accuracies. Maps are validated once at construction;
// lookups never fail.
class CollapseMap {
public:
  CollapseMap(int granularity, const std::array<int, kNumLevels>& mapping)
      : granularity_(granularity), mapping_(mapping) {
    validate();
  }

  static CollapseMap identity() {
    std::array<int, kNumLevels> m{};
    for (int i = 0; i < kNumLevels; ++i) m[i] = i + 1;
    return CollapseMap(kNumLevels, m);
  }

  // Contiguous bins of width ceil(19/granularity); the last bins come out
  // narrower. The shipped default for the 7/5/3 granularities.
  static CollapseMap equal_width(int granularity) {
    if (granularity < 1 || granularity > kNumLevels)
      throw ConfigError("collapse granularity " + std::to_string(granularity) +
                        " outside [1, 19]");
    const int width = (kNumLevels + granularity - 1) / granularity;
    std::array<int, kNumLevels> m{};
    for (int i = 0; i < kNumLevels; ++i) m[i] = i / width + 1;
    return CollapseMap(granularity, m);
  }

  // Text table `source_level<TAB>coarse_level`, one line per source level.
  static CollapseMap load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open collapse map");
    std::array<int, kNumLevels> m{};
    std::array<bool, kNumLevels> seen{};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw ParseError(path.string(), lineno,
                         "expected `source<TAB>coarse`, got '" + line + "'");
      int src = 0, coarse = 0;
      const char* b = line.data();
      auto r1 = std::from_chars(b, b + tab, src);
      auto r2 = std::from_chars(b + tab + 1, b + line.size(), coarse);
      if (r1.ec != std::errc() || r1.ptr != b + tab || r2.ec != std::errc() ||
          r2.ptr != b + line.size())
        throw ParseError(path.string(), lineno,
                         "non-integer collapse entry '" + line + "'");
      if (src < 1 || src > kNumLevels)
        throw ParseError(path.string(), lineno,
                         "source level " + std::to_string(src) +
                             " outside [1, 19]");
      if (seen[src - 1])
        throw ParseError(path.string(), lineno,
                         "duplicate source level " + std::to_string(src));
      seen[src - 1] = true;
      m[src - 1] = coarse;
    }
    for (int i = 0; i < kNumLevels; ++i)
      if (!seen[i])
        throw ConfigError(path.string() + ": collapse map missing source level " +
                          std::to_string(i + 1));
    int granularity = 0;
    for (int v : m) granularity = std::max(granularity, v);
    return CollapseMap(granularity, m);
  }

  int apply(int level) const {
    require_level(level, barec_scale());
    return mapping_[level - 1];
  }

  int operator()(int level) const { return apply(level); }

  int granularity() const { return granularity_; }
  const std::array<int, kNumLevels>& mapping() const { return mapping_; }

private:
  void validate() const {
    if (granularity_ < 1 || granularity_ > kNumLevels)
      throw ConfigError("collapse granularity " + std::to_string(granularity_) +
                        " outside [1, 19]");
    std::set<int> hit;
    int prev = 0;
    for (int i = 0; i < kNumLevels; ++i) {
      const int v = mapping_[i];
      if (v < 1 || v > granularity_)
        throw ConfigError("collapse target " + std::to_string(v) +
                          " for level " + std::to_string(i + 1) +
                          " outside [1, " + std::to_string(granularity_) + "]");
      if (v < prev)
        throw ConfigError("collapse map not order-preserving at level " +
                          std::to_string(i + 1));
      prev = v;
      hit.insert(v);
    }
    if (static_cast<int>(hit.size()) != granularity_)
      throw ConfigError("collapse map not surjective onto 1.." +
                        std::to_string(granularity_));
  }

  int granularity_;
  std::array<int, kNumLevels> mapping_;
};

}  // namespace readlevel
