#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "readlevel/errors.hpp"

namespace readlevel {

// The fine-grained scale has 19 ordinal levels, hence 18 "exceeds level k"
// thresholds for ordinal heads.
inline constexpr int kNumLevels = 19;
inline constexpr int kNumThresholds = kNumLevels - 1;

// An ordinal scale with inclusive integer endpoints. Levels are plain ints;
// validation happens at the I/O and construction boundaries.
struct LevelScale {
  std::string name;
  int min_level = 1;
  int max_level = kNumLevels;

  int span() const { return max_level - min_level; }
  bool contains(double x) const { return x >= min_level && x <= max_level; }
};

inline const LevelScale& barec_scale() {
  static const LevelScale s{"barec", 1, 19};
  return s;
}

inline const LevelScale& samer_scale() {
  static const LevelScale s{"samer", 3, 6};
  return s;
}

inline LevelScale scale_by_name(const std::string& name) {
  if (name == "barec") return barec_scale();
  if (name == "samer") return samer_scale();
  throw ConfigError("unknown scale '" + name + "' (expected barec or samer)");
}

// Round half away from zero; the snapping rule used everywhere a real-valued
// score becomes an integer level.
inline int round_half_away(double x) {
  return static_cast<int>(std::lround(x));
}

inline int clamp_level(int v, const LevelScale& scale) {
  return std::clamp(v, scale.min_level, scale.max_level);
}

inline double clamp_score(double x, const LevelScale& scale) {
  return std::clamp(x, static_cast<double>(scale.min_level),
                    static_cast<double>(scale.max_level));
}

inline int require_level(int v, const LevelScale& scale) {
  if (v < scale.min_level || v > scale.max_level)
    throw ValidationError("level " + std::to_string(v) + " outside " +
                          scale.name + " scale [" +
                          std::to_string(scale.min_level) + ", " +
                          std::to_string(scale.max_level) + "]");
  return v;
}

}  // namespace readlevel
