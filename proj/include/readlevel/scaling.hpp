#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

// Affine min-max map between two ordinal scales. Order-preserving;
// endpoints map to endpoints.
inline double scale_label(double x, const LevelScale& src,
                          const LevelScale& dst) {
  if (src.span() <= 0)
    throw ConfigError("degenerate source scale '" + src.name + "'");
  if (dst.span() <= 0)
    throw ConfigError("degenerate destination scale '" + dst.name + "'");
  if (!src.contains(x))
    throw ValidationError("value " + std::to_string(x) + " outside " +
                          src.name + " scale [" +
                          std::to_string(src.min_level) + ", " +
                          std::to_string(src.max_level) + "]");
  return (x - src.min_level) / src.span() * dst.span() + dst.min_level;
}

// Inverse of scale_label for a value on the 19-level scale.
inline double descale_label(double y, const LevelScale& dst) {
  return scale_label(y, barec_scale(), dst);
}

struct RoundtripReport {
  std::size_t n = 0;
  double margin = 0.5;
  double max_deviation = 0.0;
  bool pass = true;
};

// Checks how much snapping scaled labels to integers perturbs them:
// max |back(round(scale(x))) - x| over the given labels, judged against
// the margin. Report-only; an empty label list passes vacuously.
inline RoundtripReport verify_roundtrip(std::span<const int> labels,
                                        const LevelScale& src,
                                        const LevelScale& dst,
                                        double margin = 0.5) {
  RoundtripReport report;
  report.n = labels.size();
  report.margin = margin;
  for (int x : labels) {
    require_level(x, src);
    const double scaled = scale_label(static_cast<double>(x), src, dst);
    const int snapped = round_half_away(scaled);
    const double back = scale_label(static_cast<double>(snapped), dst, src);
    report.max_deviation =
        std::max(report.max_deviation, std::abs(back - static_cast<double>(x)));
  }
  report.pass = report.max_deviation <= margin;
  return report;
}

}  // namespace readlevel
