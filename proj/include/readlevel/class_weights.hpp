#pragma once

#include <cstdint>
#include <map>

#include "readlevel/errors.hpp"

namespace readlevel {

// Inverse-frequency class weights:
//
//   w_j = n_samples / (n_classes * n_samples_in_class_j)
//
// n_classes counts only classes that actually occur, so the weight-sum
// identity sum_j w_j * n_j == n_samples holds exactly and empty classes
// never divide by zero. Classes with zero count carry no weight entry.
struct ClassWeights {
  std::map<int, double> weights;
  std::map<int, std::int64_t> counts;
  std::int64_t n_samples = 0;
  int n_classes = 0;

  // Weight for a label; 1.0 for labels unseen when the weights were fit.
  double weight_for(int level) const {
    auto it = weights.find(level);
    return it == weights.end() ? 1.0 : it->second;
  }
};

inline ClassWeights compute_class_weights(
    const std::map<int, std::int64_t>& counts) {
  ClassWeights cw;
  for (const auto& [level, count] : counts) {
    if (count < 0)
      throw ValidationError("negative count for class " +
                            std::to_string(level));
    if (count == 0) continue;
    cw.counts[level] = count;
    cw.n_samples += count;
  }
  cw.n_classes = static_cast<int>(cw.counts.size());
  if (cw.n_classes == 0)
    throw ValidationError("class weights require at least one nonzero count");
  for (const auto& [level, count] : cw.counts)
    cw.weights[level] = static_cast<double>(cw.n_samples) /
                        (static_cast<double>(cw.n_classes) *
                         static_cast<double>(count));
  return cw;
}

}  // namespace readlevel
