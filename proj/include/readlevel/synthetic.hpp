#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/errors.hpp"
#include "readlevel/levels.hpp"

namespace readlevel {

// Deterministic RNG wrapper. The distributions are hand-rolled transforms of
// raw mt19937_64 output so generated datasets are stable across standard
// library implementations, not just across runs.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform in (0, 1]
  double uniform01_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller
  double normal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // uniform integer in [lo, hi]
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % range);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t raw() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Label distribution profiles.
// ---------------------------------------------------------------------------

struct ImbalanceProfile {
  std::array<double, kNumLevels> shares{};

  static ImbalanceProfile uniform() {
    ImbalanceProfile p;
    p.shares.fill(1.0 / kNumLevels);
    return p;
  }

  // Two dominant mid-range levels (12 and 14) over a long tail of rare
  // levels; the shape of a typical readability corpus.
  static ImbalanceProfile two_peak() {
    ImbalanceProfile p;
    p.shares = {0.010, 0.012, 0.015, 0.020, 0.030, 0.040, 0.050,
                0.055, 0.060, 0.060, 0.070, 0.220, 0.070, 0.180,
                0.040, 0.025, 0.018, 0.015, 0.010};
    return p;
  }

  static ImbalanceProfile from_json(const nlohmann::json& j) {
    ImbalanceProfile p;
    const auto& shares = j.at("shares");
    if (shares.size() != kNumLevels)
      throw ConfigError("profile shares must have 19 entries");
    for (int i = 0; i < kNumLevels; ++i)
      p.shares[i] = shares[i].get<double>();
    return p;
  }

  void validate() const {
    double sum = 0.0;
    for (double s : shares) {
      if (!std::isfinite(s) || s < 0.0)
        throw ValidationError("infeasible profile: negative or non-finite share");
      sum += s;
    }
    if (sum <= 0.0)
      throw ValidationError("infeasible profile: all shares are zero");
  }
};

// Largest-remainder apportionment of n items over the profile; counts sum
// to n exactly and match the shares within one item.
inline std::array<std::int64_t, kNumLevels> apportion_counts(
    const ImbalanceProfile& profile, std::int64_t n) {
  profile.validate();
  double total = 0.0;
  for (double s : profile.shares) total += s;
  std::array<std::int64_t, kNumLevels> counts{};
  std::array<std::pair<double, int>, kNumLevels> remainders{};
  std::int64_t assigned = 0;
  for (int i = 0; i < kNumLevels; ++i) {
    const double quota = static_cast<double>(n) * profile.shares[i] / total;
    counts[i] = static_cast<std::int64_t>(std::floor(quota));
    assigned += counts[i];
    remainders[i] = {quota - std::floor(quota), i};
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;  // deterministic tie-break
            });
  for (std::int64_t r = n - assigned, i = 0; r > 0; --r, ++i)
    ++counts[remainders[static_cast<std::size_t>(i)].second];
  return counts;
}

// ---------------------------------------------------------------------------
// Synthetic dataset: features live near a one-dimensional latent line, the
// label is the bin of the latent position.
// ---------------------------------------------------------------------------

struct SyntheticDataset {
  int n = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  double noise_std = 0.0;
  ImbalanceProfile profile;
  std::vector<double> latent_direction;  // unit vector, length dim
  std::vector<double> features;          // row-major n x dim
  std::vector<int> labels;               // 1..19
  std::vector<std::string> ids;          // 7-char doc prefix + sentence part

  std::span<const double> feature_row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

inline constexpr int kSentencesPerDoc = 5;

// Deterministic given the seed. Each item of level L gets a latent position
// t uniform in [L - 0.5, L + 0.5) and features t * u + noise_std * g with g
// standard normal, so a linear model can recover the level up to the noise.
inline SyntheticDataset generate_synthetic(int n, int d,
                                           const ImbalanceProfile& profile,
                                           std::uint64_t seed,
                                           double noise_std = 0.3) {
  if (n < kNumLevels)
    throw ConfigError("synthetic dataset needs n >= 19, got " +
                      std::to_string(n));
  if (d < 1) throw ConfigError("synthetic dataset needs d >= 1");
  if (!(noise_std >= 0.0)) throw ConfigError("noise stddev must be >= 0");
  profile.validate();

  Rng rng(seed);
  SyntheticDataset ds;
  ds.n = n;
  ds.dim = d;
  ds.seed = seed;
  ds.noise_std = noise_std;
  ds.profile = profile;

  ds.latent_direction.resize(d);
  double norm = 0.0;
  for (double& u : ds.latent_direction) {
    u = rng.normal();
    norm += u * u;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    ds.latent_direction[0] = 1.0;
  } else {
    for (double& u : ds.latent_direction) u /= norm;
  }

  const auto counts = apportion_counts(profile, n);
  ds.features.resize(static_cast<std::size_t>(n) * d);
  ds.labels.resize(n);
  std::size_t row = 0;
  for (int level = 1; level <= kNumLevels; ++level) {
    for (std::int64_t c = 0; c < counts[level - 1]; ++c, ++row) {
      const double t = (level - 0.5) + rng.uniform01();
      double* x = ds.features.data() + row * static_cast<std::size_t>(d);
      for (int j = 0; j < d; ++j)
        x[j] = t * ds.latent_direction[j] + noise_std * rng.normal();
      ds.labels[row] = level;
    }
  }

  // Shuffle rows so splits and minibatches mix levels.
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<double> shuffled_features(ds.features.size());
  std::vector<int> shuffled_labels(ds.labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(ds.features.data() + order[i] * static_cast<std::size_t>(d), d,
                shuffled_features.data() + i * static_cast<std::size_t>(d));
    shuffled_labels[i] = ds.labels[order[i]];
  }
  ds.features = std::move(shuffled_features);
  ds.labels = std::move(shuffled_labels);

  ds.ids.reserve(static_cast<std::size_t>(n));
  char buf[24];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "SYN%04d-S%03d", i / kSentencesPerDoc,
                  i % kSentencesPerDoc + 1);
    ds.ids.emplace_back(buf);
  }
  return ds;
}

// Index-range split into train/dev/test; rows were already shuffled by the
// generator.
struct DatasetSplits {
  SyntheticDataset train;
  SyntheticDataset dev;
  SyntheticDataset test;
};

inline SyntheticDataset slice_dataset(const SyntheticDataset& ds,
                                      std::size_t begin, std::size_t end) {
  SyntheticDataset out;
  out.n = static_cast<int>(end - begin);
  out.dim = ds.dim;
  out.seed = ds.seed;
  out.noise_std = ds.noise_std;
  out.profile = ds.profile;
  out.latent_direction = ds.latent_direction;
  out.features.assign(
      ds.features.begin() + static_cast<std::ptrdiff_t>(begin * ds.dim),
      ds.features.begin() + static_cast<std::ptrdiff_t>(end * ds.dim));
  out.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    ds.labels.begin() + static_cast<std::ptrdiff_t>(end));
  out.ids.assign(ds.ids.begin() + static_cast<std::ptrdiff_t>(begin),
                 ds.ids.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

inline DatasetSplits split_dataset(const SyntheticDataset& ds,
                                   double train_frac = 0.7,
                                   double dev_frac = 0.15) {
  if (!(train_frac > 0.0) || !(dev_frac > 0.0) || train_frac + dev_frac >= 1.0)
    throw ConfigError("split fractions must be positive and sum below 1");
  const auto n = static_cast<std::size_t>(ds.n);
  const auto train_end = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_frac));
  const auto dev_end = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (train_frac + dev_frac)));
  if (train_end < 2 || dev_end - train_end < 2 || n - dev_end < 2)
    throw ConfigError("dataset too small for the requested split");
  return {slice_dataset(ds, 0, train_end),
          slice_dataset(ds, train_end, dev_end),
          slice_dataset(ds, dev_end, n)};
}

}  // namespace readlevel
