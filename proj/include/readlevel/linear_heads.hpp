#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "readlevel/class_weights.hpp"
#include "readlevel/errors.hpp"
#include "readlevel/io.hpp"
#include "readlevel/levels.hpp"
#include "readlevel/synthetic.hpp"

namespace readlevel {

enum class LossKind { ce, mse, coral };

inline std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ce: return "ce";
    case LossKind::mse: return "mse";
    case LossKind::coral: return "coral";
  }
  throw ConfigError("invalid loss kind");
}

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ce") return LossKind::ce;
  if (s == "mse") return LossKind::mse;
  if (s == "coral") return LossKind::coral;
  throw ConfigError("unknown loss kind '" + s + "' (expected ce, mse or coral)");
}

inline HeadKind head_kind_for(LossKind kind) {
  switch (kind) {
    case LossKind::ce: return HeadKind::classification;
    case LossKind::mse: return HeadKind::regression;
    case LossKind::coral: return HeadKind::ordinal;
  }
  throw ConfigError("invalid loss kind");
}

// A linear model over d features with one flat parameter vector per kind:
//   ce:    19 x d weight matrix (row-major), then 19 biases
//   mse:   d weights, then one bias
//   coral: d shared weights, the first threshold bias b1, then 17
//          nonnegative decrements; b_k = b1 - sum of the first k-1
//          decrements, so the threshold biases are non-increasing for every
//          representable parameter vector.
struct LinearHead {
  LossKind kind = LossKind::mse;
  int dim = 0;
  std::vector<double> params;

  static std::size_t param_count(LossKind kind, int dim) {
    switch (kind) {
      case LossKind::ce:
        return static_cast<std::size_t>(kNumLevels) * dim + kNumLevels;
      case LossKind::mse: return static_cast<std::size_t>(dim) + 1;
      case LossKind::coral:
        return static_cast<std::size_t>(dim) + 1 + (kNumThresholds - 1);
    }
    throw ConfigError("invalid loss kind");
  }

  static LinearHead zeros(LossKind kind, int dim) {
    if (dim < 1) throw ConfigError("head dimension must be >= 1");
    LinearHead h;
    h.kind = kind;
    h.dim = dim;
    h.params.assign(param_count(kind, dim), 0.0);
    return h;
  }

  std::size_t param_count() const { return param_count(kind, dim); }

  // coral accessors into the flat layout
  double coral_b1() const { return params[static_cast<std::size_t>(dim)]; }
  std::span<const double> coral_deltas() const {
    return {params.data() + dim + 1,
            static_cast<std::size_t>(kNumThresholds - 1)};
  }

  std::array<double, kNumThresholds> threshold_biases() const {
    std::array<double, kNumThresholds> b{};
    b[0] = coral_b1();
    const auto deltas = coral_deltas();
    for (int k = 1; k < kNumThresholds; ++k) b[k] = b[k - 1] - deltas[k - 1];
    return b;
  }

  double dot_features(std::span<const double> x) const {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += params[static_cast<std::size_t>(j)] * x[j];
    return s;
  }

  void class_logits(std::span<const double> x,
                    std::span<double> out) const {
    for (int c = 0; c < kNumLevels; ++c) {
      double s = params[static_cast<std::size_t>(kNumLevels) * dim + c];
      const double* w = params.data() + static_cast<std::size_t>(c) * dim;
      for (int j = 0; j < dim; ++j) s += w[j] * x[j];
      out[static_cast<std::size_t>(c)] = s;
    }
  }

  double regression_score(std::span<const double> x) const {
    return dot_features(x) + params[static_cast<std::size_t>(dim)];
  }

  std::array<double, kNumThresholds> threshold_probs(
      std::span<const double> x) const {
    const double wx = dot_features(x);
    const auto biases = threshold_biases();
    std::array<double, kNumThresholds> probs{};
    for (int k = 0; k < kNumThresholds; ++k)
      probs[static_cast<std::size_t>(k)] = 1.0 / (1.0 + std::exp(-(wx + biases[k])));
    return probs;
  }

  // Keep coral decrements in their nonnegative domain after an optimizer
  // step; no-op for the other kinds.
  void project() {
    if (kind != LossKind::coral) return;
    for (int k = 0; k < kNumThresholds - 1; ++k) {
      double& delta = params[static_cast<std::size_t>(dim) + 1 + k];
      if (delta < 0.0) delta = 0.0;
    }
  }
};

namespace detail {

inline void stable_softmax(std::span<const double> logits,
                           std::span<double> probs) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] /= sum;
}

// binary cross-entropy with logits, numerically stable
inline double bce_with_logits(double z, double target) {
  return std::max(z, 0.0) - target * z + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

// Loss (and, when grad != nullptr, the exact analytic gradient w.r.t. the
// flat parameter vector) of one batch. All three losses average over the
// batch; per-item class weights multiply each item's contribution when
// weights are given, with weight 1 for labels the weights were not fit on.
inline double loss_and_grad(const LinearHead& head,
                            std::span<const double> features,
                            std::span<const int> labels,
                            const ClassWeights* class_weights,
                            std::vector<double>* grad) {
  const std::size_t count = labels.size();
  if (count == 0) throw ValidationError("loss on an empty batch");
  const auto dim = static_cast<std::size_t>(head.dim);
  if (features.size() != count * dim)
    throw ConfigError("feature/label size mismatch: " +
                      std::to_string(features.size()) + " features for " +
                      std::to_string(count) + " labels of dim " +
                      std::to_string(head.dim));
  if (grad) grad->assign(head.param_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(count);

  double loss = 0.0;
  switch (head.kind) {
    case LossKind::ce: {
      std::array<double, kNumLevels> logits{};
      std::array<double, kNumLevels> probs{};
      for (std::size_t i = 0; i < count; ++i) {
        const int y = require_level(labels[i], barec_scale());
        const double wt = class_weights ? class_weights->weight_for(y) : 1.0;
        const std::span<const double> x = features.subspan(i * dim, dim);
        head.class_logits(x, logits);
        detail::stable_softmax(logits, probs);
        loss += -wt * std::log(std::max(probs[static_cast<std::size_t>(y - 1)],
                                        1e-300)) *
                inv_n;
        if (grad) {
          for (int c = 0; c < kNumLevels; ++c) {
            const double gz =
                wt * (probs[static_cast<std::size_t>(c)] - (c == y - 1 ? 1.0 : 0.0)) *
                inv_n;
            double* gw = grad->data() + static_cast<std::size_t>(c) * dim;
            for (std::size_t j = 0; j < dim; ++j) gw[j] += gz * x[j];
            (*grad)[static_cast<std::size_t>(kNumLevels) * dim + c] += gz;
          }
        }
      }
      break;
    }
    case LossKind::mse: {
      for (std::size_t i = 0; i < count; ++i) {
        const int y = require_level(labels[i], barec_scale());
        const double wt = class_weights ? class_weights->weight_for(y) : 1.0;
        const std::span<const double> x = features.subspan(i * dim, dim);
        const double err = head.regression_score(x) - static_cast<double>(y);
        loss += wt * err * err * inv_n;
        if (grad) {
          const double gs = 2.0 * wt * err * inv_n;
          for (std::size_t j = 0; j < dim; ++j) (*grad)[j] += gs * x[j];
          (*grad)[dim] += gs;
        }
      }
      break;
    }
    case LossKind::coral: {
      const auto biases = head.threshold_biases();
      for (std::size_t i = 0; i < count; ++i) {
        const int y = require_level(labels[i], barec_scale());
        const double wt = class_weights ? class_weights->weight_for(y) : 1.0;
        const std::span<const double> x = features.subspan(i * dim, dim);
        const double wx = head.dot_features(x);
        double gx = 0.0;                              // d(loss)/d(wx)
        std::array<double, kNumThresholds> gb{};      // d(loss)/d(b_k)
        for (int k = 0; k < kNumThresholds; ++k) {
          const double z = wx + biases[static_cast<std::size_t>(k)];
          const double target = y > k + 1 ? 1.0 : 0.0;
          loss += wt * detail::bce_with_logits(z, target) * inv_n;
          if (grad) {
            const double gz = wt * (detail::sigmoid(z) - target) * inv_n;
            gx += gz;
            gb[static_cast<std::size_t>(k)] = gz;
          }
        }
        if (grad) {
          for (std::size_t j = 0; j < dim; ++j) (*grad)[j] += gx * x[j];
          // b_k = b1 - sum_{m<k} delta_m: b1 collects every threshold,
          // delta_m every threshold at or beyond m+1, negated.
          double suffix = 0.0;
          for (int k = kNumThresholds - 1; k >= 1; --k) {
            suffix += gb[static_cast<std::size_t>(k)];
            (*grad)[dim + 1 + static_cast<std::size_t>(k - 1)] -= suffix;
          }
          (*grad)[dim] += suffix + gb[0];
        }
      }
      break;
    }
  }
  if (!std::isfinite(loss))
    throw DivergenceError("loss is not finite");
  return loss;
}

inline double loss_only(const LinearHead& head, std::span<const double> features,
                        std::span<const int> labels,
                        const ClassWeights* class_weights) {
  return loss_and_grad(head, features, labels, class_weights, nullptr);
}

// ---------------------------------------------------------------------------
// Bridge to the prediction-file pipeline: evaluate a trained head on a
// dataset and emit loadable head outputs.
// ---------------------------------------------------------------------------

inline std::vector<HeadOutput> emit_heads(const LinearHead& head,
                                          const SyntheticDataset& data,
                                          const std::string& model_id) {
  std::vector<HeadOutput> outputs;
  outputs.reserve(static_cast<std::size_t>(data.n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(data.n); ++i) {
    HeadOutput h;
    h.sentence_id = data.ids[i];
    h.model_id = model_id;
    h.kind = head_kind_for(head.kind);
    const auto x = data.feature_row(i);
    switch (head.kind) {
      case LossKind::ce: {
        std::array<double, kNumLevels> logits{};
        h.class_probs.resize(kNumLevels);
        head.class_logits(x, logits);
        detail::stable_softmax(logits, h.class_probs);
        break;
      }
      case LossKind::mse:
        h.score = head.regression_score(x);
        break;
      case LossKind::coral: {
        const auto probs = head.threshold_probs(x);
        h.threshold_probs.assign(probs.begin(), probs.end());
        break;
      }
    }
    outputs.push_back(std::move(h));
  }
  return outputs;
}

}  // namespace readlevel
