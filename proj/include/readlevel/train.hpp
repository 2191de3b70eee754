#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/class_weights.hpp"
#include "readlevel/errors.hpp"
#include "readlevel/linear_heads.hpp"
#include "readlevel/synthetic.hpp"

namespace readlevel {

// Training defaults mirror the reference fine-tuning recipe (batch 16,
// base lr 2e-5, 5 epochs, adaptive moments, early stopping on dev loss).
// Linear heads on unit-scale features need bigger steps than a transformer,
// so the base rate is scaled by a configurable multiplier; both factors are
// recorded in run manifests.
struct TrainConfig {
  int batch_size = 16;
  double base_learning_rate = 2e-5;
  double lr_multiplier = 1e3;
  int epochs = 5;
  int patience = 1;
  double weight_decay = 0.0;
  bool use_class_weights = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  double effective_lr() const { return base_learning_rate * lr_multiplier; }

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(base_learning_rate >= 0.0) || !(lr_multiplier >= 0.0))
      throw ConfigError("learning rate must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_epsilon > 0.0))
      throw ConfigError("invalid adam parameters");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return nlohmann::json{{"batch_size", c.batch_size},
                        {"base_learning_rate", c.base_learning_rate},
                        {"lr_multiplier", c.lr_multiplier},
                        {"effective_learning_rate", c.effective_lr()},
                        {"epochs", c.epochs},
                        {"patience", c.patience},
                        {"weight_decay", c.weight_decay},
                        {"use_class_weights", c.use_class_weights},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_epsilon", c.adam_epsilon},
                        {"seed", c.seed}};
}

// Decoupled-weight-decay Adam.
class AdamW {
public:
  AdamW(std::size_t param_count, double beta1, double beta2, double epsilon)
      : beta1_(beta1),
        beta2_(beta2),
        epsilon_(epsilon),
        m_(param_count, 0.0),
        v_(param_count, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double lr,
            double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double m_hat = m_[i] / bc1;
      const double v_hat = v_[i] / bc2;
      params[i] -= lr * (m_hat / (std::sqrt(v_hat) + epsilon_) +
                         weight_decay * params[i]);
    }
  }

private:
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct EpochStats {
  int epoch = 0;        // 1-based
  double train_loss = 0.0;  // full-pass loss at epoch end
  double dev_loss = 0.0;
};

struct TrainResult {
  LinearHead head;  // best-dev checkpoint
  std::vector<EpochStats> curve;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
  bool stopped_early = false;
};

// Minibatch training of one linear head. Deterministic given config.seed:
// the epoch shuffle is the only randomness. Aborts with a diagnostic the
// moment any batch loss stops being finite.
inline TrainResult train(LossKind kind, const SyntheticDataset& train_split,
                         const SyntheticDataset& dev_split,
                         const TrainConfig& config) {
  config.validate();
  if (train_split.dim != dev_split.dim)
    throw ConfigError("train/dev dimension mismatch");
  if (train_split.n < 1 || dev_split.n < 1)
    throw ConfigError("train and dev splits must be non-empty");

  ClassWeights weights;
  if (config.use_class_weights) {
    std::map<int, std::int64_t> counts;
    for (int y : train_split.labels) ++counts[y];
    weights = compute_class_weights(counts);
  }
  const ClassWeights* wptr = config.use_class_weights ? &weights : nullptr;

  LinearHead head = LinearHead::zeros(kind, train_split.dim);
  AdamW optimizer(head.param_count(), config.adam_beta1, config.adam_beta2,
                  config.adam_epsilon);
  Rng rng(config.seed);

  std::vector<std::size_t> order(static_cast<std::size_t>(train_split.n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> batch_features;
  std::vector<int> batch_labels;
  std::vector<double> grad;

  TrainResult result;
  result.head = head;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch_features.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const auto row = train_split.feature_row(order[i]);
        batch_features.insert(batch_features.end(), row.begin(), row.end());
        batch_labels.push_back(train_split.labels[order[i]]);
      }
      double batch_loss;
      try {
        batch_loss = loss_and_grad(head, batch_features, batch_labels, wptr,
                                   &grad);
      } catch (const DivergenceError&) {
        throw DivergenceError(
            "training diverged: non-finite loss at epoch " +
            std::to_string(epoch) + ", batch starting at item " +
            std::to_string(start));
      }
      (void)batch_loss;
      optimizer.step(head.params, grad, config.effective_lr(),
                     config.weight_decay);
      head.project();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss =
        loss_only(head, train_split.features, train_split.labels, wptr);
    stats.dev_loss = loss_only(head, dev_split.features, dev_split.labels, wptr);
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.dev_loss))
      throw DivergenceError("training diverged: non-finite loss after epoch " +
                            std::to_string(epoch));
    result.curve.push_back(stats);

    if (stats.dev_loss < result.best_dev_loss) {
      result.best_dev_loss = stats.dev_loss;
      result.best_epoch = epoch;
      result.head = head;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= config.patience) {
        result.stopped_early = epoch < config.epochs;
        break;
      }
    }
  }
  return result;
}

}  // namespace readlevel
