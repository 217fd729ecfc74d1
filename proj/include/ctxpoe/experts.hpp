#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctxpoe/domain.hpp"
#include "ctxpoe/numeric.hpp"

namespace ctxpoe {

inline constexpr double kStdFloor = 1e-6;
inline constexpr double kDefaultPriorPseudoCount = 0.01;

// Additively smoothed conditional label distribution per context state,
// estimated from label counts. Rows of contexts absent from the data are
// uniform.
struct ContextPriorTable {
  std::array<IntentDistribution, kNumContexts> table{};
  double pseudo_count = 0.0;

  const IntentDistribution& row(ContextState c) const { return table[index_of(c)]; }

  friend bool operator==(const ContextPriorTable&, const ContextPriorTable&) = default;
};

// table[c][y] = (count(c,y) + eps) / (count(c) + 3*eps)
inline ContextPriorTable fit_context_prior_from_counts(
    const std::array<std::array<std::int64_t, kNumLabels>, kNumContexts>& counts,
    double pseudo_count) {
  if (pseudo_count < 0.0) throw ConfigError("fit_context_prior: negative pseudo_count");
  ContextPriorTable prior;
  prior.pseudo_count = pseudo_count;
  for (std::size_t c = 0; c < kNumContexts; ++c) {
    std::int64_t total = 0;
    for (std::size_t y = 0; y < kNumLabels; ++y) total += counts[c][y];
    if (total == 0 && pseudo_count == 0.0) {
      prior.table[c] = IntentDistribution::uniform();
      continue;
    }
    const double denom = static_cast<double>(total) + kNumLabels * pseudo_count;
    for (std::size_t y = 0; y < kNumLabels; ++y) {
      prior.table[c].p[y] = (static_cast<double>(counts[c][y]) + pseudo_count) / denom;
    }
  }
  return prior;
}

inline ContextPriorTable fit_context_prior(std::span<const ClipRecord> clips,
                                           double pseudo_count) {
  if (pseudo_count < 0.0) throw ConfigError("fit_context_prior: negative pseudo_count");
  if (clips.empty()) throw DataError("fit_context_prior: empty clip set");
  std::array<std::array<std::int64_t, kNumLabels>, kNumContexts> counts{};
  for (const ClipRecord& clip : clips) {
    counts[index_of(clip.context)][index_of(clip.label)] += 1;
  }
  return fit_context_prior_from_counts(counts, pseudo_count);
}

// Per-feature mean and standard deviation, population convention, with the
// std floored at kStdFloor so constant features stay usable.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const { return mean.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != dim()) {
      throw DataError("standardizer: input length " + std::to_string(x.size()) +
                      " differs from fitted dim " + std::to_string(dim()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stddev[j];
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline Standardizer fit_standardizer(const FeatureMatrix& x) {
  if (x.rows == 0) throw DataError("fit_standardizer: no rows");
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.stddev.assign(x.cols, 0.0);
  const double n = static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += x.at(i, j);
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double d = x.at(i, j) - s.mean[j];
      s.stddev[j] += d * d;
    }
  }
  for (double& v : s.stddev) v = std::max(std::sqrt(v / n), kStdFloor);
  return s;
}

struct TrainConfig {
  double l2_strength = 1e-2;
  double learning_rate = 0.5;
  int max_epochs = 5000;
  double convergence_tol = 1e-8;  // relative loss-change threshold
  std::uint64_t seed = 0;

  void validate() const {
    if (l2_strength < 0.0) throw ConfigError("TrainConfig: negative l2_strength");
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be positive");
    if (max_epochs <= 0) throw ConfigError("TrainConfig: max_epochs must be positive");
    if (!(convergence_tol > 0.0)) throw ConfigError("TrainConfig: convergence_tol must be positive");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Multinomial logistic classifier over standardized features.
struct LogisticExpert {
  std::size_t dim = 0;
  std::vector<double> weights;  // kNumLabels x dim, row-major
  std::array<double, kNumLabels> bias{};
  Standardizer standardizer;
  double l2_strength = 0.0;
  std::string modality_tag;  // "pose", "audio" or "concat"

  std::array<double, kNumLabels> logits_standardized(std::span<const double> x_std) const {
    std::array<double, kNumLabels> z = bias;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double* w = weights.data() + k * dim;
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += w[j] * x_std[j];
      z[k] += acc;
    }
    return z;
  }

  IntentDistribution predict(std::span<const double> x) const {
    if (x.size() != dim) {
      throw DataError("predict_expert: input length " + std::to_string(x.size()) +
                      " differs from expert dim " + std::to_string(dim));
    }
    const std::vector<double> xs = standardizer.apply(x);
    return IntentDistribution{softmax(logits_standardized(xs))};
  }

  friend bool operator==(const LogisticExpert&, const LogisticExpert&) = default;
};

inline IntentDistribution predict_expert(const LogisticExpert& e, std::span<const double> x) {
  return e.predict(x);
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;  // kNumLabels x dim
  std::array<double, kNumLabels> grad_bias{};
};

// Mean cross-entropy plus (l2/2)*||W||^2 (bias unregularized), with its
// analytic gradient. x_std holds already-standardized rows.
inline LossGrad logistic_loss_grad(const FeatureMatrix& x_std,
                                   std::span<const IntentLabel> y,
                                   std::span<const double> weights,
                                   const std::array<double, kNumLabels>& bias,
                                   double l2) {
  const std::size_t n = x_std.rows;
  const std::size_t d = x_std.cols;
  if (y.size() != n) throw InternalError("logistic_loss_grad: label count mismatch");
  if (weights.size() != kNumLabels * d) throw InternalError("logistic_loss_grad: weight size mismatch");

  LossGrad out;
  out.grad_weights.assign(kNumLabels * d, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x_std.data.data() + i * d;
    std::array<double, kNumLabels> z = bias;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double* w = weights.data() + k * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += w[j] * xi[j];
      z[k] += acc;
    }
    // loss_i = lse(z) - z[y_i], softmax via the same max-subtraction
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    std::array<double, kNumLabels> e;
    double s = 0.0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      e[k] = std::exp(z[k] - m);
      s += e[k];
    }
    loss += m + std::log(s) - z[index_of(y[i])];
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double g = e[k] / s - (k == index_of(y[i]) ? 1.0 : 0.0);
      out.grad_bias[k] += g;
      double* gw = out.grad_weights.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += g * xi[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (std::size_t k = 0; k < kNumLabels; ++k) out.grad_bias[k] *= inv_n;
  double w_sq = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    out.grad_weights[t] = out.grad_weights[t] * inv_n + l2 * weights[t];
    w_sq += weights[t] * weights[t];
  }
  out.loss = loss + 0.5 * l2 * w_sq;
  return out;
}

struct TrainResult {
  LogisticExpert expert;
  std::vector<double> loss_history;  // accepted epochs only
  int epochs = 0;
  int lr_halvings = 0;
  double final_learning_rate = 0.0;
};

// Full-batch gradient descent from zero initialization. A step that raises
// the loss is rejected and the learning rate halved (the halving count is
// recorded), so the accepted loss sequence is non-increasing. Stops when the
// relative loss change drops below cfg.convergence_tol or after
// cfg.max_epochs iterations (rejected steps included).
inline TrainResult train_logistic_expert(const FeatureMatrix& x,
                                         std::span<const IntentLabel> y,
                                         const TrainConfig& cfg,
                                         std::string modality_tag) {
  cfg.validate();
  if (x.rows == 0) throw DataError("train_logistic_expert: no training rows");
  if (y.size() != x.rows) throw DataError("train_logistic_expert: label count mismatch");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw DataError("train_logistic_expert: non-finite feature");
  }

  TrainResult result;
  result.expert.dim = x.cols;
  result.expert.standardizer = fit_standardizer(x);
  result.expert.l2_strength = cfg.l2_strength;
  result.expert.modality_tag = std::move(modality_tag);

  FeatureMatrix xs(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      xs.at(i, j) = (x.at(i, j) - result.expert.standardizer.mean[j]) /
                    result.expert.standardizer.stddev[j];
    }
  }

  std::vector<double> w(kNumLabels * x.cols, 0.0);
  std::array<double, kNumLabels> b{};
  double lr = cfg.learning_rate;

  LossGrad cur = logistic_loss_grad(xs, y, w, b, cfg.l2_strength);
  if (!std::isfinite(cur.loss)) throw InternalError("non-finite loss at epoch 0");
  result.loss_history.push_back(cur.loss);

  std::vector<double> w_next(w.size());
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t t = 0; t < w.size(); ++t) w_next[t] = w[t] - lr * cur.grad_weights[t];
    std::array<double, kNumLabels> b_next;
    for (std::size_t k = 0; k < kNumLabels; ++k) b_next[k] = b[k] - lr * cur.grad_bias[k];

    const LossGrad next = logistic_loss_grad(xs, y, w_next, b_next, cfg.l2_strength);
    if (!std::isfinite(next.loss)) {
      throw InternalError("non-finite loss at epoch " + std::to_string(epoch));
    }
    result.epochs = epoch;
    if (next.loss > cur.loss) {
      lr *= 0.5;
      ++result.lr_halvings;
      if (lr < 1e-300) break;
      continue;  // step rejected
    }
    const double rel_change = std::abs(cur.loss - next.loss) / std::max(1.0, std::abs(cur.loss));
    w.swap(w_next);
    b = b_next;
    cur = next;
    result.loss_history.push_back(cur.loss);
    if (rel_change < cfg.convergence_tol) break;
  }

  result.expert.weights = std::move(w);
  result.expert.bias = b;
  result.final_learning_rate = lr;
  return result;
}

// One-hot context prepended to pose then audio features; the Feature-Concat
// baseline's input representation.
inline std::vector<double> build_concat_features(const ClipRecord& clip) {
  std::vector<double> out;
  out.reserve(kNumContexts + clip.pose_features.size() + clip.audio_features.size());
  for (std::size_t c = 0; c < kNumContexts; ++c) {
    out.push_back(c == index_of(clip.context) ? 1.0 : 0.0);
  }
  out.insert(out.end(), clip.pose_features.begin(), clip.pose_features.end());
  out.insert(out.end(), clip.audio_features.begin(), clip.audio_features.end());
  return out;
}

}  // namespace ctxpoe
