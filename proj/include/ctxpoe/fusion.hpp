#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxpoe/domain.hpp"
#include "ctxpoe/experts.hpp"
#include "ctxpoe/numeric.hpp"

namespace ctxpoe {

enum class Method {
  CONTEXT_ONLY,
  POSE_ONLY,
  AUDIO_ONLY,
  FEATURE_CONCAT,
  LATE_AVG,
  LATE_WEIGHTED,
  POE_CTX_POSE,
  POE_CTX_AUD,
  POE_FULL,
};

inline constexpr std::array<Method, 9> all_methods() {
  return {Method::CONTEXT_ONLY, Method::POSE_ONLY,    Method::AUDIO_ONLY,
          Method::FEATURE_CONCAT, Method::LATE_AVG,   Method::LATE_WEIGHTED,
          Method::POE_CTX_POSE, Method::POE_CTX_AUD,  Method::POE_FULL};
}

inline std::string_view to_token(Method m) {
  switch (m) {
    case Method::CONTEXT_ONLY: return "CONTEXT_ONLY";
    case Method::POSE_ONLY: return "POSE_ONLY";
    case Method::AUDIO_ONLY: return "AUDIO_ONLY";
    case Method::FEATURE_CONCAT: return "FEATURE_CONCAT";
    case Method::LATE_AVG: return "LATE_AVG";
    case Method::LATE_WEIGHTED: return "LATE_WEIGHTED";
    case Method::POE_CTX_POSE: return "POE_CTX_POSE";
    case Method::POE_CTX_AUD: return "POE_CTX_AUD";
    case Method::POE_FULL: return "POE_FULL";
  }
  throw InternalError("to_token: invalid Method");
}

inline std::string valid_method_names() {
  std::string out;
  for (Method m : all_methods()) {
    if (!out.empty()) out += ", ";
    out += to_token(m);
  }
  return out;
}

inline Method parse_method(std::string_view tok) {
  for (Method m : all_methods()) {
    if (tok == to_token(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(tok) +
                    "' (valid: " + valid_method_names() + ")");
}

struct FusionConfig {
  Method method = Method::POE_FULL;
  double alpha = 1.0;  // prior strength; 0 removes the context prior
  // Fixed weights for LATE_WEIGHTED in (context, pose, audio) order.
  // Unset means the weights are fitted per training fold.
  std::optional<std::array<double, 3>> late_weights;

  void validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("FusionConfig: alpha must be >= 0");
    if (late_weights) validate_simplex_weights(*late_weights);
  }

  static void validate_simplex_weights(const std::array<double, 3>& w) {
    double s = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw ConfigError("late_weights: negative component");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw ConfigError("late_weights: components sum to " + std::to_string(s));
    }
  }

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

// A fused distribution plus the degenerate-fusion flag (set when every label
// had zero mass in all factors and the uniform fallback was returned).
struct FusionResult {
  IntentDistribution dist;
  bool degenerate = false;

  friend bool operator==(const FusionResult&, const FusionResult&) = default;
};

namespace detail {

// Normalizes summed log-masses via log-sum-exp. All -inf triggers the
// uniform fallback with the degenerate flag set.
inline FusionResult normalize_log_masses(const std::array<double, kNumLabels>& lm) {
  const double lse = log_sum_exp(lm);
  if (lse == kNegInf) return {IntentDistribution::uniform(), true};
  IntentDistribution d;
  for (std::size_t i = 0; i < kNumLabels; ++i) d.p[i] = std::exp(lm[i] - lse);
  return {d, false};
}

// alpha * log(prior) with the alpha = 0 convention that the prior term
// vanishes even on zero prior mass.
inline double scaled_log_prior(double prior_p, double alpha) {
  if (alpha == 0.0) return 0.0;
  return alpha * safe_log(prior_p);
}

}  // namespace detail

// Product-of-experts fusion: prior^alpha * pose * audio, renormalized.
// Computed in log space so near-zero smoothed prior masses stay exact.
inline FusionResult poe_fuse(const IntentDistribution& prior,
                             const IntentDistribution& pose,
                             const IntentDistribution& audio,
                             double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("poe_fuse: alpha must be >= 0");
  std::array<double, kNumLabels> lm;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    lm[i] = detail::scaled_log_prior(prior.p[i], alpha) + safe_log(pose.p[i]) +
            safe_log(audio.p[i]);
  }
  return detail::normalize_log_masses(lm);
}

// Fusion with a single evidence expert (the partial-PoE baselines).
inline FusionResult poe_fuse_partial(const IntentDistribution& prior,
                                     const IntentDistribution& evidence,
                                     double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("poe_fuse_partial: alpha must be >= 0");
  std::array<double, kNumLabels> lm;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    lm[i] = detail::scaled_log_prior(prior.p[i], alpha) + safe_log(evidence.p[i]);
  }
  return detail::normalize_log_masses(lm);
}

// Component-wise arithmetic mean.
inline IntentDistribution late_fuse_avg(std::span<const IntentDistribution> dists) {
  if (dists.empty()) throw DataError("late_fuse_avg: empty input");
  IntentDistribution out;
  out.p = {0.0, 0.0, 0.0};
  for (const IntentDistribution& d : dists) {
    for (std::size_t i = 0; i < kNumLabels; ++i) out.p[i] += d.p[i];
  }
  for (double& x : out.p) x /= static_cast<double>(dists.size());
  return out;
}

// Convex combination of exactly three distributions.
inline IntentDistribution late_fuse_weighted(std::span<const IntentDistribution> dists,
                                             const std::array<double, 3>& weights) {
  if (dists.size() != 3) throw DataError("late_fuse_weighted: expected 3 distributions");
  FusionConfig::validate_simplex_weights(weights);
  IntentDistribution out;
  out.p = {0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < kNumLabels; ++i) out.p[i] += weights[k] * dists[k].p[i];
  }
  return out;
}

// Per-clip (context, pose, audio) expert outputs used to fit late weights.
using ExpertTriple = std::array<IntentDistribution, 3>;

// Grid search over the weight simplex at step 0.1 (66 points) maximizing
// training accuracy. The grid is enumerated with the context weight
// decreasing first, then pose, so ties resolve toward context-heavy weights;
// the first maximizer wins.
inline std::array<double, 3> fit_late_weights(std::span<const ExpertTriple> train_predictions,
                                              std::span<const IntentLabel> train_labels) {
  if (train_predictions.empty()) throw DataError("fit_late_weights: no training clips");
  if (train_predictions.size() != train_labels.size()) {
    throw DataError("fit_late_weights: prediction/label count mismatch");
  }
  std::array<double, 3> best{1.0, 0.0, 0.0};
  std::int64_t best_correct = -1;
  for (int ci = 10; ci >= 0; --ci) {
    for (int pi = 10 - ci; pi >= 0; --pi) {
      const int ai = 10 - ci - pi;
      const std::array<double, 3> w{ci / 10.0, pi / 10.0, ai / 10.0};
      std::int64_t correct = 0;
      for (std::size_t t = 0; t < train_predictions.size(); ++t) {
        const IntentDistribution fused = late_fuse_weighted(train_predictions[t], w);
        correct += argmax_label(fused) == train_labels[t];
      }
      if (correct > best_correct) {
        best_correct = correct;
        best = w;
      }
    }
  }
  return best;
}

// Everything a fusion method may need at prediction time. Components are
// optional; predict_method reports which one is missing.
struct MethodBundle {
  std::optional<ContextPriorTable> prior;
  std::optional<LogisticExpert> pose;
  std::optional<LogisticExpert> audio;
  std::optional<LogisticExpert> concat;
  std::optional<std::array<double, 3>> late_weights;
};

struct MethodNeeds {
  bool prior = false;
  bool pose = false;
  bool audio = false;
  bool concat = false;
  bool late_weights = false;
};

inline MethodNeeds method_needs(Method m) {
  MethodNeeds n;
  switch (m) {
    case Method::CONTEXT_ONLY:
      n.prior = true;
      break;
    case Method::POSE_ONLY:
      n.pose = true;
      break;
    case Method::AUDIO_ONLY:
      n.audio = true;
      break;
    case Method::FEATURE_CONCAT:
      n.concat = true;
      break;
    case Method::LATE_AVG:
      n.prior = n.pose = n.audio = true;
      break;
    case Method::LATE_WEIGHTED:
      n.prior = n.pose = n.audio = n.late_weights = true;
      break;
    case Method::POE_CTX_POSE:
      n.prior = n.pose = true;
      break;
    case Method::POE_CTX_AUD:
      n.prior = n.audio = true;
      break;
    case Method::POE_FULL:
      n.prior = n.pose = n.audio = true;
      break;
  }
  return n;
}

namespace detail {

template <typename T>
const T& require_component(const std::optional<T>& c, Method m, std::string_view name) {
  if (!c) {
    throw ConfigError(std::string(to_token(m)) + ": missing bundle component '" +
                      std::string(name) + "'");
  }
  return *c;
}

}  // namespace detail

// Routes a clip through the expert/fusion composition selected by cfg.method.
inline FusionResult predict_method(const FusionConfig& cfg, const MethodBundle& bundle,
                                   const ClipRecord& clip) {
  using detail::require_component;
  const Method m = cfg.method;
  switch (m) {
    case Method::CONTEXT_ONLY:
      return {require_component(bundle.prior, m, "prior").row(clip.context), false};
    case Method::POSE_ONLY:
      return {require_component(bundle.pose, m, "pose").predict(clip.pose_features), false};
    case Method::AUDIO_ONLY:
      return {require_component(bundle.audio, m, "audio").predict(clip.audio_features), false};
    case Method::FEATURE_CONCAT:
      return {require_component(bundle.concat, m, "concat").predict(build_concat_features(clip)),
              false};
    case Method::LATE_AVG: {
      const std::array<IntentDistribution, 3> dists{
          require_component(bundle.prior, m, "prior").row(clip.context),
          require_component(bundle.pose, m, "pose").predict(clip.pose_features),
          require_component(bundle.audio, m, "audio").predict(clip.audio_features)};
      return {late_fuse_avg(dists), false};
    }
    case Method::LATE_WEIGHTED: {
      const std::array<IntentDistribution, 3> dists{
          require_component(bundle.prior, m, "prior").row(clip.context),
          require_component(bundle.pose, m, "pose").predict(clip.pose_features),
          require_component(bundle.audio, m, "audio").predict(clip.audio_features)};
      const std::array<double, 3>& w =
          cfg.late_weights ? *cfg.late_weights
                           : require_component(bundle.late_weights, m, "late_weights");
      return {late_fuse_weighted(dists, w), false};
    }
    case Method::POE_CTX_POSE: {
      const ContextPriorTable& prior = require_component(bundle.prior, m, "prior");
      const LogisticExpert& pose = require_component(bundle.pose, m, "pose");
      return poe_fuse_partial(prior.row(clip.context), pose.predict(clip.pose_features),
                              cfg.alpha);
    }
    case Method::POE_CTX_AUD: {
      const ContextPriorTable& prior = require_component(bundle.prior, m, "prior");
      const LogisticExpert& audio = require_component(bundle.audio, m, "audio");
      return poe_fuse_partial(prior.row(clip.context), audio.predict(clip.audio_features),
                              cfg.alpha);
    }
    case Method::POE_FULL: {
      const ContextPriorTable& prior = require_component(bundle.prior, m, "prior");
      const LogisticExpert& pose = require_component(bundle.pose, m, "pose");
      const LogisticExpert& audio = require_component(bundle.audio, m, "audio");
      return poe_fuse(prior.row(clip.context), pose.predict(clip.pose_features),
                      audio.predict(clip.audio_features), cfg.alpha);
    }
  }
  throw InternalError("predict_method: invalid method");
}

}  // namespace ctxpoe
