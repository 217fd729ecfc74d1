#pragma once

// Test-only brute-force oracles, kept independent of the library's
// implementation paths they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxpoe/domain.hpp"
#include "ctxpoe/eval.hpp"
#include "ctxpoe/experts.hpp"
#include "ctxpoe/numeric.hpp"
#include "ctxpoe/rng.hpp"

namespace oracles {

// Macro-F1 with per-class tp/fp/fn recounted by scanning the pairs rather
// than through a confusion matrix. Exact agreement is possible because the
// counts are integers and 2tp/(2tp+fp+fn) is a single correctly rounded
// division (the precision/recall form is algebraically equal but not
// bit-identical). Absent classes contribute 0.
inline double macro_f1_bruteforce(
    std::span<const std::pair<ctxpoe::IntentLabel, ctxpoe::IntentLabel>> pairs) {
  double sum = 0.0;
  for (ctxpoe::IntentLabel cls : ctxpoe::all_labels()) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [truth, pred] : pairs) {
      if (truth == cls && pred == cls) ++tp;
      if (truth != cls && pred == cls) ++fp;
      if (truth == cls && pred != cls) ++fn;
    }
    const std::int64_t denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / 3.0;
}

// Central finite-difference gradient of the regularized cross-entropy loss
// at (weights, bias), via loss evaluations only.
struct FdGrad {
  std::vector<double> weights;
  std::array<double, 3> bias;
};

inline FdGrad finite_difference_gradient(const ctxpoe::FeatureMatrix& x_std,
                                         std::span<const ctxpoe::IntentLabel> y,
                                         std::vector<double> weights,
                                         std::array<double, 3> bias, double l2,
                                         double h = 1e-5) {
  auto loss_at = [&](const std::vector<double>& w, const std::array<double, 3>& b) {
    return ctxpoe::logistic_loss_grad(x_std, y, w, b, l2).loss;
  };
  FdGrad g;
  g.weights.resize(weights.size());
  for (std::size_t t = 0; t < weights.size(); ++t) {
    const double orig = weights[t];
    weights[t] = orig + h;
    const double up = loss_at(weights, bias);
    weights[t] = orig - h;
    const double down = loss_at(weights, bias);
    weights[t] = orig;
    g.weights[t] = (up - down) / (2.0 * h);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const double orig = bias[k];
    bias[k] = orig + h;
    const double up = loss_at(weights, bias);
    bias[k] = orig - h;
    const double down = loss_at(weights, bias);
    bias[k] = orig;
    g.bias[k] = (up - down) / (2.0 * h);
  }
  return g;
}

// Exhaustive grid search over the 66-point weight simplex, enumerated with
// the context weight decreasing first, then pose; first maximizer wins.
inline std::array<double, 3> late_weights_bruteforce(
    std::span<const ctxpoe::ExpertTriple> triples,
    std::span<const ctxpoe::IntentLabel> labels) {
  std::array<double, 3> best{1.0, 0.0, 0.0};
  std::int64_t best_correct = -1;
  for (int ci = 10; ci >= 0; --ci) {
    for (int pi = 10 - ci; pi >= 0; --pi) {
      const int ai = 10 - ci - pi;
      const std::array<double, 3> w{ci / 10.0, pi / 10.0, ai / 10.0};
      std::int64_t correct = 0;
      for (std::size_t t = 0; t < triples.size(); ++t) {
        std::array<double, 3> mix{};
        for (std::size_t k = 0; k < 3; ++k) {
          for (std::size_t i = 0; i < 3; ++i) mix[i] += w[k] * triples[t][k].p[i];
        }
        std::size_t arg = 0;
        for (std::size_t i = 1; i < 3; ++i) {
          if (mix[i] > mix[arg]) arg = i;
        }
        correct += static_cast<ctxpoe::IntentLabel>(arg) == labels[t];
      }
      if (correct > best_correct) {
        best_correct = correct;
        best = w;
      }
    }
  }
  return best;
}

// Per-fold train-majority baseline: predicts each fold's training-set
// majority label (ties toward the lower canonical index) for every test
// clip; returns pooled accuracy.
inline double majority_baseline_pooled_accuracy(const ctxpoe::Dataset& ds) {
  const std::vector<ctxpoe::LovoFold> folds = ctxpoe::lovo_split(ds);
  std::int64_t correct = 0, total = 0;
  for (const ctxpoe::LovoFold& fold : folds) {
    std::array<std::int64_t, 3> counts{};
    for (std::size_t i : fold.train_indices) counts[ctxpoe::index_of(ds.clips[i].label)] += 1;
    std::size_t majority = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (counts[k] > counts[majority]) majority = k;
    }
    for (std::size_t i : fold.test_indices) {
      correct += ctxpoe::index_of(ds.clips[i].label) == majority;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

// Per-fold, per-context train-majority baseline.
inline double context_majority_baseline_pooled_accuracy(const ctxpoe::Dataset& ds) {
  const std::vector<ctxpoe::LovoFold> folds = ctxpoe::lovo_split(ds);
  std::int64_t correct = 0, total = 0;
  for (const ctxpoe::LovoFold& fold : folds) {
    std::array<std::array<std::int64_t, 3>, 3> counts{};
    for (std::size_t i : fold.train_indices) {
      counts[ctxpoe::index_of(ds.clips[i].context)][ctxpoe::index_of(ds.clips[i].label)] += 1;
    }
    for (std::size_t i : fold.test_indices) {
      const auto& row = counts[ctxpoe::index_of(ds.clips[i].context)];
      std::size_t majority = 0;
      for (std::size_t k = 1; k < 3; ++k) {
        if (row[k] > row[majority]) majority = k;
      }
      correct += ctxpoe::index_of(ds.clips[i].label) == majority;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

// Random draws shared by several suites.
inline ctxpoe::IntentDistribution random_simplex_point(ctxpoe::RngStream& rng) {
  std::array<double, 3> masses;
  for (double& m : masses) m = -std::log(1.0 - rng.uniform01());
  return ctxpoe::IntentDistribution::normalized(masses);
}

}  // namespace oracles
