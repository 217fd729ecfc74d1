#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxpoe/domain.hpp"
#include "ctxpoe/eval.hpp"

namespace ctxpoe {

// The deterministic label a context-driven shortcut would predict.
inline IntentLabel shortcut_label(ContextState c) {
  switch (c) {
    case ContextState::NEAR_BOWL: return IntentLabel::FOOD;
    case ContextState::NEAR_DOOR: return IntentLabel::EXIT;
    case ContextState::NEUTRAL: break;
  }
  throw ConfigError("shortcut_label: NEUTRAL has no shortcut label");
}

struct ShortcutCell {
  IntentLabel shortcut = IntentLabel::IDLE;
  std::int64_t idle_count = 0;
  std::int64_t shortcut_failures = 0;
  // Absent when idle_count == 0; an undefined rate is never reported as 0.
  std::optional<double> failure_rate;

  friend bool operator==(const ShortcutCell&, const ShortcutCell&) = default;
};

struct ShortcutReport {
  ShortcutCell near_bowl;
  ShortcutCell near_door;

  const ShortcutCell& cell(ContextState c) const {
    if (c == ContextState::NEAR_BOWL) return near_bowl;
    if (c == ContextState::NEAR_DOOR) return near_door;
    throw ConfigError("ShortcutReport: no cell for NEUTRAL");
  }

  friend bool operator==(const ShortcutReport&, const ShortcutReport&) = default;
};

// Over true-IDLE clips in each ambiguous context, the fraction predicted as
// that context's shortcut label. NEUTRAL clips are excluded.
inline ShortcutReport shortcut_failure_rates(std::span<const ClipPrediction> preds) {
  ShortcutReport report;
  report.near_bowl.shortcut = shortcut_label(ContextState::NEAR_BOWL);
  report.near_door.shortcut = shortcut_label(ContextState::NEAR_DOOR);
  for (const ClipPrediction& pred : preds) {
    if (pred.context == ContextState::NEUTRAL || pred.truth != IntentLabel::IDLE) continue;
    ShortcutCell& cell =
        pred.context == ContextState::NEAR_BOWL ? report.near_bowl : report.near_door;
    cell.idle_count += 1;
    cell.shortcut_failures += pred.predicted == cell.shortcut;
  }
  for (ShortcutCell* cell : {&report.near_bowl, &report.near_door}) {
    if (cell->idle_count > 0) {
      cell->failure_rate = static_cast<double>(cell->shortcut_failures) /
                           static_cast<double>(cell->idle_count);
    }
  }
  return report;
}

// Rows with an ambiguous context (near_bowl or near_door).
inline std::vector<ClipPrediction> ambiguous_subset(std::span<const ClipPrediction> preds) {
  std::vector<ClipPrediction> out;
  for (const ClipPrediction& pred : preds) {
    if (pred.context != ContextState::NEUTRAL) out.push_back(pred);
  }
  return out;
}

struct CoveragePoint {
  double coverage = 0.0;
  double cumulative_accuracy = 0.0;

  friend bool operator==(const CoveragePoint&, const CoveragePoint&) = default;
};

struct CoverageCurve {
  std::vector<CoveragePoint> points;  // coverage strictly increasing, ends at 1.0
  std::string subset_tag;

  friend bool operator==(const CoverageCurve&, const CoverageCurve&) = default;
};

// Selective-prediction curve: rows sorted by confidence descending (ties by
// clip_id ascending), one point per prefix k: (k/n, correct(k)/k).
inline CoverageCurve accuracy_coverage_curve(std::span<const ClipPrediction> preds,
                                             std::string subset_tag) {
  if (preds.empty()) throw DataError("accuracy_coverage_curve: empty subset");
  std::vector<const ClipPrediction*> order;
  order.reserve(preds.size());
  for (const ClipPrediction& pred : preds) order.push_back(&pred);
  std::sort(order.begin(), order.end(), [](const ClipPrediction* a, const ClipPrediction* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    return a->clip_id < b->clip_id;
  });

  CoverageCurve curve;
  curve.subset_tag = std::move(subset_tag);
  curve.points.reserve(order.size());
  const double n = static_cast<double>(order.size());
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    correct += order[k]->predicted == order[k]->truth;
    curve.points.push_back(CoveragePoint{static_cast<double>(k + 1) / n,
                                         static_cast<double>(correct) / static_cast<double>(k + 1)});
  }
  return curve;
}

// Cumulative accuracy at the smallest emitted coverage >= the requested one.
inline double accuracy_at_coverage(const CoverageCurve& curve, double coverage) {
  if (curve.points.empty()) throw DataError("accuracy_at_coverage: empty curve");
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw ConfigError("accuracy_at_coverage: coverage must be in (0, 1]");
  }
  for (const CoveragePoint& pt : curve.points) {
    if (pt.coverage >= coverage - 1e-12) return pt.cumulative_accuracy;
  }
  return curve.points.back().cumulative_accuracy;
}

}  // namespace ctxpoe
