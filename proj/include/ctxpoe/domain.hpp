#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ctxpoe/errors.hpp"

namespace ctxpoe {

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::size_t kNumContexts = 3;

// Latent intent classes, canonical index order.
enum class IntentLabel : int { EXIT = 0, FOOD = 1, IDLE = 2 };

// Discrete spatial context states, canonical index order.
enum class ContextState : int { NEAR_BOWL = 0, NEAR_DOOR = 1, NEUTRAL = 2 };

constexpr std::array<IntentLabel, kNumLabels> all_labels() {
  return {IntentLabel::EXIT, IntentLabel::FOOD, IntentLabel::IDLE};
}

constexpr std::array<ContextState, kNumContexts> all_contexts() {
  return {ContextState::NEAR_BOWL, ContextState::NEAR_DOOR, ContextState::NEUTRAL};
}

constexpr std::size_t index_of(IntentLabel y) { return static_cast<std::size_t>(y); }
constexpr std::size_t index_of(ContextState c) { return static_cast<std::size_t>(c); }

inline std::string_view to_token(IntentLabel y) {
  switch (y) {
    case IntentLabel::EXIT: return "EXIT";
    case IntentLabel::FOOD: return "FOOD";
    case IntentLabel::IDLE: return "IDLE";
  }
  throw InternalError("to_token: invalid IntentLabel");
}

inline std::string_view to_token(ContextState c) {
  switch (c) {
    case ContextState::NEAR_BOWL: return "near_bowl";
    case ContextState::NEAR_DOOR: return "near_door";
    case ContextState::NEUTRAL: return "neutral";
  }
  throw InternalError("to_token: invalid ContextState");
}

// Token vocabularies are strict: exact case, no aliases.
inline IntentLabel parse_label(std::string_view tok) {
  for (IntentLabel y : all_labels()) {
    if (tok == to_token(y)) return y;
  }
  throw DataError("unknown label token '" + std::string(tok) + "'");
}

inline ContextState parse_context(std::string_view tok) {
  for (ContextState c : all_contexts()) {
    if (tok == to_token(c)) return c;
  }
  throw DataError("unknown context token '" + std::string(tok) + "'");
}

// A point on the 3-class probability simplex, canonical label order.
struct IntentDistribution {
  std::array<double, kNumLabels> p{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  double operator[](IntentLabel y) const { return p[index_of(y)]; }

  static IntentDistribution uniform() { return {}; }

  // Validates components in [0,1] and sum within 1e-9 of 1.
  static IntentDistribution checked(const std::array<double, kNumLabels>& q) {
    double s = 0.0;
    for (double x : q) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw DataError("IntentDistribution: component outside [0, 1]");
      }
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw DataError("IntentDistribution: components sum to " + std::to_string(s));
    }
    return IntentDistribution{q};
  }

  // Normalizes non-negative masses with positive total.
  static IntentDistribution normalized(const std::array<double, kNumLabels>& masses) {
    double s = 0.0;
    for (double x : masses) {
      if (!(x >= 0.0)) throw DataError("IntentDistribution: negative mass");
      s += x;
    }
    if (!(s > 0.0)) throw DataError("IntentDistribution: zero total mass");
    IntentDistribution d;
    for (std::size_t i = 0; i < kNumLabels; ++i) d.p[i] = masses[i] / s;
    return d;
  }

  friend bool operator==(const IntentDistribution&, const IntentDistribution&) = default;
};

inline bool is_valid_distribution(const IntentDistribution& d) {
  double s = 0.0;
  for (double x : d.p) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    s += x;
  }
  return std::abs(s - 1.0) <= 1e-9;
}

// Highest-probability label; ties resolve to the lowest canonical index.
inline IntentLabel argmax_label(const IntentDistribution& d) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumLabels; ++i) {
    if (d.p[i] > d.p[best]) best = i;
  }
  return static_cast<IntentLabel>(best);
}

// One retained 3-second clip: identifiers, context, label and the two
// modality feature vectors (already standardized clip-level descriptors).
struct ClipRecord {
  std::string clip_id;
  std::string video_id;
  ContextState context = ContextState::NEUTRAL;
  IntentLabel label = IntentLabel::IDLE;
  std::vector<double> pose_features;
  std::vector<double> audio_features;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

using FeasibilityMap = std::map<ContextState, std::set<IntentLabel>>;

// Context feasibility structure: goal labels occur only in their context,
// IDLE is feasible everywhere.
inline FeasibilityMap canonical_feasibility() {
  return {
      {ContextState::NEAR_BOWL, {IntentLabel::FOOD, IntentLabel::IDLE}},
      {ContextState::NEAR_DOOR, {IntentLabel::EXIT, IntentLabel::IDLE}},
      {ContextState::NEUTRAL, {IntentLabel::IDLE}},
  };
}

struct Dataset {
  std::vector<ClipRecord> clips;
  int d_pose = 0;
  int d_audio = 0;
  FeasibilityMap feasibility = canonical_feasibility();

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ValidationIssue {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::string message;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationSummary {
  // counts[context][label]
  std::array<std::array<std::int64_t, kNumLabels>, kNumContexts> counts{};
  std::vector<ValidationIssue> issues;

  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& i : issues) n += i.severity == ValidationIssue::Severity::Error;
    return n;
  }
  std::size_t warning_count() const { return issues.size() - error_count(); }
  bool ok() const { return error_count() == 0; }
};

// Checks clip_id uniqueness, feature finiteness/width and feasibility
// membership. Feasibility violations are warnings; the rest are errors.
inline ValidationSummary validate_dataset(const Dataset& ds) {
  ValidationSummary summary;
  std::unordered_set<std::string_view> seen_ids;
  for (const ClipRecord& clip : ds.clips) {
    summary.counts[index_of(clip.context)][index_of(clip.label)] += 1;

    if (!seen_ids.insert(clip.clip_id).second) {
      summary.issues.push_back({ValidationIssue::Severity::Error,
                                "duplicate clip_id '" + clip.clip_id + "'"});
    }
    if (clip.pose_features.size() != static_cast<std::size_t>(ds.d_pose) ||
        clip.audio_features.size() != static_cast<std::size_t>(ds.d_audio)) {
      summary.issues.push_back({ValidationIssue::Severity::Error,
                                "clip '" + clip.clip_id + "': feature width differs from dataset dims"});
    }
    auto finite = [](const std::vector<double>& v) {
      for (double x : v) {
        if (!std::isfinite(x)) return false;
      }
      return true;
    };
    if (!finite(clip.pose_features) || !finite(clip.audio_features)) {
      summary.issues.push_back({ValidationIssue::Severity::Error,
                                "clip '" + clip.clip_id + "': non-finite feature value"});
    }
    auto feas = ds.feasibility.find(clip.context);
    if (feas == ds.feasibility.end() || feas->second.count(clip.label) == 0) {
      std::ostringstream msg;
      msg << "feasibility violation: clip '" << clip.clip_id << "' has label "
          << to_token(clip.label) << " in context " << to_token(clip.context);
      summary.issues.push_back({ValidationIssue::Severity::Warning, msg.str()});
    }
  }
  return summary;
}

// Throws DataError on the first error-severity issue.
inline void ensure_valid(const Dataset& ds) {
  const ValidationSummary summary = validate_dataset(ds);
  for (const auto& issue : summary.issues) {
    if (issue.severity == ValidationIssue::Severity::Error) {
      throw DataError("invalid dataset: " + issue.message);
    }
  }
}

}  // namespace ctxpoe
