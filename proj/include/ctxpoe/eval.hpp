#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ctxpoe/domain.hpp"
#include "ctxpoe/experts.hpp"
#include "ctxpoe/fusion.hpp"
#include "ctxpoe/numeric.hpp"
#include "ctxpoe/rng.hpp"

namespace ctxpoe {

// One held-out clip's outcome.
struct ClipPrediction {
  std::string clip_id;
  std::string video_id;
  ContextState context = ContextState::NEUTRAL;
  IntentLabel truth = IntentLabel::IDLE;
  IntentLabel predicted = IntentLabel::IDLE;
  IntentDistribution dist;
  double confidence = 0.0;  // max posterior component
  bool degenerate = false;

  friend bool operator==(const ClipPrediction&, const ClipPrediction&) = default;
};

struct FoldResult {
  std::string held_out_video_id;
  std::vector<ClipPrediction> clips;
  double fold_accuracy = 0.0;
  std::map<std::string, double> selected_l2;  // modality tag -> l2 used
  std::optional<std::array<double, 3>> fitted_late_weights;
  // Instrumentation: every clip fed into any training structure is counted;
  // leaked counts those matching the held-out video_id.
  std::uint64_t train_clips_seen = 0;
  std::uint64_t leaked_train_clips = 0;

  friend bool operator==(const FoldResult&, const FoldResult&) = default;
};

struct EvalReport {
  FusionConfig method;
  TrainConfig train_config;
  std::vector<double> l2_grid;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::string manifest;  // name of the run manifest that produced this report
  std::vector<FoldResult> folds;
  double mean_fold_accuracy = 0.0;
  double std_fold_accuracy = 0.0;  // population std across folds
  double pooled_accuracy = 0.0;
  double pooled_macro_f1 = 0.0;
  std::int64_t degenerate_fusion_count = 0;
  std::uint64_t train_clips_seen = 0;
  std::uint64_t leaked_train_clips = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// One fold per distinct video_id, ordered by video_id; test indices are that
// video's clips, train indices all others.
struct LovoFold {
  std::string video_id;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

inline std::vector<LovoFold> lovo_split(const Dataset& ds) {
  std::map<std::string, std::vector<std::size_t>> by_video;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    by_video[ds.clips[i].video_id].push_back(i);
  }
  if (by_video.size() < 2) {
    throw DataError("lovo_split: need at least 2 distinct video_ids, got " +
                    std::to_string(by_video.size()));
  }
  std::vector<LovoFold> folds;
  folds.reserve(by_video.size());
  for (const auto& [vid, test_idx] : by_video) {
    LovoFold fold;
    fold.video_id = vid;
    fold.test_indices = test_idx;
    for (std::size_t i = 0; i < ds.clips.size(); ++i) {
      if (ds.clips[i].video_id != vid) fold.train_indices.push_back(i);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

// Unweighted mean of per-class F1. A class with no true and no predicted
// instances contributes 0.
inline double macro_f1(std::span<const std::pair<IntentLabel, IntentLabel>> pairs) {
  if (pairs.empty()) throw DataError("macro_f1: empty prediction set");
  std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> confusion{};  // [true][pred]
  for (const auto& [truth, pred] : pairs) {
    confusion[index_of(truth)][index_of(pred)] += 1;
  }
  double sum_f1 = 0.0;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    std::int64_t tp = confusion[k][k];
    std::int64_t fn = 0, fp = 0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      if (j != k) {
        fn += confusion[k][j];
        fp += confusion[j][k];
      }
    }
    const std::int64_t denom = 2 * tp + fp + fn;
    sum_f1 += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum_f1 / static_cast<double>(kNumLabels);
}

struct EvalOptions {
  std::vector<double> l2_grid{1e-3, 1e-2, 1e-1};
  double prior_pseudo_count = kDefaultPriorPseudoCount;
  int inner_cv_groups = 5;
  int workers = 1;
};

namespace detail {

struct LeakProbe {
  const std::string* held_out = nullptr;
  std::uint64_t seen = 0;
  std::uint64_t leaked = 0;

  void see(const ClipRecord& clip) {
    ++seen;
    if (clip.video_id == *held_out) ++leaked;
  }
};

inline FeatureMatrix gather_features(const Dataset& ds, std::span<const std::size_t> idx,
                                     const std::string& tag, LeakProbe& probe) {
  std::vector<std::vector<double>> rows;
  rows.reserve(idx.size());
  for (std::size_t i : idx) {
    const ClipRecord& clip = ds.clips[i];
    probe.see(clip);
    if (tag == "pose") {
      rows.push_back(clip.pose_features);
    } else if (tag == "audio") {
      rows.push_back(clip.audio_features);
    } else {
      rows.push_back(build_concat_features(clip));
    }
  }
  return FeatureMatrix::from_rows(rows);
}

inline std::vector<IntentLabel> gather_labels(const Dataset& ds,
                                              std::span<const std::size_t> idx) {
  std::vector<IntentLabel> y;
  y.reserve(idx.size());
  for (std::size_t i : idx) y.push_back(ds.clips[i].label);
  return y;
}

// Inner grouped CV over the training videos: distinct video_ids are sorted
// and assigned round-robin to at most opts.inner_cv_groups groups. Selection
// maximizes pooled held-out accuracy; ties keep the earliest grid entry.
// Falls back to cfg.l2_strength when fewer than 2 groups are available or
// the grid has a single entry.
inline double select_l2(const Dataset& ds, std::span<const std::size_t> train_idx,
                        const std::string& tag, const TrainConfig& cfg,
                        const EvalOptions& opts, LeakProbe& probe,
                        std::uint64_t& trainings) {
  if (opts.l2_grid.empty()) throw ConfigError("EvalOptions: empty l2_grid");
  if (opts.l2_grid.size() == 1) return opts.l2_grid.front();

  std::vector<std::string> vids;
  for (std::size_t i : train_idx) {
    const std::string& v = ds.clips[i].video_id;
    if (std::find(vids.begin(), vids.end(), v) == vids.end()) vids.push_back(v);
  }
  std::sort(vids.begin(), vids.end());
  const std::size_t n_groups =
      std::min<std::size_t>(static_cast<std::size_t>(opts.inner_cv_groups), vids.size());
  if (n_groups < 2) return cfg.l2_strength;

  std::map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < vids.size(); ++i) group_of[vids[i]] = i % n_groups;

  double best_l2 = opts.l2_grid.front();
  double best_acc = -1.0;
  for (double l2 : opts.l2_grid) {
    std::int64_t correct = 0, total = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      std::vector<std::size_t> inner_train, inner_val;
      for (std::size_t i : train_idx) {
        (group_of[ds.clips[i].video_id] == g ? inner_val : inner_train).push_back(i);
      }
      if (inner_train.empty() || inner_val.empty()) continue;
      const FeatureMatrix x = gather_features(ds, inner_train, tag, probe);
      const std::vector<IntentLabel> y = gather_labels(ds, inner_train);
      TrainConfig inner_cfg = cfg;
      inner_cfg.l2_strength = l2;
      const LogisticExpert expert = train_logistic_expert(x, y, inner_cfg, tag).expert;
      ++trainings;
      for (std::size_t i : inner_val) {
        const ClipRecord& clip = ds.clips[i];
        const std::vector<double> features = tag == "pose"    ? clip.pose_features
                                             : tag == "audio" ? clip.audio_features
                                                              : build_concat_features(clip);
        correct += argmax_label(expert.predict(features)) == clip.label;
        ++total;
      }
    }
    const double acc = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    if (acc > best_acc) {
      best_acc = acc;
      best_l2 = l2;
    }
  }
  return best_l2;
}

struct FoldArtifacts {
  MethodBundle bundle;
  std::map<std::string, double> selected_l2;
  std::uint64_t train_clips_seen = 0;
  std::uint64_t leaked = 0;
  std::uint64_t trainings = 0;
};

inline FoldArtifacts build_fold_artifacts(const Dataset& ds, const LovoFold& fold,
                                          const MethodNeeds& needs, const TrainConfig& base_cfg,
                                          const EvalOptions& opts) {
  FoldArtifacts art;
  LeakProbe probe;
  probe.held_out = &fold.video_id;

  TrainConfig cfg = base_cfg;
  cfg.seed = derive_seed(base_cfg.seed, fold.video_id);

  if (needs.prior) {
    std::array<std::array<std::int64_t, kNumLabels>, kNumContexts> counts{};
    for (std::size_t i : fold.train_indices) {
      const ClipRecord& clip = ds.clips[i];
      probe.see(clip);
      counts[index_of(clip.context)][index_of(clip.label)] += 1;
    }
    art.bundle.prior = fit_context_prior_from_counts(counts, opts.prior_pseudo_count);
  }

  auto train_expert = [&](const std::string& tag) {
    const double l2 = select_l2(ds, fold.train_indices, tag, cfg, opts, probe, art.trainings);
    const FeatureMatrix x = gather_features(ds, fold.train_indices, tag, probe);
    const std::vector<IntentLabel> y = gather_labels(ds, fold.train_indices);
    TrainConfig final_cfg = cfg;
    final_cfg.l2_strength = l2;
    ++art.trainings;
    art.selected_l2[tag] = l2;
    return train_logistic_expert(x, y, final_cfg, tag).expert;
  };

  if (needs.pose) art.bundle.pose = train_expert("pose");
  if (needs.audio) art.bundle.audio = train_expert("audio");
  if (needs.concat) art.bundle.concat = train_expert("concat");

  if (needs.late_weights) {
    std::vector<ExpertTriple> triples;
    std::vector<IntentLabel> labels;
    triples.reserve(fold.train_indices.size());
    for (std::size_t i : fold.train_indices) {
      const ClipRecord& clip = ds.clips[i];
      probe.see(clip);
      triples.push_back(ExpertTriple{art.bundle.prior->row(clip.context),
                                     art.bundle.pose->predict(clip.pose_features),
                                     art.bundle.audio->predict(clip.audio_features)});
      labels.push_back(clip.label);
    }
    art.bundle.late_weights = fit_late_weights(triples, labels);
  }

  art.train_clips_seen = probe.seen;
  art.leaked = probe.leaked;
  return art;
}

inline FoldResult predict_fold(const Dataset& ds, const LovoFold& fold,
                               const FusionConfig& cfg, const FoldArtifacts& art,
                               const MethodNeeds& needs) {
  FoldResult result;
  result.held_out_video_id = fold.video_id;
  result.train_clips_seen = art.train_clips_seen;
  result.leaked_train_clips = art.leaked;
  for (const auto& [tag, l2] : art.selected_l2) {
    const bool used = (tag == "pose" && needs.pose) || (tag == "audio" && needs.audio) ||
                      (tag == "concat" && needs.concat);
    if (used) result.selected_l2[tag] = l2;
  }
  if (needs.late_weights && !cfg.late_weights) {
    result.fitted_late_weights = art.bundle.late_weights;
  }

  std::int64_t correct = 0;
  result.clips.reserve(fold.test_indices.size());
  for (std::size_t i : fold.test_indices) {
    const ClipRecord& clip = ds.clips[i];
    const FusionResult fused = predict_method(cfg, art.bundle, clip);
    ClipPrediction pred;
    pred.clip_id = clip.clip_id;
    pred.video_id = clip.video_id;
    pred.context = clip.context;
    pred.truth = clip.label;
    pred.predicted = argmax_label(fused.dist);
    pred.dist = fused.dist;
    pred.confidence = *std::max_element(fused.dist.p.begin(), fused.dist.p.end());
    pred.degenerate = fused.degenerate;
    correct += pred.predicted == pred.truth;
    result.clips.push_back(std::move(pred));
  }
  result.fold_accuracy = fold.test_indices.empty()
                             ? 0.0
                             : static_cast<double>(correct) /
                                   static_cast<double>(fold.test_indices.size());
  return result;
}

}  // namespace detail

struct MultiEvalResult {
  std::vector<EvalReport> reports;  // one per input config, same order
  std::uint64_t expert_trainings = 0;
};

// Evaluates several fusion configs in one LOVO pass. Per fold, the union of
// required training structures is built once on the training clips only and
// reused across configs; this is what makes alpha sweeps cheap. Results are
// deterministic given the seed and independent of the worker count.
inline MultiEvalResult run_lovo_multi(const Dataset& ds, std::span<const FusionConfig> cfgs,
                                      const TrainConfig& train_cfg,
                                      const EvalOptions& opts = {}) {
  if (cfgs.empty()) throw ConfigError("run_lovo_multi: no configs");
  for (const FusionConfig& cfg : cfgs) cfg.validate();
  train_cfg.validate();
  ensure_valid(ds);

  const std::vector<LovoFold> folds = lovo_split(ds);

  MethodNeeds needs;
  for (const FusionConfig& cfg : cfgs) {
    const MethodNeeds n = method_needs(cfg.method);
    needs.prior |= n.prior;
    needs.pose |= n.pose;
    needs.audio |= n.audio;
    needs.concat |= n.concat;
    needs.late_weights |= n.late_weights && !cfg.late_weights;
  }

  // fold_results[fold][cfg]
  std::vector<std::vector<FoldResult>> fold_results(folds.size());
  std::vector<std::uint64_t> fold_trainings(folds.size(), 0);
  std::atomic<std::size_t> next_fold{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t f = next_fold.fetch_add(1);
      if (f >= folds.size()) return;
      try {
        const detail::FoldArtifacts art =
            detail::build_fold_artifacts(ds, folds[f], needs, train_cfg, opts);
        fold_trainings[f] = art.trainings;
        fold_results[f].reserve(cfgs.size());
        for (const FusionConfig& cfg : cfgs) {
          fold_results[f].push_back(
              detail::predict_fold(ds, folds[f], cfg, art, method_needs(cfg.method)));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          try {
            std::throw_with_nested(
                DataError("fold '" + folds[f].video_id + "' failed"));
          } catch (...) {
            first_error = std::current_exception();
          }
        }
        return;
      }
    }
  };

  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(opts.workers),
                                                     folds.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  MultiEvalResult out;
  for (std::uint64_t t : fold_trainings) out.expert_trainings += t;
  out.reports.reserve(cfgs.size());
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    EvalReport report;
    report.method = cfgs[c];
    report.train_config = train_cfg;
    report.l2_grid = opts.l2_grid;
    report.seed = train_cfg.seed;

    std::vector<double> fold_accs;
    std::vector<std::pair<IntentLabel, IntentLabel>> pooled_pairs;
    std::int64_t pooled_correct = 0, pooled_total = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const FoldResult& fr = fold_results[f][c];
      fold_accs.push_back(fr.fold_accuracy);
      for (const ClipPrediction& pred : fr.clips) {
        pooled_pairs.emplace_back(pred.truth, pred.predicted);
        pooled_correct += pred.predicted == pred.truth;
        ++pooled_total;
        report.degenerate_fusion_count += pred.degenerate;
      }
      report.train_clips_seen += fr.train_clips_seen;
      report.leaked_train_clips += fr.leaked_train_clips;
      report.folds.push_back(fr);
    }
    report.mean_fold_accuracy = mean_of(fold_accs);
    report.std_fold_accuracy = population_std(fold_accs);
    report.pooled_accuracy =
        pooled_total == 0 ? 0.0
                          : static_cast<double>(pooled_correct) / static_cast<double>(pooled_total);
    report.pooled_macro_f1 = macro_f1(pooled_pairs);
    out.reports.push_back(std::move(report));
  }
  return out;
}

inline EvalReport run_lovo(const Dataset& ds, const FusionConfig& cfg,
                           const TrainConfig& train_cfg, const EvalOptions& opts = {}) {
  const std::array<FusionConfig, 1> cfgs{cfg};
  return std::move(run_lovo_multi(ds, cfgs, train_cfg, opts).reports.front());
}

struct AlphaRow {
  double alpha = 0.0;
  double mean_fold_accuracy = 0.0;
  double std_fold_accuracy = 0.0;
  double pooled_macro_f1 = 0.0;

  friend bool operator==(const AlphaRow&, const AlphaRow&) = default;
};

inline constexpr std::array<double, 6> kDefaultAlphaGrid{0.0, 0.3, 0.5, 0.8, 1.0, 1.2};

struct AlphaSweepResult {
  std::vector<AlphaRow> rows;
  std::vector<EvalReport> reports;  // one POE_FULL report per alpha
  std::uint64_t expert_trainings = 0;
};

// One POE_FULL evaluation per alpha. Experts are trained once per fold and
// shared across the whole grid; alpha enters only at fusion time.
inline AlphaSweepResult alpha_sweep(const Dataset& ds, std::span<const double> alphas,
                                    const TrainConfig& train_cfg,
                                    const EvalOptions& opts = {}) {
  if (alphas.empty()) throw ConfigError("alpha_sweep: empty alpha grid");
  std::vector<FusionConfig> cfgs;
  cfgs.reserve(alphas.size());
  for (double a : alphas) {
    FusionConfig cfg;
    cfg.method = Method::POE_FULL;
    cfg.alpha = a;
    cfgs.push_back(cfg);
  }
  MultiEvalResult multi = run_lovo_multi(ds, cfgs, train_cfg, opts);
  AlphaSweepResult out;
  out.expert_trainings = multi.expert_trainings;
  out.reports = std::move(multi.reports);
  out.rows.reserve(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    out.rows.push_back(AlphaRow{alphas[i], out.reports[i].mean_fold_accuracy,
                                out.reports[i].std_fold_accuracy,
                                out.reports[i].pooled_macro_f1});
  }
  return out;
}

// All out-of-fold predictions in fold order; the flat per-clip table the
// analysis module consumes.
inline std::vector<ClipPrediction> pooled_predictions(const EvalReport& report) {
  std::vector<ClipPrediction> rows;
  for (const FoldResult& fold : report.folds) {
    rows.insert(rows.end(), fold.clips.begin(), fold.clips.end());
  }
  return rows;
}

}  // namespace ctxpoe
