#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctxpoe/eval.hpp"
#include "ctxpoe/io.hpp"
#include "ctxpoe/synthgen.hpp"
#include "ctxpoe/version.hpp"

namespace ctxpoe {

// ordered_json keeps insertion order, so serialized artifacts are
// byte-stable across runs.
using json = nlohmann::ordered_json;

inline json to_json(const TrainConfig& cfg) {
  return json{{"l2_strength", cfg.l2_strength},
              {"learning_rate", cfg.learning_rate},
              {"max_epochs", cfg.max_epochs},
              {"convergence_tol", cfg.convergence_tol},
              {"seed", cfg.seed}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.l2_strength = j.at("l2_strength").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.convergence_tol = j.at("convergence_tol").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline json to_json(const FusionConfig& cfg) {
  json j{{"method", std::string(to_token(cfg.method))}, {"alpha", cfg.alpha}};
  if (cfg.late_weights) {
    j["late_weights"] = std::vector<double>(cfg.late_weights->begin(), cfg.late_weights->end());
  } else {
    j["late_weights"] = nullptr;
  }
  return j;
}

inline FusionConfig fusion_config_from_json(const json& j) {
  FusionConfig cfg;
  cfg.method = parse_method(j.at("method").get<std::string>());
  cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("late_weights") && !j.at("late_weights").is_null()) {
    const std::vector<double> w = j.at("late_weights").get<std::vector<double>>();
    if (w.size() != 3) throw DataError("late_weights must have 3 entries");
    cfg.late_weights = std::array<double, 3>{w[0], w[1], w[2]};
  }
  return cfg;
}

inline json to_json(const ClipPrediction& r) {
  return json{{"clip_id", r.clip_id},
              {"video_id", r.video_id},
              {"context", std::string(to_token(r.context))},
              {"true_label", std::string(to_token(r.truth))},
              {"predicted_label", std::string(to_token(r.predicted))},
              {"p", std::vector<double>(r.dist.p.begin(), r.dist.p.end())},
              {"confidence", r.confidence},
              {"degenerate", r.degenerate}};
}

inline ClipPrediction clip_prediction_from_json(const json& j) {
  ClipPrediction r;
  r.clip_id = j.at("clip_id").get<std::string>();
  r.video_id = j.at("video_id").get<std::string>();
  r.context = parse_context(j.at("context").get<std::string>());
  r.truth = parse_label(j.at("true_label").get<std::string>());
  r.predicted = parse_label(j.at("predicted_label").get<std::string>());
  const std::vector<double> p = j.at("p").get<std::vector<double>>();
  if (p.size() != kNumLabels) throw DataError("clip prediction: p must have 3 entries");
  std::copy(p.begin(), p.end(), r.dist.p.begin());
  r.confidence = j.at("confidence").get<double>();
  r.degenerate = j.at("degenerate").get<bool>();
  return r;
}

inline json to_json(const FoldResult& fold) {
  json clips = json::array();
  for (const ClipPrediction& r : fold.clips) clips.push_back(to_json(r));
  json j{{"held_out_video_id", fold.held_out_video_id},
         {"fold_accuracy", fold.fold_accuracy},
         {"selected_l2", fold.selected_l2},
         {"train_clips_seen", fold.train_clips_seen},
         {"leaked_train_clips", fold.leaked_train_clips},
         {"clips", std::move(clips)}};
  if (fold.fitted_late_weights) {
    j["fitted_late_weights"] = std::vector<double>(fold.fitted_late_weights->begin(),
                                                   fold.fitted_late_weights->end());
  } else {
    j["fitted_late_weights"] = nullptr;
  }
  return j;
}

inline FoldResult fold_result_from_json(const json& j) {
  FoldResult fold;
  fold.held_out_video_id = j.at("held_out_video_id").get<std::string>();
  fold.fold_accuracy = j.at("fold_accuracy").get<double>();
  fold.selected_l2 = j.at("selected_l2").get<std::map<std::string, double>>();
  fold.train_clips_seen = j.at("train_clips_seen").get<std::uint64_t>();
  fold.leaked_train_clips = j.at("leaked_train_clips").get<std::uint64_t>();
  for (const json& c : j.at("clips")) fold.clips.push_back(clip_prediction_from_json(c));
  if (!j.at("fitted_late_weights").is_null()) {
    const std::vector<double> w = j.at("fitted_late_weights").get<std::vector<double>>();
    if (w.size() != 3) throw DataError("fitted_late_weights must have 3 entries");
    fold.fitted_late_weights = std::array<double, 3>{w[0], w[1], w[2]};
  }
  return fold;
}

inline json to_json(const EvalReport& report) {
  json folds = json::array();
  for (const FoldResult& fold : report.folds) folds.push_back(to_json(fold));
  return json{{"format", "ctxpoe_report_v1"},
              {"method", to_json(report.method)},
              {"train_config", to_json(report.train_config)},
              {"l2_grid", report.l2_grid},
              {"seed", report.seed},
              {"dataset_fingerprint", report.dataset_fingerprint},
              {"manifest", report.manifest},
              {"aggregates",
               json{{"mean_fold_accuracy", report.mean_fold_accuracy},
                    {"std_fold_accuracy", report.std_fold_accuracy},
                    {"pooled_accuracy", report.pooled_accuracy},
                    {"pooled_macro_f1", report.pooled_macro_f1},
                    {"degenerate_fusion_count", report.degenerate_fusion_count},
                    {"train_clips_seen", report.train_clips_seen},
                    {"leaked_train_clips", report.leaked_train_clips}}},
              {"folds", std::move(folds)}};
}

inline EvalReport eval_report_from_json(const json& j) {
  if (j.at("format").get<std::string>() != "ctxpoe_report_v1") {
    throw DataError("unknown report format");
  }
  EvalReport report;
  report.method = fusion_config_from_json(j.at("method"));
  report.train_config = train_config_from_json(j.at("train_config"));
  report.l2_grid = j.at("l2_grid").get<std::vector<double>>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  report.manifest = j.at("manifest").get<std::string>();
  const json& agg = j.at("aggregates");
  report.mean_fold_accuracy = agg.at("mean_fold_accuracy").get<double>();
  report.std_fold_accuracy = agg.at("std_fold_accuracy").get<double>();
  report.pooled_accuracy = agg.at("pooled_accuracy").get<double>();
  report.pooled_macro_f1 = agg.at("pooled_macro_f1").get<double>();
  report.degenerate_fusion_count = agg.at("degenerate_fusion_count").get<std::int64_t>();
  report.train_clips_seen = agg.at("train_clips_seen").get<std::uint64_t>();
  report.leaked_train_clips = agg.at("leaked_train_clips").get<std::uint64_t>();
  for (const json& f : j.at("folds")) report.folds.push_back(fold_result_from_json(f));
  return report;
}

inline std::string eval_report_to_string(const EvalReport& report) {
  return to_json(report).dump(2) + "\n";
}

inline EvalReport eval_report_from_string(std::string_view text) {
  return eval_report_from_json(json::parse(text));
}

// ---------------------------------------------------------------------------
// Generator config JSON.
// ---------------------------------------------------------------------------

inline json to_json(const GenConfig& cfg) {
  json intent = json::object();
  for (ContextState c : all_contexts()) {
    json row = json::object();
    auto it = cfg.intent_given_context.find(c);
    if (it != cfg.intent_given_context.end()) {
      for (IntentLabel y : all_labels()) {
        auto py = it->second.find(y);
        if (py != it->second.end()) row[std::string(to_token(y))] = py->second;
      }
    }
    intent[std::string(to_token(c))] = std::move(row);
  }
  json ctx = json::object();
  for (ContextState c : all_contexts()) {
    ctx[std::string(to_token(c))] = cfg.context_probs[index_of(c)];
  }
  return json{{"seed", cfg.seed},
              {"n_videos", cfg.n_videos},
              {"clips_per_video", std::array<int, 2>{cfg.clips_per_video_min,
                                                     cfg.clips_per_video_max}},
              {"context_probs", std::move(ctx)},
              {"intent_given_context", std::move(intent)},
              {"d_pose", cfg.d_pose},
              {"d_audio", cfg.d_audio},
              {"pose_separation", cfg.pose_separation},
              {"audio_separation", cfg.audio_separation},
              {"video_effect_scale", cfg.video_effect_scale},
              {"noise_scale", cfg.noise_scale}};
}

inline GenConfig gen_config_from_json(const json& j) {
  GenConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.n_videos = j.at("n_videos").get<int>();
  const std::array<int, 2> range = j.at("clips_per_video").get<std::array<int, 2>>();
  cfg.clips_per_video_min = range[0];
  cfg.clips_per_video_max = range[1];
  const json& ctx = j.at("context_probs");
  for (ContextState c : all_contexts()) {
    cfg.context_probs[index_of(c)] = ctx.at(std::string(to_token(c))).get<double>();
  }
  cfg.intent_given_context.clear();
  const json& intent = j.at("intent_given_context");
  for (ContextState c : all_contexts()) {
    std::map<IntentLabel, double> row;
    const json& jrow = intent.at(std::string(to_token(c)));
    for (auto it = jrow.begin(); it != jrow.end(); ++it) {
      row[parse_label(it.key())] = it.value().get<double>();
    }
    cfg.intent_given_context[c] = std::move(row);
  }
  cfg.d_pose = j.at("d_pose").get<int>();
  cfg.d_audio = j.at("d_audio").get<int>();
  cfg.pose_separation = j.at("pose_separation").get<double>();
  cfg.audio_separation = j.at("audio_separation").get<double>();
  cfg.video_effect_scale = j.at("video_effect_scale").get<double>();
  cfg.noise_scale = j.at("noise_scale").get<double>();
  return cfg;
}

inline std::string gen_config_to_string(const GenConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

inline GenConfig gen_config_from_string(std::string_view text) {
  try {
    return gen_config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid generator config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run manifests. Every command writes one; emitted artifacts carry its file
// name so any output can be traced to the exact configuration and dataset.
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  json config = json::object();
  std::vector<std::string> outputs;
};

inline json to_json(const RunManifest& m) {
  return json{{"tool", kToolName},        {"version", kToolVersion},
              {"command", m.command},     {"seed", m.seed},
              {"dataset_fingerprint", m.dataset_fingerprint},
              {"config", m.config},       {"outputs", m.outputs}};
}

inline std::string manifest_to_string(const RunManifest& m) {
  return to_json(m).dump(2) + "\n";
}

}  // namespace ctxpoe
