#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ctxpoe/eval.hpp"
#include "ctxpoe/io.hpp"
#include "ctxpoe/synthgen.hpp"

#include "oracles.hpp"

using namespace ctxpoe;

TEST_CASE("generation is deterministic given the seed") {
  GenConfig cfg;
  cfg.seed = 99;
  cfg.n_videos = 8;
  const Dataset a = generate_dataset(cfg);
  const Dataset b = generate_dataset(cfg);
  CHECK(a == b);
  CHECK(emit_dataset_csv(a) == emit_dataset_csv(b));

  GenConfig other = cfg;
  other.seed = 100;
  CHECK(generate_dataset(other) != a);
}

TEST_CASE("generated labels respect feasibility exactly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 77ull}) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.n_videos = 12;
    const Dataset ds = generate_dataset(cfg);
    const FeasibilityMap feasibility = canonical_feasibility();
    for (const ClipRecord& clip : ds.clips) {
      CHECK(feasibility.at(clip.context).count(clip.label) == 1);
    }
    const ValidationSummary summary = validate_dataset(ds);
    CHECK(summary.issues.empty());
  }
}

TEST_CASE("every neutral clip is IDLE under the default config") {
  GenConfig cfg;
  cfg.seed = 4;
  const Dataset ds = generate_dataset(cfg);
  for (const ClipRecord& clip : ds.clips) {
    if (clip.context == ContextState::NEUTRAL) CHECK(clip.label == IntentLabel::IDLE);
  }
}

TEST_CASE("clip ids are unique and video count matches") {
  GenConfig cfg;
  cfg.seed = 21;
  cfg.n_videos = 15;
  const Dataset ds = generate_dataset(cfg);
  std::set<std::string> ids, vids;
  for (const ClipRecord& clip : ds.clips) {
    ids.insert(clip.clip_id);
    vids.insert(clip.video_id);
  }
  CHECK(ids.size() == ds.clips.size());
  CHECK(vids.size() == 15);
  for (const ClipRecord& clip : ds.clips) {
    CHECK(clip.pose_features.size() == static_cast<std::size_t>(cfg.d_pose));
    CHECK(clip.audio_features.size() == static_cast<std::size_t>(cfg.d_audio));
  }
}

TEST_CASE("infeasible intent configuration is rejected") {
  GenConfig cfg;
  cfg.intent_given_context[ContextState::NEUTRAL] = {{IntentLabel::FOOD, 0.5},
                                                     {IntentLabel::IDLE, 0.5}};
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);

  GenConfig bad_range;
  bad_range.clips_per_video_min = 5;
  bad_range.clips_per_video_max = 4;
  CHECK_THROWS_AS(generate_dataset(bad_range), ConfigError);

  GenConfig bad_sep;
  bad_sep.pose_separation = -0.5;
  CHECK_THROWS_AS(generate_dataset(bad_sep), ConfigError);
}

TEST_CASE("context frequencies converge to context_probs") {
  GenConfig cfg;
  cfg.seed = 8;
  cfg.n_videos = 100;
  cfg.clips_per_video_min = 100;
  cfg.clips_per_video_max = 100;
  cfg.d_pose = 1;
  cfg.d_audio = 1;
  const Dataset ds = generate_dataset(cfg);
  REQUIRE(ds.clips.size() == 10000);
  std::array<std::int64_t, 3> counts{};
  for (const ClipRecord& clip : ds.clips) counts[index_of(clip.context)] += 1;
  const double n = static_cast<double>(ds.clips.size());
  for (ContextState c : all_contexts()) {
    const double p = cfg.context_probs[index_of(c)];
    const double freq = static_cast<double>(counts[index_of(c)]) / n;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(freq - p) <= 3.0 * sigma);
  }
}

TEST_CASE("uninformative features fall back to the baseline rates") {
  GenConfig cfg;
  cfg.seed = 15;
  cfg.n_videos = 15;
  cfg.clips_per_video_min = 10;
  cfg.clips_per_video_max = 10;
  cfg.d_pose = 2;
  cfg.d_audio = 3;
  cfg.pose_separation = 0.0;
  cfg.audio_separation = 0.0;
  cfg.video_effect_scale = 0.0;
  const Dataset ds = generate_dataset(cfg);

  EvalOptions opts;
  opts.l2_grid = {1e-2};
  opts.workers = 2;

  // Featureless experts collapse to the train-majority rule.
  const double majority = oracles::majority_baseline_pooled_accuracy(ds);
  for (Method m : {Method::POSE_ONLY, Method::AUDIO_ONLY}) {
    FusionConfig cfg_m;
    cfg_m.method = m;
    const EvalReport report = run_lovo(ds, cfg_m, TrainConfig{}, opts);
    CHECK(std::abs(report.pooled_accuracy - majority) <= 0.05);
  }

  // The context prior collapses to the per-context majority rule.
  const double ctx_majority = oracles::context_majority_baseline_pooled_accuracy(ds);
  FusionConfig ctx_cfg;
  ctx_cfg.method = Method::CONTEXT_ONLY;
  const EvalReport ctx_report = run_lovo(ds, ctx_cfg, TrainConfig{}, opts);
  CHECK(std::abs(ctx_report.pooled_accuracy - ctx_majority) <= 0.05);
}

TEST_CASE("raising audio separation does not hurt audio-only accuracy") {
  const GenConfig base = paperlike_config();
  GenConfig more = base;
  more.audio_separation = base.audio_separation + 1.0;

  EvalOptions opts;
  opts.l2_grid = {1e-2};
  opts.workers = 2;
  FusionConfig cfg;
  cfg.method = Method::AUDIO_ONLY;

  const double acc_base = run_lovo(generate_dataset(base), cfg, TrainConfig{}, opts).pooled_accuracy;
  const double acc_more = run_lovo(generate_dataset(more), cfg, TrainConfig{}, opts).pooled_accuracy;
  CHECK(acc_more >= acc_base - 0.02);
}

TEST_CASE("paperlike benchmark structural contract") {
  const Dataset ds = paperlike_benchmark();

  // Scale: clip count within 10% of 212.
  CHECK(ds.clips.size() >= 191);
  CHECK(ds.clips.size() <= 233);

  // Both ambiguous contexts contain both of their feasible labels, with an
  // IDLE share in 35-65%.
  for (ContextState c : {ContextState::NEAR_BOWL, ContextState::NEAR_DOOR}) {
    std::int64_t idle = 0, goal = 0;
    for (const ClipRecord& clip : ds.clips) {
      if (clip.context != c) continue;
      (clip.label == IntentLabel::IDLE ? idle : goal) += 1;
    }
    CHECK(idle > 0);
    CHECK(goal > 0);
    const double share = static_cast<double>(idle) / static_cast<double>(idle + goal);
    CHECK(share >= 0.35);
    CHECK(share <= 0.65);
  }

  // Strict feasibility and a clean validation.
  CHECK(validate_dataset(ds).issues.empty());
}
