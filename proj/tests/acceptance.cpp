// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Heavy artifacts (the benchmark LOVO runs and the alpha sweep) are
// computed once and shared by the criteria that read them; the timing line
// of each criterion states what was measured.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctxpoe/ctxpoe.hpp"

#include "oracles.hpp"

using namespace ctxpoe;
namespace fs = std::filesystem;

namespace {

struct Harness {
  int failures = 0;

  void report(int index, const std::string& name, bool ok, double seconds,
              const std::string& detail) {
    std::printf("%s  criterion %d: %s [%.2fs] %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

constexpr double kTol = 1e-12;

bool close_all(const IntentDistribution& a, const IntentDistribution& b, double tol,
               double& worst) {
  bool ok = true;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    const double d = std::abs(a.p[i] - b.p[i]);
    worst = std::max(worst, d);
    ok &= d <= tol;
  }
  return ok;
}

}  // namespace

int main() {
  Harness h;
  const EvalOptions tuned{{1e-3, 1e-2, 1e-1}, kDefaultPriorPseudoCount, 5, 2};

  // --- criterion 1: PoE algebra identities -------------------------------
  {
    Timer t;
    RngStream rng(1001);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const IntentDistribution prior = oracles::random_simplex_point(rng);
      const IntentDistribution pose = oracles::random_simplex_point(rng);
      const IntentDistribution audio = oracles::random_simplex_point(rng);
      const double alpha = 1.5 * rng.uniform01();

      // uniform evidence leaves the prior unchanged
      ok &= close_all(poe_fuse(prior, IntentDistribution::uniform(),
                               IntentDistribution::uniform(), 1.0)
                          .dist,
                      prior, kTol, worst);

      // alpha = 0 removes the prior: independent linear-space product
      std::array<double, 3> masses;
      for (std::size_t i = 0; i < 3; ++i) masses[i] = pose.p[i] * audio.p[i];
      ok &= close_all(poe_fuse(prior, pose, audio, 0.0).dist,
                      IntentDistribution::normalized(masses), kTol, worst);

      // evidence order is irrelevant
      ok &= close_all(poe_fuse(prior, pose, audio, alpha).dist,
                      poe_fuse(prior, audio, pose, alpha).dist, kTol, worst);
    }
    const double secs = t.seconds();
    h.report(1, "PoE algebra identities on 1000 random simplex triples", ok && secs < 1.0, secs,
             "worst_abs_dev=" + fmt(worst));
  }

  // --- criterion 2: gradient correctness ----------------------------------
  {
    Timer t;
    RngStream rng(2002);
    bool ok = true;
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + rng.uniform_index(30);
      const std::size_t d = 1 + rng.uniform_index(10);
      FeatureMatrix x(n, d);
      std::vector<IntentLabel> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x.at(i, j) = rng.normal();
        y[i] = static_cast<IntentLabel>(rng.uniform_index(3));
      }
      std::vector<double> w(3 * d);
      std::array<double, 3> b{};
      for (double& v : w) v = 0.7 * rng.normal();
      for (double& v : b) v = 0.7 * rng.normal();
      const double l2 = trial % 2 == 0 ? 0.0 : 0.03;

      const LossGrad analytic = logistic_loss_grad(x, y, w, b, l2);
      const oracles::FdGrad fd = oracles::finite_difference_gradient(x, y, w, b, l2, 1e-5);
      auto rel = [&](double a, double g) {
        return std::abs(a - g) / std::max({std::abs(a), std::abs(g), 1e-8});
      };
      for (std::size_t k = 0; k < w.size(); ++k) {
        worst_rel = std::max(worst_rel, rel(analytic.grad_weights[k], fd.weights[k]));
      }
      for (std::size_t k = 0; k < 3; ++k) {
        worst_rel = std::max(worst_rel, rel(analytic.grad_bias[k], fd.bias[k]));
      }
      ok &= worst_rel < 1e-4;
    }
    const double secs = t.seconds();
    h.report(2, "analytic gradient matches central differences (20 draws)", ok && secs < 5.0,
             secs, "worst_rel_err=" + fmt(worst_rel));
  }

  // --- criterion 3: metric oracles ----------------------------------------
  {
    Timer t;
    RngStream rng(3003);
    bool ok = true;

    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::pair<IntentLabel, IntentLabel>> pairs;
      const std::size_t n = 1 + rng.uniform_index(40);
      for (std::size_t i = 0; i < n; ++i) {
        pairs.emplace_back(static_cast<IntentLabel>(rng.uniform_index(3)),
                           static_cast<IntentLabel>(rng.uniform_index(3)));
      }
      ok &= macro_f1(pairs) == oracles::macro_f1_bruteforce(pairs);
    }

    // Coverage final point equals plain subset accuracy, exactly.
    std::vector<ClipPrediction> preds;
    int correct = 0;
    for (int i = 0; i < 37; ++i) {
      ClipPrediction r;
      r.clip_id = "c" + std::to_string(i);
      r.context = i % 2 == 0 ? ContextState::NEAR_BOWL : ContextState::NEAR_DOOR;
      r.truth = static_cast<IntentLabel>(rng.uniform_index(3));
      r.predicted = static_cast<IntentLabel>(rng.uniform_index(3));
      r.confidence = rng.uniform01();
      correct += r.truth == r.predicted;
      preds.push_back(r);
    }
    const CoverageCurve curve = accuracy_coverage_curve(preds, "oracle");
    ok &= curve.points.back().coverage == 1.0;
    ok &= curve.points.back().cumulative_accuracy == static_cast<double>(correct) / 37.0;

    // The worked macro-F1 example.
    const std::vector<std::pair<IntentLabel, IntentLabel>> example{
        {IntentLabel::EXIT, IntentLabel::EXIT},
        {IntentLabel::FOOD, IntentLabel::EXIT},
        {IntentLabel::IDLE, IntentLabel::IDLE}};
    const double example_f1 = macro_f1(example);
    ok &= example_f1 == oracles::macro_f1_bruteforce(example);
    ok &= std::abs(example_f1 - 5.0 / 9.0) <= 1e-15;

    h.report(3, "metric oracles (macro-F1, coverage final point, 5/9 example)", ok, t.seconds(),
             "macro_f1_example=" + fmt(example_f1));
  }

  // --- benchmark setup ------------------------------------------------------
  const Dataset benchmark = paperlike_benchmark();
  const std::string fingerprint = dataset_fingerprint(benchmark);

  // --- criterion 4: no leakage, worker-count determinism -------------------
  {
    Timer t;
    FusionConfig poe;
    poe.method = Method::POE_FULL;
    TrainConfig train_cfg;
    train_cfg.seed = 42;
    EvalOptions fast = tuned;
    fast.l2_grid = {1e-2};  // single point: this criterion probes the harness
    fast.workers = 1;
    const EvalReport serial = run_lovo(benchmark, poe, train_cfg, fast);
    fast.workers = 4;
    const EvalReport parallel = run_lovo(benchmark, poe, train_cfg, fast);

    bool ok = eval_report_to_string(serial) == eval_report_to_string(parallel);
    ok &= serial.leaked_train_clips == 0 && serial.train_clips_seen > 0;
    for (const FoldResult& fold : serial.folds) ok &= fold.leaked_train_clips == 0;
    const double secs = t.seconds();
    h.report(4, "zero leakage and byte-identical reports across worker counts",
             ok && secs < 30.0, secs,
             "train_clips_seen=" + std::to_string(serial.train_clips_seen) +
                 " leaked=" + std::to_string(serial.leaked_train_clips));
  }

  // --- shared tuned run: all nine methods ----------------------------------
  Timer t_multi;
  std::vector<FusionConfig> all_cfgs;
  for (Method m : all_methods()) {
    FusionConfig cfg;
    cfg.method = m;
    cfg.alpha = 1.0;
    all_cfgs.push_back(cfg);
  }
  TrainConfig train_cfg;
  train_cfg.seed = 42;
  const MultiEvalResult multi = run_lovo_multi(benchmark, all_cfgs, train_cfg, tuned);
  const double secs_multi = t_multi.seconds();
  std::map<Method, const EvalReport*> by_method;
  for (std::size_t i = 0; i < all_cfgs.size(); ++i) {
    by_method[all_cfgs[i].method] = &multi.reports[i];
  }

  // --- criterion 5: shortcut collapse and its suppression ------------------
  {
    Timer t;
    const ShortcutReport ctx_rates =
        shortcut_failure_rates(pooled_predictions(*by_method[Method::CONTEXT_ONLY]));
    const ShortcutReport poe_rates =
        shortcut_failure_rates(pooled_predictions(*by_method[Method::POE_FULL]));
    bool ok = ctx_rates.near_bowl.failure_rate && ctx_rates.near_door.failure_rate &&
              poe_rates.near_bowl.failure_rate && poe_rates.near_door.failure_rate;
    std::string detail = "(rates undefined)";
    if (ok) {
      ok &= *ctx_rates.near_bowl.failure_rate == 1.0;
      ok &= *ctx_rates.near_door.failure_rate == 1.0;
      ok &= *poe_rates.near_bowl.failure_rate < *ctx_rates.near_bowl.failure_rate;
      ok &= *poe_rates.near_door.failure_rate < *ctx_rates.near_door.failure_rate;
      detail = "ctx=(" + fmt(*ctx_rates.near_bowl.failure_rate) + "," +
               fmt(*ctx_rates.near_door.failure_rate) + ") poe=(" +
               fmt(*poe_rates.near_bowl.failure_rate) + "," +
               fmt(*poe_rates.near_door.failure_rate) + ") [reads the criterion-7 run]";
    }
    h.report(5, "context-only collapses to shortcuts (1.0); full PoE strictly lower", ok,
             t.seconds(), detail);
  }

  // --- criterion 6: alpha ablation trend ------------------------------------
  {
    Timer t;
    const AlphaSweepResult sweep = alpha_sweep(benchmark, kDefaultAlphaGrid, train_cfg, tuned);
    const double secs = t.seconds();
    bool ok = sweep.rows.size() == 6;
    double acc0 = 0.0, acc1 = 0.0;
    if (ok) {
      acc0 = sweep.rows[0].mean_fold_accuracy;
      acc1 = sweep.rows[4].mean_fold_accuracy;  // alpha = 1.0
      ok &= sweep.rows[0].alpha == 0.0 && sweep.rows[4].alpha == 1.0;
      ok &= acc1 - acc0 >= 0.15;
      for (const AlphaRow& row : sweep.rows) ok &= acc0 <= row.mean_fold_accuracy;
      for (const EvalReport& r : sweep.reports) ok &= r.leaked_train_clips == 0;
    }
    h.report(6, "alpha sweep: >= 15 point gain at alpha=1.0 and alpha=0 is the minimum",
             ok && secs < 120.0, secs,
             "acc(0)=" + fmt(acc0) + " acc(1)=" + fmt(acc1) + " gap=" + fmt(acc1 - acc0));
  }

  // --- criterion 7: method ordering -----------------------------------------
  {
    const double poe = by_method[Method::POE_FULL]->mean_fold_accuracy;
    const double concat = by_method[Method::FEATURE_CONCAT]->mean_fold_accuracy;
    const double pose = by_method[Method::POSE_ONLY]->mean_fold_accuracy;
    const double audio = by_method[Method::AUDIO_ONLY]->mean_fold_accuracy;
    const double context = by_method[Method::CONTEXT_ONLY]->mean_fold_accuracy;
    bool ok = poe >= concat && poe >= pose && poe >= audio && poe >= context;
    ok &= audio - pose >= 0.05;
    for (const EvalReport& r : multi.reports) ok &= r.leaked_train_clips == 0;
    h.report(7, "method ordering: full PoE leads; audio beats pose by >= 5 points",
             ok && secs_multi < 180.0, secs_multi,
             "poe=" + fmt(poe) + " concat=" + fmt(concat) + " audio=" + fmt(audio) +
                 " pose=" + fmt(pose) + " ctx=" + fmt(context) +
                 " [nine tuned LOVO runs, shared fold training]");
  }

  // --- criterion 8: coverage curves on the ambiguous subset -----------------
  {
    Timer t;
    const std::vector<ClipPrediction> poe_amb =
        ambiguous_subset(pooled_predictions(*by_method[Method::POE_FULL]));
    const std::vector<ClipPrediction> ctx_amb =
        ambiguous_subset(pooled_predictions(*by_method[Method::CONTEXT_ONLY]));
    bool ok = !poe_amb.empty() && !ctx_amb.empty();
    std::string detail = "(empty ambiguous subset)";
    if (ok) {
      const double poe_at_half =
          accuracy_at_coverage(accuracy_coverage_curve(poe_amb, "ambiguous_pooled"), 0.5);
      const double ctx_at_half =
          accuracy_at_coverage(accuracy_coverage_curve(ctx_amb, "ambiguous_pooled"), 0.5);
      ok &= poe_at_half > ctx_at_half;
      detail = "poe@0.5=" + fmt(poe_at_half) + " ctx@0.5=" + fmt(ctx_at_half) +
               " [cached criterion-7 predictions]";
    }
    const double secs = t.seconds();
    h.report(8, "full PoE beats context-only at 50% coverage on ambiguous clips",
             ok && secs < 30.0, secs, detail);
  }

  // --- criterion 9: format round trips and malformed fixtures ---------------
  {
    Timer t;
    bool ok = true;
    std::string detail;

    const std::string csv = emit_dataset_csv(benchmark);
    ok &= parse_dataset_csv(csv, "benchmark.csv") == benchmark;

    FusionConfig cfg;
    cfg.method = Method::POE_CTX_AUD;
    EvalOptions fast = tuned;
    fast.l2_grid = {1e-2};
    EvalReport report = run_lovo(benchmark, cfg, train_cfg, fast);
    report.dataset_fingerprint = fingerprint;
    report.manifest = "manifest_eval_POE_CTX_AUD.json";
    ok &= eval_report_from_string(eval_report_to_string(report)) == report;

    PredictionTable table;
    table.method = "POE_CTX_AUD";
    table.dataset_fingerprint = fingerprint;
    table.manifest = report.manifest;
    table.rows = pooled_predictions(report);
    ok &= parse_predictions_csv(emit_predictions_csv(table), "p.csv") == table;

    const fs::path fixtures = fs::path(CTXPOE_TEST_DIR) / "fixtures";
    int caught = 0;
    for (const std::string name : {"bad_context.csv", "bad_columns.csv", "bad_number.csv"}) {
      try {
        parse_dataset_csv(read_text_file(fixtures / name), name);
      } catch (const DataError& e) {
        const std::string msg = e.what();
        if (msg.find(name + ":3") != std::string::npos) {
          ++caught;
        } else {
          detail += " unexpected message: " + msg;
        }
      }
    }
    ok &= caught == 3;
    h.report(9, "format round trips and line-numbered errors on 3 fixtures", ok, t.seconds(),
             detail.empty() ? "fixtures_caught=" + std::to_string(caught) : detail);
  }

  if (h.failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", h.failures);
  return 1;
}
