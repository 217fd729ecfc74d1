// Command-line surface: dataset generation, LOVO evaluation, the alpha
// ablation and the ambiguity analyses. Flat files in, flat files out; every
// command writes a manifest describing what it produced.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctxpoe/ctxpoe.hpp"

namespace fs = std::filesystem;
using namespace ctxpoe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitInternalError = 4;

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (tok.empty()) throw ConfigError(what + ": empty entry in list '" + csv + "'");
    try {
      out.push_back(parse_double_token(tok, what));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void warn_validation(const ValidationSummary& summary) {
  for (const auto& issue : summary.issues) {
    if (issue.severity == ValidationIssue::Severity::Warning) {
      std::cerr << "warning: " << issue.message << '\n';
    }
  }
}

Dataset load_and_check_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("dataset file '" + path.string() + "' does not exist");
  Dataset ds = load_dataset_csv(path);
  const ValidationSummary summary = validate_dataset(ds);
  warn_validation(summary);
  ensure_valid(ds);
  return ds;
}

struct GenArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed_override = -1;
};

int cmd_gen(const GenArgs& args) {
  GenConfig cfg = gen_config_from_string(read_text_file(args.config_path));
  if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
  validate_gen_config(cfg);

  const Dataset ds = generate_dataset(cfg);
  const ValidationSummary summary = validate_dataset(ds);
  warn_validation(summary);
  ensure_valid(ds);

  const fs::path out_dir(args.out_dir);
  RunManifest manifest;
  manifest.command = "gen";
  manifest.seed = cfg.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(ds);
  manifest.config = to_json(cfg);
  manifest.outputs = {"dataset.csv"};
  save_dataset_csv(ds, out_dir / "dataset.csv");
  write_text_file_atomic(out_dir / "manifest_gen.json", manifest_to_string(manifest));

  std::cout << "gen clips=" << ds.clips.size() << " videos=" << cfg.n_videos
            << " fingerprint=" << manifest.dataset_fingerprint << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string dataset_path;
  std::string method;
  double alpha = 1.0;
  std::uint64_t seed = 42;
  std::string l2_grid = "0.001,0.01,0.1";
  std::string out_dir = ".";
  int workers = 2;
};

int cmd_eval(const EvalArgs& args) {
  FusionConfig cfg;
  cfg.method = parse_method(args.method);
  cfg.alpha = args.alpha;
  cfg.validate();

  TrainConfig train_cfg;
  train_cfg.seed = args.seed;
  EvalOptions opts;
  opts.l2_grid = parse_double_list(args.l2_grid, "--l2-grid");
  opts.workers = args.workers;

  const Dataset ds = load_and_check_dataset(args.dataset_path);
  EvalReport report = run_lovo(ds, cfg, train_cfg, opts);
  report.dataset_fingerprint = dataset_fingerprint(ds);

  const std::string method_name(to_token(cfg.method));
  const std::string manifest_name = "manifest_eval_" + method_name + ".json";
  report.manifest = manifest_name;

  PredictionTable preds;
  preds.method = method_name;
  preds.dataset_fingerprint = report.dataset_fingerprint;
  preds.manifest = manifest_name;
  preds.rows = pooled_predictions(report);

  RunManifest manifest;
  manifest.command = "eval";
  manifest.seed = args.seed;
  manifest.dataset_fingerprint = report.dataset_fingerprint;
  manifest.config = json{{"method", to_json(cfg)},
                         {"train_config", to_json(train_cfg)},
                         {"l2_grid", opts.l2_grid},
                         {"dataset", args.dataset_path}};
  manifest.outputs = {"report_" + method_name + ".json", "predictions_" + method_name + ".csv"};

  const fs::path out_dir(args.out_dir);
  write_text_file_atomic(out_dir / ("report_" + method_name + ".json"),
                         eval_report_to_string(report));
  write_text_file_atomic(out_dir / ("predictions_" + method_name + ".csv"),
                         emit_predictions_csv(preds));
  write_text_file_atomic(out_dir / manifest_name, manifest_to_string(manifest));

  std::cout << method_name << " mean_acc=" << fmt4(report.mean_fold_accuracy)
            << " std_acc=" << fmt4(report.std_fold_accuracy)
            << " macro_f1=" << fmt4(report.pooled_macro_f1) << '\n';
  return kExitOk;
}

struct AblateArgs {
  std::string dataset_path;
  std::string alphas = "0.0,0.3,0.5,0.8,1.0,1.2";
  std::uint64_t seed = 42;
  std::string l2_grid = "0.001,0.01,0.1";
  std::string out_dir = ".";
  int workers = 2;
};

int cmd_ablate(const AblateArgs& args) {
  std::vector<double> alphas = parse_double_list(args.alphas, "--alphas");
  std::vector<double> unique_alphas;
  for (double a : alphas) {
    if (std::find(unique_alphas.begin(), unique_alphas.end(), a) != unique_alphas.end()) {
      std::cerr << "warning: duplicate alpha " << format_double(a) << " ignored\n";
      continue;
    }
    if (!(a >= 0.0)) throw ConfigError("--alphas: alpha must be >= 0");
    unique_alphas.push_back(a);
  }

  TrainConfig train_cfg;
  train_cfg.seed = args.seed;
  EvalOptions opts;
  opts.l2_grid = parse_double_list(args.l2_grid, "--l2-grid");
  opts.workers = args.workers;

  const Dataset ds = load_and_check_dataset(args.dataset_path);
  const AlphaSweepResult sweep = alpha_sweep(ds, unique_alphas, train_cfg, opts);

  RunManifest manifest;
  manifest.command = "ablate";
  manifest.seed = args.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(ds);
  manifest.config = json{{"alphas", unique_alphas},
                         {"train_config", to_json(train_cfg)},
                         {"l2_grid", opts.l2_grid},
                         {"dataset", args.dataset_path}};
  manifest.outputs = {"alpha_sweep.csv"};

  const fs::path out_dir(args.out_dir);
  std::string csv = "# manifest: manifest_ablate.json\n";
  csv += emit_alpha_table_csv(sweep.rows);
  write_text_file_atomic(out_dir / "alpha_sweep.csv", csv);
  write_text_file_atomic(out_dir / "manifest_ablate.json", manifest_to_string(manifest));

  for (const AlphaRow& row : sweep.rows) {
    std::cout << "alpha=" << format_double(row.alpha)
              << " mean_acc=" << fmt4(row.mean_fold_accuracy)
              << " std_acc=" << fmt4(row.std_fold_accuracy)
              << " macro_f1=" << fmt4(row.pooled_macro_f1) << '\n';
  }
  return kExitOk;
}

struct AnalyzeArgs {
  std::vector<std::string> prediction_paths;
  std::string out_dir = ".";
};

int cmd_analyze(const AnalyzeArgs& args) {
  std::vector<PredictionTable> tables;
  for (const std::string& path : args.prediction_paths) {
    if (!fs::exists(path)) throw DataError("predictions file '" + path + "' does not exist");
    tables.push_back(parse_predictions_csv(read_text_file(path), fs::path(path).filename().string()));
    if (tables.back().method.empty()) {
      throw DataError("'" + path + "': missing '# method:' metadata line");
    }
  }
  for (const PredictionTable& t : tables) {
    if (t.dataset_fingerprint != tables.front().dataset_fingerprint) {
      throw DataError("dataset fingerprint mismatch across prediction tables ('" +
                      tables.front().dataset_fingerprint + "' vs '" + t.dataset_fingerprint +
                      "'); refusing cross-dataset comparison");
    }
  }

  const std::string manifest_name = "manifest_analyze.json";
  RunManifest manifest;
  manifest.command = "analyze";
  manifest.dataset_fingerprint = tables.front().dataset_fingerprint;
  json inputs = json::array();
  for (const std::string& p : args.prediction_paths) inputs.push_back(p);
  manifest.config = json{{"predictions", inputs}};

  struct Output {
    std::string name;
    std::string content;
  };
  std::vector<Output> outputs;

  std::vector<SvgBarGroup> bar_groups(2);
  bar_groups[0].group_label = std::string(to_token(ContextState::NEAR_BOWL));
  bar_groups[1].group_label = std::string(to_token(ContextState::NEAR_DOOR));
  std::vector<SvgSeries> pooled_series;
  std::vector<SvgSeries> bowl_series, door_series;

  for (const PredictionTable& table : tables) {
    const ShortcutReport rates = shortcut_failure_rates(table.rows);
    outputs.push_back({"shortcut_rates_" + table.method + ".csv",
                       "# manifest: " + manifest_name + "\n" +
                           emit_shortcut_csv(rates, table.method)});
    if (rates.near_bowl.failure_rate) {
      bar_groups[0].bars.emplace_back(table.method, *rates.near_bowl.failure_rate);
    }
    if (rates.near_door.failure_rate) {
      bar_groups[1].bars.emplace_back(table.method, *rates.near_door.failure_rate);
    }

    const std::vector<ClipPrediction> ambiguous = ambiguous_subset(table.rows);
    if (ambiguous.empty()) {
      throw DataError("method " + table.method +
                      ": no clips in ambiguous contexts; nothing to analyze");
    }
    const CoverageCurve pooled = accuracy_coverage_curve(ambiguous, "ambiguous_pooled");
    outputs.push_back({"coverage_" + table.method + "_pooled.csv",
                       "# manifest: " + manifest_name + "\n" +
                           emit_coverage_csv(pooled, table.method)});
    SvgSeries series{table.method, {}};
    for (const CoveragePoint& pt : pooled.points) {
      series.points.emplace_back(pt.coverage, pt.cumulative_accuracy);
    }
    pooled_series.push_back(std::move(series));

    for (ContextState c : {ContextState::NEAR_BOWL, ContextState::NEAR_DOOR}) {
      std::vector<ClipPrediction> subset;
      for (const ClipPrediction& r : table.rows) {
        if (r.context == c) subset.push_back(r);
      }
      const std::string ctx_name(to_token(c));
      if (subset.empty()) {
        std::cerr << "warning: method " << table.method << ": no clips in context " << ctx_name
                  << "; skipping its curve\n";
        continue;
      }
      const CoverageCurve curve = accuracy_coverage_curve(subset, "ambiguous_" + ctx_name);
      outputs.push_back({"coverage_" + table.method + "_" + ctx_name + ".csv",
                         "# manifest: " + manifest_name + "\n" +
                             emit_coverage_csv(curve, table.method)});
      SvgSeries ctx_series{table.method, {}};
      for (const CoveragePoint& pt : curve.points) {
        ctx_series.points.emplace_back(pt.coverage, pt.cumulative_accuracy);
      }
      (c == ContextState::NEAR_BOWL ? bowl_series : door_series).push_back(std::move(ctx_series));
    }
  }

  outputs.push_back({"shortcut_rates.svg",
                     render_bar_chart(bar_groups, "Shortcut failure rates on true-IDLE clips",
                                      "failure rate")});
  outputs.push_back({"coverage_pooled.svg",
                     render_line_chart(pooled_series, "Accuracy vs coverage (ambiguous contexts)",
                                       "coverage", "cumulative accuracy")});
  if (!bowl_series.empty()) {
    outputs.push_back({"coverage_near_bowl.svg",
                       render_line_chart(bowl_series, "Accuracy vs coverage (near_bowl)",
                                         "coverage", "cumulative accuracy")});
  }
  if (!door_series.empty()) {
    outputs.push_back({"coverage_near_door.svg",
                       render_line_chart(door_series, "Accuracy vs coverage (near_door)",
                                         "coverage", "cumulative accuracy")});
  }

  const fs::path out_dir(args.out_dir);
  for (const Output& o : outputs) {
    manifest.outputs.push_back(o.name);
    write_text_file_atomic(out_dir / o.name, o.content);
  }
  write_text_file_atomic(out_dir / manifest_name, manifest_to_string(manifest));

  std::cout << "analyze methods=" << tables.size() << " outputs=" << manifest.outputs.size()
            << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-gated product-of-experts intent inference toolkit"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset from a config file");
  gen->add_option("--config", gen_args.config_path, "Generator config JSON")->required();
  gen->add_option("--out-dir", gen_args.out_dir, "Output directory");
  gen->add_option("--seed", gen_args.seed_override, "Override the config seed");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Run LOVO evaluation for one method");
  eval->add_option("--dataset", eval_args.dataset_path, "Dataset CSV")->required();
  eval->add_option("--method", eval_args.method,
                   "Fusion method (" + valid_method_names() + ")")
      ->required();
  eval->add_option("--alpha", eval_args.alpha, "Context prior strength");
  eval->add_option("--seed", eval_args.seed, "Training seed");
  eval->add_option("--l2-grid", eval_args.l2_grid, "Comma-separated l2 tuning grid");
  eval->add_option("--workers", eval_args.workers, "Parallel fold workers");
  eval->add_option("--out-dir", eval_args.out_dir, "Output directory");

  AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand("ablate", "Alpha-sweep ablation for the full PoE model");
  ablate->add_option("--dataset", ablate_args.dataset_path, "Dataset CSV")->required();
  ablate->add_option("--alphas", ablate_args.alphas, "Comma-separated alpha grid");
  ablate->add_option("--seed", ablate_args.seed, "Training seed");
  ablate->add_option("--l2-grid", ablate_args.l2_grid, "Comma-separated l2 tuning grid");
  ablate->add_option("--workers", ablate_args.workers, "Parallel fold workers");
  ablate->add_option("--out-dir", ablate_args.out_dir, "Output directory");

  AnalyzeArgs analyze_args;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Shortcut-failure and accuracy-coverage analyses");
  analyze->add_option("predictions", analyze_args.prediction_paths,
                      "Prediction CSVs (one per method, same dataset)")
      ->required();
  analyze->add_option("--out-dir", analyze_args.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (ablate->parsed()) return cmd_ablate(ablate_args);
    if (analyze->parsed()) return cmd_analyze(analyze_args);
    std::cerr << "error: no subcommand\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}
