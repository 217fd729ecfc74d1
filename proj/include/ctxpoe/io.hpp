#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxpoe/analysis.hpp"
#include "ctxpoe/domain.hpp"
#include "ctxpoe/eval.hpp"
#include "ctxpoe/experts.hpp"
#include "ctxpoe/rng.hpp"

namespace ctxpoe {

// Shortest text form that round-trips a double exactly (17 significant
// digits).
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double_token(std::string_view tok, const std::string& where) {
  if (tok.empty()) throw DataError(where + ": empty numeric field");
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw DataError(where + ": malformed number '" + s + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// Splits text into lines, requiring LF endings (a trailing final newline is
// optional). CR characters are rejected.
inline std::vector<std::string_view> split_lines(std::string_view text,
                                                 const std::string& source) {
  if (text.find('\r') != std::string_view::npos) {
    throw DataError(source + ": CR line endings are not part of the schema");
  }
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset CSV. Schema:
//   clip_id,video_id,context,label,pose_0..pose_{dp-1},audio_0..audio_{da-1}
// context in {near_bowl, near_door, neutral}, label in {EXIT, FOOD, IDLE},
// features as decimal text with 17 significant digits, UTF-8, LF endings.
// ---------------------------------------------------------------------------

inline std::string dataset_csv_header(int d_pose, int d_audio) {
  std::ostringstream out;
  out << "clip_id,video_id,context,label";
  for (int j = 0; j < d_pose; ++j) out << ",pose_" << j;
  for (int j = 0; j < d_audio; ++j) out << ",audio_" << j;
  return out.str();
}

inline std::string emit_dataset_csv(const Dataset& ds) {
  std::ostringstream out;
  out << dataset_csv_header(ds.d_pose, ds.d_audio) << '\n';
  for (const ClipRecord& clip : ds.clips) {
    out << clip.clip_id << ',' << clip.video_id << ',' << to_token(clip.context) << ','
        << to_token(clip.label);
    for (double v : clip.pose_features) out << ',' << format_double(v);
    for (double v : clip.audio_features) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

inline Dataset parse_dataset_csv(std::string_view text, const std::string& source) {
  const std::vector<std::string_view> lines = detail::split_lines(text, source);
  if (lines.empty()) throw DataError(source + ":1: missing header row");

  const std::vector<std::string_view> header = detail::split_csv_line(lines[0]);
  if (header.size() < 4 || header[0] != "clip_id" || header[1] != "video_id" ||
      header[2] != "context" || header[3] != "label") {
    throw DataError(source + ":1: header must start with clip_id,video_id,context,label");
  }
  int d_pose = 0, d_audio = 0;
  std::size_t col = 4;
  while (col < header.size() && header[col] == "pose_" + std::to_string(d_pose)) {
    ++d_pose;
    ++col;
  }
  while (col < header.size() && header[col] == "audio_" + std::to_string(d_audio)) {
    ++d_audio;
    ++col;
  }
  if (col != header.size()) {
    throw DataError(source + ":1: unexpected header column '" + std::string(header[col]) + "'");
  }

  Dataset ds;
  ds.d_pose = d_pose;
  ds.d_audio = d_audio;
  const std::size_t expected_fields = 4 + static_cast<std::size_t>(d_pose + d_audio);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = source + ":" + std::to_string(ln + 1);
    if (lines[ln].empty()) {
      if (ln + 1 == lines.size()) break;  // lone trailing blank line
      throw DataError(where + ": empty row");
    }
    const std::vector<std::string_view> fields = detail::split_csv_line(lines[ln]);
    if (fields.size() != expected_fields) {
      throw DataError(where + ": expected " + std::to_string(expected_fields) + " fields, got " +
                      std::to_string(fields.size()));
    }
    ClipRecord clip;
    clip.clip_id = std::string(fields[0]);
    clip.video_id = std::string(fields[1]);
    try {
      clip.context = parse_context(fields[2]);
      clip.label = parse_label(fields[3]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    clip.pose_features.reserve(d_pose);
    for (int j = 0; j < d_pose; ++j) {
      clip.pose_features.push_back(parse_double_token(fields[4 + j], where));
    }
    clip.audio_features.reserve(d_audio);
    for (int j = 0; j < d_audio; ++j) {
      clip.audio_features.push_back(parse_double_token(fields[4 + d_pose + j], where));
    }
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

// Content hash over the canonical CSV serialization; gates cross-method
// comparisons in the analyze command.
inline std::string dataset_fingerprint(const Dataset& ds) {
  const std::uint64_t h = fnv1a64(emit_dataset_csv(ds));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Per-clip predictions CSV: '#' metadata lines, then
//   clip_id,video_id,context,true_label,predicted_label,p_exit,p_food,p_idle,confidence,degenerate
// ---------------------------------------------------------------------------

struct PredictionTable {
  std::string method;
  std::string dataset_fingerprint;
  std::string manifest;
  std::vector<ClipPrediction> rows;

  friend bool operator==(const PredictionTable&, const PredictionTable&) = default;
};

inline std::string emit_predictions_csv(const PredictionTable& table) {
  std::ostringstream out;
  out << "# method: " << table.method << '\n';
  out << "# dataset_fingerprint: " << table.dataset_fingerprint << '\n';
  if (!table.manifest.empty()) out << "# manifest: " << table.manifest << '\n';
  out << "clip_id,video_id,context,true_label,predicted_label,p_exit,p_food,p_idle,"
         "confidence,degenerate\n";
  for (const ClipPrediction& r : table.rows) {
    out << r.clip_id << ',' << r.video_id << ',' << to_token(r.context) << ','
        << to_token(r.truth) << ',' << to_token(r.predicted);
    for (double p : r.dist.p) out << ',' << format_double(p);
    out << ',' << format_double(r.confidence) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
  return out.str();
}

inline PredictionTable parse_predictions_csv(std::string_view text, const std::string& source) {
  const std::vector<std::string_view> lines = detail::split_lines(text, source);
  PredictionTable table;
  std::size_t ln = 0;
  for (; ln < lines.size() && !lines[ln].empty() && lines[ln][0] == '#'; ++ln) {
    const std::string_view line = lines[ln];
    auto value_of = [&](std::string_view key) -> std::string {
      std::string_view rest = line.substr(1);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.substr(0, key.size()) != key) return {};
      rest.remove_prefix(key.size());
      if (rest.substr(0, 2) != ": ") return {};
      return std::string(rest.substr(2));
    };
    if (std::string v = value_of("method"); !v.empty()) table.method = v;
    if (std::string v = value_of("dataset_fingerprint"); !v.empty()) table.dataset_fingerprint = v;
    if (std::string v = value_of("manifest"); !v.empty()) table.manifest = v;
  }
  if (ln >= lines.size()) throw DataError(source + ": missing header row");
  const std::string expected_header =
      "clip_id,video_id,context,true_label,predicted_label,p_exit,p_food,p_idle,"
      "confidence,degenerate";
  if (lines[ln] != expected_header) {
    throw DataError(source + ":" + std::to_string(ln + 1) + ": unexpected header row");
  }
  for (++ln; ln < lines.size(); ++ln) {
    const std::string where = source + ":" + std::to_string(ln + 1);
    if (lines[ln].empty()) {
      if (ln + 1 == lines.size()) break;
      throw DataError(where + ": empty row");
    }
    const std::vector<std::string_view> f = detail::split_csv_line(lines[ln]);
    if (f.size() != 10) {
      throw DataError(where + ": expected 10 fields, got " + std::to_string(f.size()));
    }
    ClipPrediction r;
    r.clip_id = std::string(f[0]);
    r.video_id = std::string(f[1]);
    try {
      r.context = parse_context(f[2]);
      r.truth = parse_label(f[3]);
      r.predicted = parse_label(f[4]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      r.dist.p[k] = parse_double_token(f[5 + k], where);
    }
    r.confidence = parse_double_token(f[8], where);
    if (f[9] == "0") {
      r.degenerate = false;
    } else if (f[9] == "1") {
      r.degenerate = true;
    } else {
      throw DataError(where + ": degenerate flag must be 0 or 1, got '" + std::string(f[9]) + "'");
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Trained-expert parameter file, versioned plain text. Layout: one
// "key value..." line each for tag/dims/l2, then flattened row-major
// weights, bias, standardizer mean and std, all at 17 significant digits.
// ---------------------------------------------------------------------------

inline std::string serialize_expert(const LogisticExpert& e) {
  std::ostringstream out;
  out << "ctxpoe_expert_v1\n";
  out << "modality_tag " << e.modality_tag << '\n';
  out << "classes " << kNumLabels << '\n';
  out << "dim " << e.dim << '\n';
  out << "l2_strength " << format_double(e.l2_strength) << '\n';
  auto emit_row = [&out](std::string_view key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << format_double(v);
    out << '\n';
  };
  emit_row("weights", e.weights);
  emit_row("bias", e.bias);
  emit_row("standardizer_mean", e.standardizer.mean);
  emit_row("standardizer_std", e.standardizer.stddev);
  return out.str();
}

inline LogisticExpert parse_expert(std::string_view text, const std::string& source) {
  const std::vector<std::string_view> lines = detail::split_lines(text, source);
  if (lines.empty() || lines[0] != "ctxpoe_expert_v1") {
    throw DataError(source + ":1: expected header 'ctxpoe_expert_v1'");
  }
  LogisticExpert e;
  std::size_t n_classes = 0;
  auto tokens_of = [](std::string_view line) {
    std::vector<std::string> toks;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) toks.push_back(tok);
    return toks;
  };
  auto parse_values = [&](const std::vector<std::string>& toks, const std::string& where) {
    std::vector<double> out;
    for (std::size_t i = 1; i < toks.size(); ++i) out.push_back(parse_double_token(toks[i], where));
    return out;
  };
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string where = source + ":" + std::to_string(ln + 1);
    const std::vector<std::string> toks = tokens_of(lines[ln]);
    const std::string& key = toks.front();
    if (key == "modality_tag" && toks.size() == 2) {
      e.modality_tag = toks[1];
    } else if (key == "classes" && toks.size() == 2) {
      n_classes = static_cast<std::size_t>(std::stoul(toks[1]));
    } else if (key == "dim" && toks.size() == 2) {
      e.dim = static_cast<std::size_t>(std::stoul(toks[1]));
    } else if (key == "l2_strength" && toks.size() == 2) {
      e.l2_strength = parse_double_token(toks[1], where);
    } else if (key == "weights") {
      e.weights = parse_values(toks, where);
    } else if (key == "bias") {
      const std::vector<double> b = parse_values(toks, where);
      if (b.size() != kNumLabels) throw DataError(where + ": bias must have 3 entries");
      std::copy(b.begin(), b.end(), e.bias.begin());
    } else if (key == "standardizer_mean") {
      e.standardizer.mean = parse_values(toks, where);
    } else if (key == "standardizer_std") {
      e.standardizer.stddev = parse_values(toks, where);
    } else {
      throw DataError(where + ": unknown key '" + key + "'");
    }
  }
  if (n_classes != kNumLabels) throw DataError(source + ": classes must be 3");
  if (e.weights.size() != kNumLabels * e.dim || e.standardizer.mean.size() != e.dim ||
      e.standardizer.stddev.size() != e.dim) {
    throw DataError(source + ": parameter sizes inconsistent with dim");
  }
  return e;
}

// ---------------------------------------------------------------------------
// Analysis tables.
// ---------------------------------------------------------------------------

inline std::string emit_alpha_table_csv(std::span<const AlphaRow> rows) {
  std::ostringstream out;
  out << "alpha,mean_acc,std_acc,macro_f1\n";
  for (const AlphaRow& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.mean_fold_accuracy) << ','
        << format_double(r.std_fold_accuracy) << ',' << format_double(r.pooled_macro_f1) << '\n';
  }
  return out.str();
}

// Undefined rates (no IDLE clips in that context) are emitted as an empty
// failure_rate field.
inline std::string emit_shortcut_csv(const ShortcutReport& report, const std::string& method) {
  std::ostringstream out;
  out << "method,context,shortcut_label,idle_count,shortcut_failures,failure_rate\n";
  auto row = [&](ContextState c, const ShortcutCell& cell) {
    out << method << ',' << to_token(c) << ',' << to_token(cell.shortcut) << ','
        << cell.idle_count << ',' << cell.shortcut_failures << ',';
    if (cell.failure_rate) out << format_double(*cell.failure_rate);
    out << '\n';
  };
  row(ContextState::NEAR_BOWL, report.near_bowl);
  row(ContextState::NEAR_DOOR, report.near_door);
  return out.str();
}

inline std::string emit_coverage_csv(const CoverageCurve& curve, const std::string& method) {
  std::ostringstream out;
  out << "method,subset,coverage,cumulative_accuracy\n";
  for (const CoveragePoint& pt : curve.points) {
    out << method << ',' << curve.subset_tag << ',' << format_double(pt.coverage) << ','
        << format_double(pt.cumulative_accuracy) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Files.
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a sibling temp file and renames, so readers never observe a
// partially written artifact.
inline void write_text_file_atomic(const std::filesystem::path& path,
                                   std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Dataset load_dataset_csv(const std::filesystem::path& path) {
  return parse_dataset_csv(read_text_file(path), path.filename().string());
}

inline void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file_atomic(path, emit_dataset_csv(ds));
}

}  // namespace ctxpoe
