#pragma once

// CSV and JSON result files. Every file starts with a metadata comment
// ("# phonedyn config_hash=<hex> seed=<n>") followed by a header row.
// Numbers use shortest round-trip formatting, so identical runs produce
// identical bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "context.hpp"
#include "contours.hpp"
#include "decoding.hpp"
#include "error.hpp"
#include "text.hpp"

namespace phonedyn {

struct ResultMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// FNV-1a over the compact dump of `config` (keys sorted by nlohmann::json).
inline std::string config_hash(const nlohmann::json& config) { return text::fnv1a_hex(config.dump()); }

inline std::string meta_line(const ResultMeta& m) {
  return "# phonedyn config_hash=" + m.config_hash + " seed=" + std::to_string(m.seed);
}

namespace detail {

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

inline std::string num(double v) { return text::format_double(v); }

/// Rows of a result CSV, header checked against `expected`, metadata and
/// blank lines skipped.
inline std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing result file: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> cells;
    for (const auto c : text::split(t, ',')) cells.emplace_back(text::trim(c));
    if (!header) {
      if (cells != expected) throw FormatError(path.string() + ": unexpected header");
      header = true;
      continue;
    }
    if (cells.size() != expected.size())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(expected.size()) + " columns");
    rows.push_back(std::move(cells));
  }
  if (!header) throw FormatError(path.string() + ": missing header");
  return rows;
}

inline double cell_double(const std::string& s, const fs::path& path) {
  const auto v = text::to_double(s);
  if (!v) throw FormatError(path.string() + ": malformed number '" + s + "'");
  return *v;
}

inline long long cell_int(const std::string& s, const fs::path& path) {
  const auto v = text::to_int(s);
  if (!v) throw FormatError(path.string() + ": malformed integer '" + s + "'");
  return *v;
}

}  // namespace detail

// --- decoding_window.csv ---------------------------------------------------

inline const std::vector<std::string> kWindowHeader{"offset_ms", "accuracy", "baseline", "n_train", "n_test", "n_dropped"};

inline void write_decoding_window(const fs::path& path, const DecodingCurve& c, const ResultMeta& meta) {
  auto out = detail::open_output(path);
  out << meta_line(meta) << '\n';
  out << "offset_ms,accuracy,baseline,n_train,n_test,n_dropped\n";
  for (const auto& p : c.points)
    out << detail::num(p.offset_frames * c.frame_period_ms) << ',' << detail::num(p.accuracy) << ','
        << detail::num(p.baseline) << ',' << p.n_train << ',' << p.n_test << ',' << p.n_dropped << '\n';
}

struct WindowRow {
  double offset_ms = 0.0;
  double accuracy = 0.0;
  double baseline = 0.0;
};

inline std::vector<WindowRow> read_decoding_window(const fs::path& path) {
  std::vector<WindowRow> out;
  for (const auto& r : detail::read_csv(path, kWindowHeader))
    out.push_back({detail::cell_double(r[0], path), detail::cell_double(r[1], path), detail::cell_double(r[2], path)});
  return out;
}

// --- tg_matrix.csv / contours.csv ---------------------------------------------

inline void write_tg_matrices(const fs::path& path, const std::vector<TGMatrix>& tgs, const ResultMeta& meta) {
  auto out = detail::open_output(path);
  out << meta_line(meta) << '\n';
  out << "position,train_offset_ms,test_offset_ms,accuracy\n";
  for (const auto& tg : tgs)
    for (std::size_t i = 0; i < tg.offsets.size(); ++i)
      for (std::size_t j = 0; j < tg.offsets.size(); ++j)
        out << tg.position << ',' << detail::num(tg.offsets[i] * tg.frame_period_ms) << ','
            << detail::num(tg.offsets[j] * tg.frame_period_ms) << ','
            << detail::num(tg.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
}

struct ContourSet {
  int position = 0;
  double threshold = 0.0;
  std::vector<Polyline> polylines;
};

inline const std::vector<std::string> kContourHeader{"position", "threshold", "polyline_id", "vertex_index", "train_ms", "test_ms"};

inline void write_contours(const fs::path& path, const std::vector<ContourSet>& sets, const ResultMeta& meta) {
  auto out = detail::open_output(path);
  out << meta_line(meta) << '\n';
  out << "position,threshold,polyline_id,vertex_index,train_ms,test_ms\n";
  for (const auto& s : sets)
    for (std::size_t id = 0; id < s.polylines.size(); ++id)
      for (std::size_t v = 0; v < s.polylines[id].vertices.size(); ++v) {
        const auto& pt = s.polylines[id].vertices[v];
        out << s.position << ',' << detail::num(s.threshold) << ',' << id << ',' << v << ','
            << detail::num(pt.row) << ',' << detail::num(pt.col) << '\n';
      }
}

/// Groups contour rows back into sets, ordered by (position, threshold).
inline std::vector<ContourSet> read_contours(const fs::path& path) {
  std::map<std::pair<long long, double>, std::map<long long, Polyline>> grouped;
  for (const auto& r : detail::read_csv(path, kContourHeader)) {
    const auto pos = detail::cell_int(r[0], path);
    const double thr = detail::cell_double(r[1], path);
    const auto id = detail::cell_int(r[2], path);
    grouped[{pos, thr}][id].vertices.push_back({detail::cell_double(r[4], path), detail::cell_double(r[5], path)});
  }
  std::vector<ContourSet> out;
  for (auto& [key, lines] : grouped) {
    ContourSet s{static_cast<int>(key.first), key.second, {}};
    for (auto& [id, line] : lines) {
      const auto& v = line.vertices;
      line.closed = v.size() > 2 && v.front().row == v.back().row && v.front().col == v.back().col;
      s.polylines.push_back(std::move(line));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// --- context_gen.csv --------------------------------------------------------------

inline const std::vector<std::string> kContextHeader{"train_context", "test_context", "offset_ms", "accuracy", "baseline"};

inline void write_context_gen(const fs::path& path, const GeneralizationReport& r, const ResultMeta& meta) {
  auto out = detail::open_output(path);
  out << meta_line(meta) << '\n';
  out << "train_context,test_context,offset_ms,accuracy,baseline\n";
  for (const auto& train : r.contexts)
    for (const auto& test : r.contexts) {
      const auto& c = r.curve(train, test);
      for (std::size_t i = 0; i < r.offset_ms.size(); ++i)
        out << train << ',' << test << ',' << detail::num(r.offset_ms[i]) << ',' << detail::num(c.accuracy[i]) << ','
            << detail::num(c.baseline[i]) << '\n';
    }
}

/// Rebuilds the curves of a report (contexts in first-appearance order).
inline GeneralizationReport read_context_gen(const fs::path& path) {
  GeneralizationReport r;
  std::map<std::pair<std::string, std::string>, ContextCurve> curves;
  std::vector<double> offsets;
  for (const auto& row : detail::read_csv(path, kContextHeader)) {
    for (const auto& ctx : {row[0], row[1]})
      if (std::find(r.contexts.begin(), r.contexts.end(), ctx) == r.contexts.end()) r.contexts.push_back(ctx);
    const double ms = detail::cell_double(row[2], path);
    auto& c = curves[{row[0], row[1]}];
    if (c.accuracy.size() >= offsets.size()) offsets.push_back(ms);
    if (offsets[c.accuracy.size()] != ms) throw FormatError(path.string() + ": inconsistent offsets across context pairs");
    c.accuracy.push_back(detail::cell_double(row[3], path));
    c.baseline.push_back(detail::cell_double(row[4], path));
  }
  if (r.contexts.empty()) throw FormatError(path.string() + ": no rows");
  r.offset_ms = offsets;
  for (const auto& train : r.contexts)
    for (const auto& test : r.contexts) {
      const auto it = curves.find({train, test});
      if (it == curves.end() || it->second.accuracy.size() != offsets.size())
        throw FormatError(path.string() + ": incomplete curve " + train + " -> " + test);
      r.curves.push_back(it->second);
    }
  return r;
}

// --- effects.csv --------------------------------------------------------------------

inline const std::vector<std::string> kEffectsHeader{"train_context", "test_context", "effect_primary", "effect_acoustic"};

inline void write_effects(const fs::path& path, const EffectCorrelation& e, const ResultMeta& meta) {
  auto out = detail::open_output(path);
  out << meta_line(meta) << '\n';
  out << "train_context,test_context,effect_primary,effect_acoustic\n";
  for (const auto& p : e.pairs)
    out << p.train << ',' << p.test << ',' << detail::num(p.effect_a) << ',' << detail::num(p.effect_b) << '\n';
}

inline std::vector<EffectPair> read_effects(const fs::path& path) {
  std::vector<EffectPair> out;
  for (const auto& r : detail::read_csv(path, kEffectsHeader))
    out.push_back({r[0], r[1], detail::cell_double(r[2], path), detail::cell_double(r[3], path)});
  return out;
}

// --- summary.json ---------------------------------------------------------------------

inline void write_summary(const fs::path& path, nlohmann::json summary, const ResultMeta& meta) {
  summary["config_hash"] = meta.config_hash;
  summary["seed"] = meta.seed;
  auto out = detail::open_output(path);
  out << summary.dump(2) << '\n';
}

inline nlohmann::json read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing result file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace phonedyn
