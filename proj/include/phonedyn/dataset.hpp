#pragma once

// Data model and ingestion: feature streams, phone alignments, manifests,
// and the frame arithmetic that turns a phone onset plus an offset into a
// design-matrix row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "npy.hpp"
#include "text.hpp"
#include "vocab.hpp"

namespace phonedyn {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

/// frames x dims representation sampled at a fixed frame period.
struct FeatureMatrix {
  RowMatrix data;
  double frame_period_ms = 10.0;

  Eigen::Index frames() const noexcept { return data.rows(); }
  Eigen::Index dims() const noexcept { return data.cols(); }
};

inline void check_finite(const RowMatrix& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        throw DataError(what + ": non-finite value at frame " + std::to_string(r) + ", dim " +
                        std::to_string(c));
}

inline FeatureMatrix load_features(const fs::path& path, double frame_period_ms = 10.0) {
  FeatureMatrix fm{npy::read_matrix(path), frame_period_ms};
  if (fm.frames() < 1 || fm.dims() < 1)
    throw DimensionError(path.string() + ": feature matrix must have at least one frame and one dim");
  check_finite(fm.data, path.string());
  return fm;
}

inline void save_features(const fs::path& path, const FeatureMatrix& fm) {
  npy::write_matrix(path, fm.data);
}

// ---------------------------------------------------------------------------
// Alignments
// ---------------------------------------------------------------------------

struct PhoneToken {
  std::string utterance_id;
  std::string speaker_id;
  int label = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;
  int word_index = 0;
  int word_position = 1;  // 1-based position within the word

  double duration_s() const noexcept { return offset_s - onset_s; }
};

/// Round-half-up frame index of a time point.
inline int onset_frame(double time_s, double frame_period_ms) {
  // The small bias absorbs binary representation error in decimal inputs,
  // e.g. 0.845 s at 10 ms is stored as 84.4999... frames.
  return static_cast<int>(std::floor(time_s * (1000.0 / frame_period_ms) + 0.5 + 1e-9));
}

namespace detail {

inline std::optional<int> lookup_label(const PhonemeVocab& vocab, std::string_view label) {
  if (auto idx = vocab.index_of(label)) return idx;
  // ARPAbet stress markers (AH0, EY1, ...) map onto the bare vowel.
  if (label.size() > 1 && label.back() >= '0' && label.back() <= '2')
    return vocab.index_of(label.substr(0, label.size() - 1));
  return std::nullopt;
}

}  // namespace detail

/// Parses an alignment TSV: utterance_id, speaker_id, phoneme_label,
/// onset_s, offset_s, word_index. Tokens come back grouped per utterance
/// (first-appearance order), sorted by onset, with word positions filled in.
inline std::vector<PhoneToken> parse_alignment(std::istream& in, const PhonemeVocab& vocab,
                                               const std::string& source = "alignment") {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<PhoneToken>> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto cols = text::split(trimmed, '\t');
    if (cols.size() != 6) throw FormatError(where + ": expected 6 tab-separated columns");

    PhoneToken tok;
    tok.utterance_id = std::string(text::trim(cols[0]));
    tok.speaker_id = std::string(text::trim(cols[1]));
    const auto label = text::trim(cols[2]);
    const auto idx = detail::lookup_label(vocab, label);
    if (!idx) throw DataError(where + ": unknown phoneme label '" + std::string(label) + "'");
    tok.label = *idx;
    const auto on = text::to_double(cols[3]);
    const auto off = text::to_double(cols[4]);
    const auto word = text::to_int(cols[5]);
    if (!on || !off) throw FormatError(where + ": malformed time value");
    if (!word) throw FormatError(where + ": malformed word_index");
    tok.onset_s = *on;
    tok.offset_s = *off;
    tok.word_index = static_cast<int>(*word);
    if (!(tok.onset_s >= 0.0)) throw DataError(where + ": negative onset");
    if (!(tok.onset_s < tok.offset_s)) throw DataError(where + ": onset must precede offset");

    auto [it, inserted] = groups.try_emplace(tok.utterance_id);
    if (inserted) order.push_back(tok.utterance_id);
    it->second.push_back(std::move(tok));
  }

  std::vector<PhoneToken> out;
  for (const auto& utt : order) {
    auto& toks = groups[utt];
    std::stable_sort(toks.begin(), toks.end(),
                     [](const PhoneToken& a, const PhoneToken& b) { return a.onset_s < b.onset_s; });
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i > 0) {
        if (toks[i - 1].offset_s > toks[i].onset_s + 1e-9)
          throw DataError(source + ": overlapping tokens in utterance '" + utt + "' at " +
                          text::format_double(toks[i].onset_s) + "s");
        toks[i].word_position =
            toks[i - 1].word_index == toks[i].word_index ? toks[i - 1].word_position + 1 : 1;
      } else {
        toks[i].word_position = 1;
      }
    }
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

inline std::vector<PhoneToken> parse_alignment(const fs::path& path, const PhonemeVocab& vocab) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open alignment file: " + path.string());
  return parse_alignment(in, vocab, path.string());
}

inline void write_alignment(std::ostream& out, std::span<const PhoneToken> tokens,
                            const PhonemeVocab& vocab) {
  for (const auto& t : tokens)
    out << t.utterance_id << '\t' << t.speaker_id << '\t' << vocab[t.label].label << '\t'
        << text::format_fixed(t.onset_s, 6) << '\t' << text::format_fixed(t.offset_s, 6) << '\t'
        << t.word_index << '\n';
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

enum class ManifestUse {
  features,  // every aligned utterance needs a feature file
  audio,     // every aligned utterance needs a WAV file
};

struct DatasetManifest {
  fs::path source;
  double frame_period_ms = 10.0;
  Eigen::Index dims = 0;             // 0 when not declared (audio manifests)
  std::optional<fs::path> vocab;     // nullopt -> built-in ARPAbet table
  std::vector<fs::path> alignments;
  std::map<std::string, fs::path> features;
  std::map<std::string, fs::path> wavs;
  std::optional<fs::path> covariates;
  std::string kind = "representation";  // or "logmel"
  bool preprocessed = false;            // covariates already regressed out

  PhonemeVocab load_vocab() const {
    return vocab ? PhonemeVocab::load(*vocab) : PhonemeVocab::arpabet39();
  }

  nlohmann::json to_json(const fs::path& relative_to) const {
    auto rel = [&](const fs::path& p) { return fs::relative(p, relative_to).generic_string(); };
    nlohmann::json j;
    j["frame_period_ms"] = frame_period_ms;
    if (dims > 0) j["dims"] = dims;
    j["vocab"] = vocab ? nlohmann::json(rel(*vocab)) : nlohmann::json("default");
    auto aligns = nlohmann::json::array();
    for (const auto& a : alignments) aligns.push_back(rel(a));
    j["alignments"] = aligns;
    if (!features.empty()) {
      auto f = nlohmann::json::object();
      for (const auto& [k, v] : features) f[k] = rel(v);
      j["features"] = f;
    }
    if (!wavs.empty()) {
      auto w = nlohmann::json::object();
      for (const auto& [k, v] : wavs) w[k] = rel(v);
      j["wavs"] = w;
    }
    if (covariates) j["covariates"] = rel(*covariates);
    j["kind"] = kind;
    if (preprocessed) j["preprocessed"] = true;
    return j;
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

inline void require_exists(const fs::path& p, const std::string& key) {
  if (!fs::exists(p)) throw FormatError("manifest: " + key + " references missing file " + p.string());
}

template <class T>
T get_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("manifest: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("manifest: malformed field '") + key + "'");
  }
}

inline std::map<std::string, fs::path> path_map(const nlohmann::json& j, const char* key,
                                                const fs::path& base) {
  std::map<std::string, fs::path> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_object()) throw FormatError(std::string("manifest: field '") + key + "' must be an object");
  for (const auto& [utt, p] : j.at(key).items()) {
    if (!p.is_string()) throw FormatError(std::string("manifest: malformed field '") + key + "." + utt + "'");
    out[utt] = resolve(base, p.get<std::string>());
    require_exists(out[utt], std::string(key) + "." + utt);
  }
  return out;
}

}  // namespace detail

/// Reads and validates a JSON manifest. Relative paths resolve against the
/// manifest's directory. Alignment utterance ids are cross-checked against
/// the feature (or WAV) map, and declared dims against every npy header.
inline DatasetManifest parse_manifest(const fs::path& path, ManifestUse use = ManifestUse::features) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest " + path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError("manifest: top level must be an object");

  const fs::path base = path.parent_path();
  DatasetManifest m;
  m.source = path;
  m.frame_period_ms = detail::get_field<double>(j, "frame_period_ms");
  if (!(m.frame_period_ms > 0.0)) throw FormatError("manifest: frame_period_ms must be positive");
  if (j.contains("kind")) m.kind = detail::get_field<std::string>(j, "kind");
  if (j.contains("preprocessed")) m.preprocessed = detail::get_field<bool>(j, "preprocessed");

  if (j.contains("vocab")) {
    const auto v = detail::get_field<std::string>(j, "vocab");
    if (v != "default") {
      m.vocab = detail::resolve(base, v);
      detail::require_exists(*m.vocab, "vocab");
    }
  }

  if (!j.contains("alignments")) throw FormatError("manifest: missing field 'alignments'");
  const auto& aj = j.at("alignments");
  std::vector<std::string> align_paths;
  if (aj.is_string()) {
    align_paths.push_back(aj.get<std::string>());
  } else if (aj.is_array()) {
    for (const auto& a : aj) {
      if (!a.is_string()) throw FormatError("manifest: malformed field 'alignments'");
      align_paths.push_back(a.get<std::string>());
    }
  } else {
    throw FormatError("manifest: malformed field 'alignments'");
  }
  for (const auto& a : align_paths) {
    m.alignments.push_back(detail::resolve(base, a));
    detail::require_exists(m.alignments.back(), "alignments");
  }

  m.features = detail::path_map(j, "features", base);
  m.wavs = detail::path_map(j, "wavs", base);
  if (j.contains("covariates")) {
    m.covariates = detail::resolve(base, detail::get_field<std::string>(j, "covariates"));
    detail::require_exists(*m.covariates, "covariates");
  }

  const auto& sources = use == ManifestUse::features ? m.features : m.wavs;
  const char* source_key = use == ManifestUse::features ? "features" : "wavs";
  if (sources.empty()) throw FormatError(std::string("manifest: missing field '") + source_key + "'");

  if (use == ManifestUse::features) {
    const auto dims = detail::get_field<long long>(j, "dims");
    if (dims <= 0) throw FormatError("manifest: dims must be positive");
    m.dims = static_cast<Eigen::Index>(dims);
    for (const auto& [utt, p] : m.features) {
      const auto h = npy::read_header(p);
      if (h.shape.size() != 2)
        throw DimensionError("manifest: features." + utt + " is not a 2-D array");
      if (static_cast<Eigen::Index>(h.shape[1]) != m.dims)
        throw DimensionError("manifest: features." + utt + " has " + std::to_string(h.shape[1]) +
                             " columns but dims=" + std::to_string(m.dims));
    }
  } else if (j.contains("dims")) {
    m.dims = static_cast<Eigen::Index>(detail::get_field<long long>(j, "dims"));
  }

  // Dangling utterance references: only the first column is needed here.
  for (const auto& a : m.alignments) {
    std::ifstream af(a);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(af, line)) {
      ++line_no;
      const auto t = text::trim(line);
      if (t.empty() || t.front() == '#') continue;
      const std::string utt(text::trim(text::split(t, '\t').front()));
      if (!sources.count(utt))
        throw FormatError("manifest: alignment " + a.filename().string() + ":" +
                          std::to_string(line_no) + " references unknown utterance \"" + utt + "\"");
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct Utterance {
  std::string id;
  std::string speaker;
  FeatureMatrix features;
  std::vector<PhoneToken> tokens;
  std::vector<int> onset_frames;  // parallel to tokens

  void index_onsets() {
    onset_frames.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
      onset_frames[i] = onset_frame(tokens[i].onset_s, features.frame_period_ms);
  }
};

/// Position of one token inside a Dataset.
struct TokenRef {
  std::uint32_t utterance = 0;
  std::uint32_t token = 0;

  friend bool operator==(const TokenRef&, const TokenRef&) = default;
  friend auto operator<=>(const TokenRef&, const TokenRef&) = default;
};

struct Dataset {
  PhonemeVocab vocab;
  double frame_period_ms = 10.0;
  Eigen::Index dims = 0;
  std::vector<Utterance> utterances;
  std::string kind = "representation";

  const PhoneToken& token(TokenRef r) const { return utterances[r.utterance].tokens[r.token]; }
  int onset(TokenRef r) const { return utterances[r.utterance].onset_frames[r.token]; }

  std::size_t num_tokens() const {
    std::size_t n = 0;
    for (const auto& u : utterances) n += u.tokens.size();
    return n;
  }

  std::size_t num_frames() const {
    std::size_t n = 0;
    for (const auto& u : utterances) n += static_cast<std::size_t>(u.features.frames());
    return n;
  }

  /// Previous/next token in the same utterance, if any.
  const PhoneToken* neighbor(TokenRef r, int step) const {
    const auto& toks = utterances[r.utterance].tokens;
    const auto j = static_cast<long long>(r.token) + step;
    if (j < 0 || j >= static_cast<long long>(toks.size())) return nullptr;
    return &toks[static_cast<std::size_t>(j)];
  }

  /// Groups tokens by utterance id and attaches them to the matching
  /// utterances; throws on tokens whose utterance is unknown.
  void attach_tokens(std::span<const PhoneToken> tokens) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < utterances.size(); ++i) by_id[utterances[i].id] = i;
    for (const auto& t : tokens) {
      const auto it = by_id.find(t.utterance_id);
      if (it == by_id.end()) throw DataError("alignment references unknown utterance \"" + t.utterance_id + "\"");
      auto& u = utterances[it->second];
      if (u.tokens.empty()) u.speaker = t.speaker_id;
      u.tokens.push_back(t);
    }
    for (auto& u : utterances) u.index_onsets();
  }
};

inline Dataset load_dataset(const DatasetManifest& m) {
  Dataset ds;
  ds.vocab = m.load_vocab();
  ds.frame_period_ms = m.frame_period_ms;
  ds.dims = m.dims;
  ds.kind = m.kind;
  for (const auto& [utt, path] : m.features) {
    Utterance u;
    u.id = utt;
    u.features = load_features(path, m.frame_period_ms);
    if (u.features.dims() != m.dims)
      throw DimensionError(path.string() + ": has " + std::to_string(u.features.dims()) +
                           " columns but dims=" + std::to_string(m.dims));
    ds.utterances.push_back(std::move(u));
  }
  std::vector<PhoneToken> tokens;
  for (const auto& a : m.alignments) {
    auto part = parse_alignment(a, ds.vocab);
    tokens.insert(tokens.end(), part.begin(), part.end());
  }
  ds.attach_tokens(tokens);
  return ds;
}

inline Dataset load_dataset(const fs::path& manifest_path) {
  return load_dataset(parse_manifest(manifest_path));
}

// ---------------------------------------------------------------------------
// Sample assembly
// ---------------------------------------------------------------------------

using TokenPredicate = std::function<bool(const PhoneToken&)>;

inline std::vector<TokenRef> select_tokens(const Dataset& ds, const TokenPredicate& keep) {
  std::vector<TokenRef> out;
  for (std::uint32_t u = 0; u < ds.utterances.size(); ++u)
    for (std::uint32_t t = 0; t < ds.utterances[u].tokens.size(); ++t)
      if (!keep || keep(ds.utterances[u].tokens[t])) out.push_back({u, t});
  return out;
}

/// Design matrix for one time offset: one row per token whose
/// onset frame + offset lies inside its utterance.
struct SampleSet {
  Eigen::MatrixXd X;
  std::vector<int> y;
  int offset_frames = 0;
  std::vector<TokenRef> provenance;
  std::size_t dropped = 0;

  std::size_t size() const noexcept { return y.size(); }
};

/// Frame row for a token at an offset, or -1 when out of bounds.
inline Eigen::Index sample_frame(const Dataset& ds, TokenRef r, int offset_frames) {
  const long long f = static_cast<long long>(ds.onset(r)) + offset_frames;
  if (f < 0 || f >= ds.utterances[r.utterance].features.frames()) return -1;
  return static_cast<Eigen::Index>(f);
}

inline SampleSet assemble_samples(const Dataset& ds, int offset_frames, std::span<const TokenRef> tokens) {
  SampleSet s;
  s.offset_frames = offset_frames;
  std::vector<Eigen::Index> frames;
  frames.reserve(tokens.size());
  for (const auto r : tokens) {
    const auto f = sample_frame(ds, r, offset_frames);
    if (f < 0) {
      ++s.dropped;
      continue;
    }
    frames.push_back(f);
    s.provenance.push_back(r);
    s.y.push_back(ds.token(r).label);
  }
  if (s.provenance.empty())
    throw DataError("no in-bounds samples at offset " + std::to_string(offset_frames) + " frames (" +
                    std::to_string(s.dropped) + " dropped)");
  s.X.resize(static_cast<Eigen::Index>(frames.size()), ds.dims);
  for (std::size_t i = 0; i < frames.size(); ++i)
    s.X.row(static_cast<Eigen::Index>(i)) = ds.utterances[s.provenance[i].utterance].features.data.row(frames[i]);
  return s;
}

inline SampleSet assemble_samples(const Dataset& ds, int offset_frames, const TokenPredicate& keep) {
  const auto refs = select_tokens(ds, keep);
  return assemble_samples(ds, offset_frames, std::span<const TokenRef>(refs));
}

}  // namespace phonedyn
