#pragma once

// Seeded synthetic datasets with known encoding dynamics.
//
// Each phone embeds a pattern in the frames [onset + window_lo,
// onset + window_hi]; every other frame is pure Gaussian noise. Patterns are
// columns of a random orthonormal basis, assigned by encoding mode:
//
//   static             one direction per phoneme, same in every window frame
//   rotating           one direction per (phoneme, frame within window)
//   context_invariant  phoneme direction + context direction (orthogonal)
//   context_entangled  one direction per (phoneme, context)
//
// All draws come from Rng (splitmix64-seeded xoshiro256**) in a fixed
// order, so a spec and seed pin every output byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "preprocess.hpp"
#include "rng.hpp"
#include "text.hpp"
#include "vocab.hpp"

namespace phonedyn {

enum class EncodingMode { static_pattern, rotating, context_invariant, context_entangled };
enum class ContextSource { word_position, manner_pair };

inline std::string to_string(EncodingMode m) {
  switch (m) {
    case EncodingMode::static_pattern: return "static";
    case EncodingMode::rotating: return "rotating";
    case EncodingMode::context_invariant: return "context_invariant";
    case EncodingMode::context_entangled: return "context_entangled";
  }
  return "static";
}

inline EncodingMode parse_encoding_mode(const std::string& s) {
  if (s == "static") return EncodingMode::static_pattern;
  if (s == "rotating") return EncodingMode::rotating;
  if (s == "context_invariant") return EncodingMode::context_invariant;
  if (s == "context_entangled") return EncodingMode::context_entangled;
  throw FormatError("synth spec: unknown mode '" + s + "'");
}

struct SyntheticSpec {
  int n_phonemes = 39;
  int n_vowels = 15;
  int dims = 64;
  int n_utterances = 40;
  int phones_per_utterance = 150;
  int n_speakers = 4;
  int min_duration_frames = 8;
  int max_duration_frames = 12;
  int max_word_length = 5;
  int lead_frames = 40;
  int trail_frames = 40;
  EncodingMode mode = EncodingMode::static_pattern;
  ContextSource context_source = ContextSource::word_position;
  int window_lo = -2;
  int window_hi = 5;
  double noise_sigma = 0.1;
  double signal_scale = 1.0;
  std::vector<double> label_weights;  // empty -> uniform
  double frame_period_ms = 10.0;
  bool covariates = true;
  std::uint64_t seed = 0;

  int window_length() const noexcept { return window_hi - window_lo + 1; }

  /// p1..p4 plus "p5 and later" for positions; 9 manner pairs plus "other".
  int num_contexts() const noexcept { return context_source == ContextSource::word_position ? 5 : 10; }

  int patterns_needed() const noexcept {
    switch (mode) {
      case EncodingMode::static_pattern: return n_phonemes;
      case EncodingMode::rotating: return n_phonemes * window_length();
      case EncodingMode::context_invariant: return n_phonemes + num_contexts();
      case EncodingMode::context_entangled: return n_phonemes * num_contexts();
    }
    return n_phonemes;
  }

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v <= 0) throw DataError(std::string("synth spec: ") + name + " must be positive");
    };
    positive(n_phonemes, "n_phonemes");
    positive(dims, "dims");
    positive(n_utterances, "n_utterances");
    positive(phones_per_utterance, "phones_per_utterance");
    positive(n_speakers, "n_speakers");
    positive(min_duration_frames, "min_duration_frames");
    positive(max_word_length, "max_word_length");
    if (n_vowels < 0 || n_vowels > n_phonemes) throw DataError("synth spec: n_vowels must lie in [0, n_phonemes]");
    if (max_duration_frames < min_duration_frames) throw DataError("synth spec: max_duration_frames < min_duration_frames");
    if (lead_frames < 0 || trail_frames < 0) throw DataError("synth spec: lead/trail frames must be non-negative");
    if (window_hi < window_lo) throw DataError("synth spec: signal window is empty");
    if (window_length() > min_duration_frames)
      throw DataError("synth spec: signal window (" + std::to_string(window_length()) +
                      " frames) is longer than the shortest phone (" + std::to_string(min_duration_frames) +
                      " frames); windows of neighboring phones would overlap");
    if (dims < patterns_needed())
      throw DataError("synth spec: mode " + to_string(mode) + " needs dims >= " + std::to_string(patterns_needed()));
    if (!(noise_sigma >= 0.0) || !(frame_period_ms > 0.0)) throw DataError("synth spec: invalid noise or frame period");
    if (!label_weights.empty()) {
      if (label_weights.size() != static_cast<std::size_t>(n_phonemes))
        throw DataError("synth spec: label_weights needs one entry per phoneme");
      double total = 0.0;
      for (const double w : label_weights) {
        if (!(w >= 0.0)) throw DataError("synth spec: label weights must be non-negative");
        total += w;
      }
      if (!(total > 0.0)) throw DataError("synth spec: label weights sum to zero");
    }
  }

  nlohmann::json to_json() const {
    return {{"n_phonemes", n_phonemes},
            {"n_vowels", n_vowels},
            {"dims", dims},
            {"n_utterances", n_utterances},
            {"phones_per_utterance", phones_per_utterance},
            {"n_speakers", n_speakers},
            {"min_duration_frames", min_duration_frames},
            {"max_duration_frames", max_duration_frames},
            {"max_word_length", max_word_length},
            {"lead_frames", lead_frames},
            {"trail_frames", trail_frames},
            {"mode", to_string(mode)},
            {"context_source", context_source == ContextSource::word_position ? "position" : "manner"},
            {"window_lo", window_lo},
            {"window_hi", window_hi},
            {"noise_sigma", noise_sigma},
            {"signal_scale", signal_scale},
            {"label_weights", label_weights},
            {"frame_period_ms", frame_period_ms},
            {"covariates", covariates},
            {"seed", seed}};
  }

  /// Missing keys keep their defaults; unknown keys are rejected.
  static SyntheticSpec from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("synth spec: expected a JSON object");
    SyntheticSpec s;
    const auto known = s.to_json();
    for (const auto& [key, value] : j.items())
      if (!known.contains(key)) throw FormatError("synth spec: unknown key '" + key + "'");
    try {
      auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
      };
      get("n_phonemes", s.n_phonemes);
      get("n_vowels", s.n_vowels);
      get("dims", s.dims);
      get("n_utterances", s.n_utterances);
      get("phones_per_utterance", s.phones_per_utterance);
      get("n_speakers", s.n_speakers);
      get("min_duration_frames", s.min_duration_frames);
      get("max_duration_frames", s.max_duration_frames);
      get("max_word_length", s.max_word_length);
      get("lead_frames", s.lead_frames);
      get("trail_frames", s.trail_frames);
      get("window_lo", s.window_lo);
      get("window_hi", s.window_hi);
      get("noise_sigma", s.noise_sigma);
      get("signal_scale", s.signal_scale);
      get("label_weights", s.label_weights);
      get("frame_period_ms", s.frame_period_ms);
      get("covariates", s.covariates);
      get("seed", s.seed);
      if (j.contains("mode")) s.mode = parse_encoding_mode(j.at("mode").get<std::string>());
      if (j.contains("context_source")) {
        const auto src = j.at("context_source").get<std::string>();
        if (src == "position") {
          s.context_source = ContextSource::word_position;
        } else if (src == "manner") {
          s.context_source = ContextSource::manner_pair;
        } else {
          throw FormatError("synth spec: context_source must be 'position' or 'manner'");
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
  }
};

/// ARPAbet table when the counts match it, otherwise generated labels
/// V01.., C01.. with consonant manners cycling plosive/fricative/nasal/other.
inline PhonemeVocab synthetic_vocab(const SyntheticSpec& spec) {
  if (spec.n_phonemes == 39 && spec.n_vowels == 15) return PhonemeVocab::arpabet39();
  std::vector<PhonemeEntry> e;
  auto label = [](char prefix, int i) {
    std::string s(1, prefix);
    if (i < 10) s += '0';
    return s + std::to_string(i);
  };
  for (int v = 0; v < spec.n_vowels; ++v) e.push_back({label('V', v + 1), PhoneClass::vowel, Manner::other});
  const Manner cycle[] = {Manner::plosive, Manner::fricative, Manner::nasal, Manner::other};
  for (int c = 0; c < spec.n_phonemes - spec.n_vowels; ++c)
    e.push_back({label('C', c + 1), PhoneClass::consonant, cycle[c % 4]});
  return PhonemeVocab(std::move(e));
}

/// Orthonormal columns from Gram-Schmidt on Gaussian draws (column-major
/// draw order), with one re-orthogonalization pass.
inline Eigen::MatrixXd random_orthonormal(int dims, int count, Rng& rng) {
  Eigen::MatrixXd q(dims, count);
  for (int c = 0; c < count; ++c) {
    Eigen::VectorXd v(dims);
    for (int r = 0; r < dims; ++r) v(r) = rng.normal();
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < c; ++k) v -= q.col(k).dot(v) * q.col(k);
    const double norm = v.norm();
    if (!(norm > 1e-8)) throw DataError("random_orthonormal: degenerate draw");
    q.col(c) = v / norm;
  }
  return q;
}

struct SyntheticDataset {
  SyntheticSpec spec;
  Dataset dataset;
  CovariateTable covariates;
  Eigen::MatrixXd basis;  // dims x patterns (+1 nuisance column when available)
};

inline SyntheticDataset synthesize(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  out.spec = spec;
  Rng rng(spec.seed);

  const int patterns = spec.patterns_needed();
  const bool nuisance = spec.covariates && spec.dims > patterns;
  out.basis = random_orthonormal(spec.dims, patterns + (nuisance ? 1 : 0), rng);

  auto& ds = out.dataset;
  ds.vocab = synthetic_vocab(spec);
  ds.frame_period_ms = spec.frame_period_ms;
  ds.dims = spec.dims;
  ds.kind = "representation";

  std::vector<double> cumulative(static_cast<std::size_t>(spec.n_phonemes));
  {
    double total = 0.0;
    for (int l = 0; l < spec.n_phonemes; ++l) {
      total += spec.label_weights.empty() ? 1.0 : spec.label_weights[static_cast<std::size_t>(l)];
      cumulative[static_cast<std::size_t>(l)] = total;
    }
    for (auto& c : cumulative) c /= total;
  }
  auto draw_label = [&] {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), spec.n_phonemes - 1));
  };
  // Times go through the same 6-decimal text the alignment writer emits, so
  // in-memory tokens equal what parse_alignment reads back.
  auto seconds = [&](int frame) {
    return *text::to_double(text::format_fixed(frame * spec.frame_period_ms / 1000.0, 6));
  };

  const int W = spec.window_length();
  for (int u = 0; u < spec.n_utterances; ++u) {
    Utterance utt;
    utt.id = "u" + std::string(u < 10 ? "000" : u < 100 ? "00" : u < 1000 ? "0" : "") + std::to_string(u);
    utt.speaker = "s" + std::to_string(u % spec.n_speakers);

    std::vector<int> labels(static_cast<std::size_t>(spec.phones_per_utterance));
    std::vector<int> onsets(labels.size());
    int frame = spec.lead_frames;
    int word = 0, left_in_word = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (left_in_word == 0) {
        left_in_word = static_cast<int>(rng.between(1, spec.max_word_length));
        if (k > 0) ++word;
      }
      labels[k] = draw_label();
      const int dur = static_cast<int>(rng.between(spec.min_duration_frames, spec.max_duration_frames));
      onsets[k] = frame;
      PhoneToken tok;
      tok.utterance_id = utt.id;
      tok.speaker_id = utt.speaker;
      tok.label = labels[k];
      tok.onset_s = seconds(frame);
      tok.offset_s = seconds(frame + dur);
      tok.word_index = word;
      tok.word_position = 0;  // filled below
      utt.tokens.push_back(tok);
      frame += dur;
      --left_in_word;
    }
    for (std::size_t k = 0; k < utt.tokens.size(); ++k)
      utt.tokens[k].word_position =
          (k > 0 && utt.tokens[k - 1].word_index == utt.tokens[k].word_index) ? utt.tokens[k - 1].word_position + 1 : 1;

    const int frames = frame + spec.trail_frames;
    utt.features.frame_period_ms = spec.frame_period_ms;
    utt.features.data.resize(frames, spec.dims);
    for (int f = 0; f < frames; ++f)
      for (int d = 0; d < spec.dims; ++d) utt.features.data(f, d) = spec.noise_sigma * rng.normal();

    for (std::size_t k = 0; k < labels.size(); ++k) {
      const int l = labels[k];
      int ctx = 0;
      if (spec.context_source == ContextSource::word_position) {
        ctx = std::min(utt.tokens[k].word_position, 5) - 1;
      } else {
        ctx = 9;
        if (k > 0 && k + 1 < labels.size()) {
          const Manner a = ds.vocab[labels[k - 1]].manner, b = ds.vocab[labels[k + 1]].manner;
          if (a != Manner::other && b != Manner::other) ctx = 3 * static_cast<int>(a) + static_cast<int>(b);
        }
      }
      for (int r = 0; r < W; ++r) {
        const int f = onsets[k] + spec.window_lo + r;
        if (f < 0 || f >= frames) continue;
        Eigen::VectorXd signal;
        switch (spec.mode) {
          case EncodingMode::static_pattern: signal = out.basis.col(l); break;
          case EncodingMode::rotating: signal = out.basis.col(l * W + r); break;
          case EncodingMode::context_invariant:
            signal = out.basis.col(l) + out.basis.col(spec.n_phonemes + ctx);
            break;
          case EncodingMode::context_entangled: signal = out.basis.col(l * spec.num_contexts() + ctx); break;
        }
        utt.features.data.row(f) += spec.signal_scale * signal.transpose();
      }
    }

    if (spec.covariates) {
      auto& cov = out.covariates[utt.id];
      cov.amplitude.resize(static_cast<std::size_t>(frames));
      cov.pitch_hz.resize(static_cast<std::size_t>(frames));
      for (int f = 0; f < frames; ++f) {
        const double amp = std::max(0.0, 0.5 + 0.2 * rng.normal());
        const bool voiced = rng.uniform() < 0.6;
        const double pitch = voiced ? 100.0 + 150.0 * rng.uniform() : 0.0;
        cov.amplitude[static_cast<std::size_t>(f)] = amp;
        cov.pitch_hz[static_cast<std::size_t>(f)] = pitch;
        if (nuisance) utt.features.data.row(f) += amp * out.basis.col(patterns).transpose();
      }
    }

    utt.index_onsets();
    ds.utterances.push_back(std::move(utt));
  }
  return out;
}

struct GeneratedFiles {
  fs::path manifest;
  fs::path alignment;
  fs::path vocab;
  std::optional<fs::path> covariates;
  std::vector<fs::path> features;
};

/// Writes a synthetic dataset in the ingestion formats: vocab.tsv,
/// alignments.tsv, features/<utt>.npy, covariates.tsv and manifest.json.
/// `comment` (without the leading '#') heads every TSV; `manifest_extra`
/// keys are merged into manifest.json.
inline GeneratedFiles write_synthetic(const SyntheticDataset& synth, const fs::path& out_dir,
                                      const std::string& comment = {},
                                      const nlohmann::json& manifest_extra = nlohmann::json::object()) {
  fs::create_directories(out_dir / "features");
  GeneratedFiles files;
  const auto& ds = synth.dataset;

  files.vocab = out_dir / "vocab.tsv";
  {
    std::ofstream v(files.vocab, std::ios::trunc);
    if (!comment.empty()) v << '#' << comment << '\n';
    ds.vocab.write(v);
  }
  files.alignment = out_dir / "alignments.tsv";
  {
    std::ofstream a(files.alignment, std::ios::trunc);
    if (!comment.empty()) a << '#' << comment << '\n';
    for (const auto& u : ds.utterances) write_alignment(a, u.tokens, ds.vocab);
  }

  DatasetManifest m;
  m.frame_period_ms = ds.frame_period_ms;
  m.dims = ds.dims;
  m.vocab = files.vocab;
  m.alignments = {files.alignment};
  for (const auto& u : ds.utterances) {
    const fs::path p = out_dir / "features" / (u.id + ".npy");
    save_features(p, u.features);
    m.features[u.id] = p;
    files.features.push_back(p);
  }
  if (!synth.covariates.empty()) {
    files.covariates = out_dir / "covariates.tsv";
    std::ofstream c(*files.covariates, std::ios::trunc);
    if (!c) throw FormatError("cannot write covariate file: " + files.covariates->string());
    if (!comment.empty()) c << '#' << comment << '\n';
    write_covariates(c, synth.covariates);
    m.covariates = files.covariates;
  }
  m.kind = "representation";

  files.manifest = out_dir / "manifest.json";
  {
    std::ofstream mf(files.manifest, std::ios::trunc);
    auto j = m.to_json(out_dir);
    j.update(manifest_extra);
    mf << j.dump(2) << '\n';
  }
  {
    std::ofstream sf(out_dir / "synth_spec.json", std::ios::trunc);
    sf << synth.spec.to_json().dump(2) << '\n';
  }
  return files;
}

inline GeneratedFiles generate(const SyntheticSpec& spec, const fs::path& out_dir, const std::string& comment = {},
                               const nlohmann::json& manifest_extra = nlohmann::json::object()) {
  return write_synthetic(synthesize(spec), out_dir, comment, manifest_extra);
}

}  // namespace phonedyn
