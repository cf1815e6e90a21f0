#pragma once

// Per-offset phonetic decoding: the decodability-window sweep and the
// temporal generalization (train offset x test offset) matrix.
//
// Both analyses share one evaluation path. A decoder fitted at offset o is
// scored frame by frame through ridge_predict_row, so the TG diagonal is
// the decoding curve bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "dataset.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "ridge.hpp"
#include "rng.hpp"

namespace phonedyn {

/// Inclusive range of frame offsets relative to phone onset.
struct OffsetRange {
  int lo = -80;
  int hi = 79;

  std::size_t size() const noexcept { return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0; }
  int at(std::size_t i) const noexcept { return lo + static_cast<int>(i); }
  std::vector<int> values() const {
    std::vector<int> v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i);
    return v;
  }
  void validate() const {
    if (size() == 0) throw DataError("offset range " + std::to_string(lo) + ".." + std::to_string(hi) + " is empty");
  }
};

struct TokenFilter {
  bool vowels_only = false;
  std::optional<int> word_position;  // keep only this 1-based position

  bool operator()(const PhonemeVocab& vocab, const PhoneToken& t) const {
    if (vowels_only && !vocab.is_vowel(t.label)) return false;
    if (word_position && t.word_position != *word_position) return false;
    return true;
  }
};

struct SplitConfig {
  std::vector<std::string> train_utterances;  // explicit lists override the ratio split
  std::vector<std::string> test_utterances;
  double train_ratio = 0.5;
  bool per_speaker = true;
};

struct UtteranceSplit {
  std::vector<bool> train;  // indexed by utterance
  std::vector<bool> test;
  std::string method;  // "explicit", "per_speaker" or "utterance"
};

/// Assigns utterances to train/test. Ratio splits are stratified by speaker
/// when every aligned utterance carries a speaker id; single-utterance
/// speakers are pooled and split together.
inline UtteranceSplit split_utterances(const Dataset& ds, const SplitConfig& cfg, std::uint64_t seed) {
  const std::size_t n = ds.utterances.size();
  UtteranceSplit s{std::vector<bool>(n, false), std::vector<bool>(n, false), ""};

  if (!cfg.train_utterances.empty() || !cfg.test_utterances.empty()) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < n; ++i) by_id[ds.utterances[i].id] = i;
    auto mark = [&](const std::vector<std::string>& ids, std::vector<bool>& dst) {
      for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("split: unknown utterance \"" + id + "\"");
        dst[it->second] = true;
      }
    };
    mark(cfg.train_utterances, s.train);
    if (cfg.test_utterances.empty()) {
      for (std::size_t i = 0; i < n; ++i) s.test[i] = !s.train[i];
    } else {
      mark(cfg.test_utterances, s.test);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (s.train[i] && s.test[i]) throw DataError("split: utterance \"" + ds.utterances[i].id + "\" is in both train and test");
    s.method = "explicit";
    return s;
  }

  if (!(cfg.train_ratio > 0.0 && cfg.train_ratio < 1.0)) throw DataError("split: train ratio must be in (0, 1)");

  std::vector<std::uint32_t> aligned;
  bool speakers_known = true;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (ds.utterances[i].tokens.empty()) continue;
    aligned.push_back(i);
    if (ds.utterances[i].speaker.empty() || ds.utterances[i].speaker == "-") speakers_known = false;
  }
  if (aligned.size() < 2) throw DataError("split: need at least 2 aligned utterances");

  Rng rng(seed);
  auto assign = [&](std::vector<std::uint32_t>& group) {
    shuffle(std::span<std::uint32_t>(group), rng);
    const auto k = std::clamp<long long>(std::llround(cfg.train_ratio * static_cast<double>(group.size())), 1,
                                         static_cast<long long>(group.size()) - 1);
    for (std::size_t i = 0; i < group.size(); ++i) (static_cast<long long>(i) < k ? s.train : s.test)[group[i]] = true;
  };

  if (cfg.per_speaker && speakers_known) {
    std::map<std::string, std::vector<std::uint32_t>> by_speaker;
    for (const auto u : aligned) by_speaker[ds.utterances[u].speaker].push_back(u);
    std::vector<std::uint32_t> pool;
    for (auto& [speaker, group] : by_speaker) {
      if (group.size() >= 2) {
        assign(group);
      } else {
        pool.insert(pool.end(), group.begin(), group.end());
      }
    }
    if (pool.size() >= 2) {
      assign(pool);
    } else {
      for (const auto u : pool) s.train[u] = true;
    }
    s.method = "per_speaker";
  } else {
    assign(aligned);
    s.method = "utterance";
  }
  return s;
}

/// Tokens passing `filter` inside the utterances flagged in `mask`.
inline std::vector<TokenRef> select_tokens(const Dataset& ds, const TokenFilter& filter, const std::vector<bool>& mask) {
  std::vector<TokenRef> out;
  for (std::uint32_t u = 0; u < ds.utterances.size(); ++u) {
    if (!mask[u]) continue;
    const auto& toks = ds.utterances[u].tokens;
    for (std::uint32_t t = 0; t < toks.size(); ++t)
      if (filter(ds.vocab, toks[t])) out.push_back({u, t});
  }
  return out;
}

/// Accuracy of a decoder on test tokens at one offset.
struct Evaluation {
  std::size_t hits = 0;
  std::size_t n = 0;
  std::size_t dropped = 0;
  std::vector<int> labels;  // in-bounds truth labels

  double accuracy() const {
    if (n == 0) throw DataError("evaluation: no in-bounds test samples");
    return static_cast<double>(hits) / static_cast<double>(n);
  }
};

inline Evaluation evaluate_at(const RidgeModel& model, const Dataset& ds, std::span<const TokenRef> tokens,
                              int offset_frames) {
  Evaluation e;
  for (const auto r : tokens) {
    const auto f = sample_frame(ds, r, offset_frames);
    if (f < 0) {
      ++e.dropped;
      continue;
    }
    const int truth = ds.token(r).label;
    e.hits += ridge_predict_row(model, ds.utterances[r.utterance].features.data.row(f)) == truth;
    ++e.n;
    e.labels.push_back(truth);
  }
  return e;
}

/// Same as evaluate_at for every offset in `offsets`, caching per-frame
/// predictions so each frame is scored once.
inline std::vector<Evaluation> evaluate_all(const RidgeModel& model, const Dataset& ds, std::span<const TokenRef> tokens,
                                            const OffsetRange& offsets) {
  std::unordered_map<std::uint32_t, std::vector<int>> cache;
  auto predicted = [&](TokenRef r, Eigen::Index f) {
    auto& preds = cache.try_emplace(r.utterance, static_cast<std::size_t>(ds.utterances[r.utterance].features.frames()), -1)
                      .first->second;
    int& p = preds[static_cast<std::size_t>(f)];
    if (p < 0) p = ridge_predict_row(model, ds.utterances[r.utterance].features.data.row(f));
    return p;
  };

  std::vector<Evaluation> out(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    auto& e = out[i];
    for (const auto r : tokens) {
      const auto f = sample_frame(ds, r, offsets.at(i));
      if (f < 0) {
        ++e.dropped;
        continue;
      }
      const int truth = ds.token(r).label;
      e.hits += predicted(r, f) == truth;
      ++e.n;
      e.labels.push_back(truth);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decodability window
// ---------------------------------------------------------------------------

struct WindowConfig {
  OffsetRange offsets;
  SplitConfig split;
  double alpha = 1.0;
  TokenFilter filter;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct DecodingPoint {
  int offset_frames = 0;
  double accuracy = 0.0;
  double baseline = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_dropped = 0;  // train + test rows outside their utterance
};

struct DecodingCurve {
  double frame_period_ms = 10.0;
  std::string split_method;
  std::vector<DecodingPoint> points;

  std::vector<double> accuracies() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.accuracy);
    return v;
  }
};

namespace detail {

struct DecodingSetup {
  UtteranceSplit split;
  std::vector<TokenRef> train;
  std::vector<TokenRef> test;
};

inline DecodingSetup prepare_decoding(const Dataset& ds, const WindowConfig& cfg) {
  cfg.offsets.validate();
  DecodingSetup s;
  s.split = split_utterances(ds, cfg.split, cfg.seed);
  s.train = select_tokens(ds, cfg.filter, s.split.train);
  s.test = select_tokens(ds, cfg.filter, s.split.test);
  if (s.train.empty()) throw DataError("decoding: no training tokens pass the filter");
  if (s.test.empty()) throw DataError("decoding: no test tokens pass the filter");
  return s;
}

struct FittedOffset {
  RidgeModel model;
  std::vector<int> train_labels;
  std::size_t dropped = 0;
};

inline FittedOffset fit_at(const Dataset& ds, std::span<const TokenRef> train, int offset, double alpha) {
  try {
    SampleSet samples = assemble_samples(ds, offset, train);
    FittedOffset out{ridge_fit(samples, alpha), std::move(samples.y), samples.dropped};
    return out;
  } catch (const DataError& e) {
    throw DataError("offset " + std::to_string(offset) + ": " + e.what());
  }
}

}  // namespace detail

/// One decoder per offset, trained on the train split and scored on the
/// test split at the same offset.
inline DecodingCurve decoding_window(const Dataset& ds, const WindowConfig& cfg) {
  const auto setup = detail::prepare_decoding(ds, cfg);
  DecodingCurve curve;
  curve.frame_period_ms = ds.frame_period_ms;
  curve.split_method = setup.split.method;
  curve.points.resize(cfg.offsets.size());

  parallel_for(cfg.offsets.size(), cfg.workers, [&](std::size_t i) {
    const int o = cfg.offsets.at(i);
    auto& pt = curve.points[i];
    pt.offset_frames = o;
    const auto fitted = detail::fit_at(ds, setup.train, o, cfg.alpha);
    const Evaluation e = evaluate_at(fitted.model, ds, setup.test, o);
    if (e.n == 0) throw DataError("offset " + std::to_string(o) + ": no in-bounds test samples");
    pt.accuracy = e.accuracy();
    pt.baseline = majority_baseline(fitted.train_labels, e.labels).accuracy;
    pt.n_train = fitted.train_labels.size();
    pt.n_test = e.n;
    pt.n_dropped = fitted.dropped + e.dropped;
  });
  return curve;
}

// ---------------------------------------------------------------------------
// Temporal generalization
// ---------------------------------------------------------------------------

struct TGMatrix {
  int position = 0;  // 1-based word position, 0 when unfiltered
  std::vector<int> offsets;
  Eigen::MatrixXd accuracy;  // [train offset][test offset]
  double baseline = 0.0;     // majority training label scored on all test tokens
  double frame_period_ms = 10.0;
  std::vector<std::size_t> n_train;  // per train offset
  std::size_t n_train_tokens = 0;
  std::size_t n_test_tokens = 0;

  std::vector<double> diagonal() const {
    std::vector<double> d(offsets.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return d;
  }
};

/// Trains a decoder per offset on tokens at `position` (0 = keep the
/// configured filter as is) and scores every decoder at every offset.
inline TGMatrix temporal_generalization(const Dataset& ds, const WindowConfig& cfg, int position) {
  WindowConfig local = cfg;
  if (position > 0) local.filter.word_position = position;
  const auto setup = detail::prepare_decoding(ds, local);

  TGMatrix tg;
  tg.position = position;
  tg.offsets = cfg.offsets.values();
  tg.frame_period_ms = ds.frame_period_ms;
  const auto n = static_cast<Eigen::Index>(tg.offsets.size());
  tg.accuracy.resize(n, n);
  tg.n_train.resize(tg.offsets.size());
  tg.n_train_tokens = setup.train.size();
  tg.n_test_tokens = setup.test.size();

  std::vector<int> train_labels, test_labels;
  for (const auto r : setup.train) train_labels.push_back(ds.token(r).label);
  for (const auto r : setup.test) test_labels.push_back(ds.token(r).label);
  tg.baseline = majority_baseline(train_labels, test_labels).accuracy;

  parallel_for(tg.offsets.size(), cfg.workers, [&](std::size_t i) {
    const auto fitted = detail::fit_at(ds, setup.train, cfg.offsets.at(i), cfg.alpha);
    tg.n_train[i] = fitted.train_labels.size();
    const auto evals = evaluate_all(fitted.model, ds, setup.test, cfg.offsets);
    for (std::size_t j = 0; j < evals.size(); ++j) {
      if (evals[j].n == 0) throw DataError("offset " + std::to_string(cfg.offsets.at(j)) + ": no in-bounds test samples");
      tg.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evals[j].accuracy();
    }
  });
  return tg;
}

}  // namespace phonedyn
