#pragma once

// Cross-context generalization: decoders trained on phones from one context
// (word position, or the manner pair of the neighboring phones) are scored
// on every other context, against a majority baseline taken from the
// training context.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "decoding.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "ridge.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace phonedyn {

enum class ContextMode { word_position, manner_pair };

struct ContextSpec {
  ContextMode mode = ContextMode::word_position;
  bool vowels_only = true;
  std::size_t subsample_n = 4500;
  double train_fraction = 0.8;
  std::size_t min_class_size = 1;
  std::uint64_t seed = 0;
};

struct DroppedContext {
  std::string context;
  std::size_t count = 0;
  std::string reason;
};

struct ContextSplit {
  std::vector<std::string> contexts;  // retained, canonical order
  std::map<std::string, std::vector<TokenRef>> tokens;
  std::vector<DroppedContext> dropped;
};

/// Every context label the mode can produce, in reporting order.
inline std::vector<std::string> canonical_contexts(ContextMode mode) {
  std::vector<std::string> out;
  if (mode == ContextMode::word_position) {
    for (int p = 1; p <= 4; ++p) out.push_back("p" + std::to_string(p));
  } else {
    for (const auto a : {Manner::plosive, Manner::fricative, Manner::nasal})
      for (const auto b : {Manner::plosive, Manner::fricative, Manner::nasal})
        out.push_back(std::string(to_string(a)) + "__" + std::string(to_string(b)));
  }
  return out;
}

/// Context label of a token, or "" when the token has none under `mode`.
inline std::string context_of(const Dataset& ds, TokenRef r, ContextMode mode) {
  const auto& tok = ds.token(r);
  if (mode == ContextMode::word_position)
    return tok.word_position <= 4 ? "p" + std::to_string(tok.word_position) : std::string();

  const PhoneToken* prev = ds.neighbor(r, -1);
  const PhoneToken* next = ds.neighbor(r, +1);
  if (!prev || !next) return {};
  const Manner a = ds.vocab[prev->label].manner, b = ds.vocab[next->label].manner;
  if (a == Manner::other || b == Manner::other) return {};
  return std::string(to_string(a)) + "__" + std::string(to_string(b));
}

inline ContextSplit split_contexts(const Dataset& ds, const ContextSpec& spec) {
  ContextSplit split;
  for (std::uint32_t u = 0; u < ds.utterances.size(); ++u) {
    const auto& toks = ds.utterances[u].tokens;
    for (std::uint32_t t = 0; t < toks.size(); ++t) {
      if (spec.vowels_only && !ds.vocab.is_vowel(toks[t].label)) continue;
      auto ctx = context_of(ds, {u, t}, spec.mode);
      if (!ctx.empty()) split.tokens[ctx].push_back({u, t});
    }
  }
  for (const auto& ctx : canonical_contexts(spec.mode)) {
    const auto it = split.tokens.find(ctx);
    const std::size_t count = it == split.tokens.end() ? 0 : it->second.size();
    if (count == 0 || count < spec.min_class_size) {
      split.dropped.push_back({ctx, count, "fewer than min_class_size=" + std::to_string(spec.min_class_size) + " tokens"});
      split.tokens.erase(ctx);
    } else {
      split.contexts.push_back(ctx);
    }
  }
  if (split.contexts.empty()) throw DataError("split_contexts: no context class retained");
  return split;
}

struct ContextCurve {
  std::vector<double> accuracy;  // per offset
  std::vector<double> baseline;
};

struct ContextSamples {
  std::vector<TokenRef> train;
  std::vector<TokenRef> test;
};

struct GeneralizationReport {
  std::vector<std::string> contexts;
  std::vector<double> offset_ms;
  std::vector<ContextCurve> curves;  // row-major [train context][test context]
  std::map<std::string, std::map<int, std::size_t>> class_histograms;
  std::map<std::string, ContextSamples> samples;
  std::vector<DroppedContext> dropped;

  std::size_t index_of(const std::string& ctx) const {
    const auto it = std::find(contexts.begin(), contexts.end(), ctx);
    if (it == contexts.end()) throw DataError("generalization report has no context \"" + ctx + "\"");
    return static_cast<std::size_t>(it - contexts.begin());
  }
  const ContextCurve& curve(const std::string& train, const std::string& test) const {
    return curves[index_of(train) * contexts.size() + index_of(test)];
  }
  ContextCurve& curve(const std::string& train, const std::string& test) {
    return curves[index_of(train) * contexts.size() + index_of(test)];
  }
};

/// Subsamples `subsample_n` tokens per context (seeded), splits each
/// subsample train/test, fits one decoder per (context, offset) and scores
/// it on every context's test portion at the same offset.
inline GeneralizationReport cross_context_generalization(const Dataset& ds, const ContextSpec& spec,
                                                         const OffsetRange& offsets, double alpha = 1.0,
                                                         unsigned workers = 1) {
  offsets.validate();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DataError("cross_context_generalization: train fraction must be in (0, 1)");
  if (spec.subsample_n < 2) throw DataError("cross_context_generalization: subsample_n must be >= 2");

  const ContextSplit split = split_contexts(ds, spec);
  GeneralizationReport report;
  report.dropped = split.dropped;
  for (const auto& ctx : split.contexts) {
    const std::size_t count = split.tokens.at(ctx).size();
    if (count < spec.subsample_n) {
      report.dropped.push_back({ctx, count, "fewer than subsample_n=" + std::to_string(spec.subsample_n) + " tokens"});
    } else {
      report.contexts.push_back(ctx);
    }
  }
  if (report.contexts.size() < 2)
    throw DataError("cross_context_generalization: need at least 2 retained contexts, got " +
                    std::to_string(report.contexts.size()));

  // All randomness happens here, before any parallel work.
  Rng rng(spec.seed);
  const auto n_train = static_cast<std::size_t>(std::clamp<long long>(
      std::llround(spec.train_fraction * static_cast<double>(spec.subsample_n)), 1,
      static_cast<long long>(spec.subsample_n) - 1));
  for (const auto& ctx : report.contexts) {
    std::vector<TokenRef> pool = split.tokens.at(ctx);
    shuffle(std::span<TokenRef>(pool), rng);
    pool.resize(spec.subsample_n);
    ContextSamples s;
    s.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    auto& hist = report.class_histograms[ctx];
    for (const auto r : pool) ++hist[ds.token(r).label];
    report.samples[ctx] = std::move(s);
  }

  const std::size_t nc = report.contexts.size(), no = offsets.size();
  for (std::size_t i = 0; i < no; ++i) report.offset_ms.push_back(offsets.at(i) * ds.frame_period_ms);
  report.curves.assign(nc * nc, ContextCurve{std::vector<double>(no), std::vector<double>(no)});

  parallel_for(nc * no, workers, [&](std::size_t job) {
    const std::size_t c = job / no, oi = job % no;
    const int o = offsets.at(oi);
    const auto& train_ctx = report.contexts[c];
    const auto fitted = detail::fit_at(ds, report.samples.at(train_ctx).train, o, alpha);
    for (std::size_t t = 0; t < nc; ++t) {
      const Evaluation e = evaluate_at(fitted.model, ds, report.samples.at(report.contexts[t]).test, o);
      if (e.n == 0)
        throw DataError("context " + report.contexts[t] + ", offset " + std::to_string(o) + ": no in-bounds test samples");
      auto& curve = report.curves[c * nc + t];
      curve.accuracy[oi] = e.accuracy();
      curve.baseline[oi] = majority_baseline(fitted.train_labels, e.labels).accuracy;
    }
  });
  return report;
}

/// Inclusive millisecond window.
struct MsRange {
  double lo = 0.0;
  double hi = 100.0;
};

/// Mean of (accuracy - baseline) over the offsets inside `window`.
inline double generalization_effect(const GeneralizationReport& report, const std::string& train,
                                    const std::string& test, const MsRange& window) {
  const auto& curve = report.curve(train, test);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < report.offset_ms.size(); ++i) {
    const double ms = report.offset_ms[i];
    if (ms < window.lo - 1e-9 || ms > window.hi + 1e-9) continue;
    sum += curve.accuracy[i] - curve.baseline[i];
    ++n;
  }
  if (n == 0)
    throw DataError("generalization_effect: no offsets inside window " + text::format_double(window.lo) + ".." +
                    text::format_double(window.hi) + " ms");
  return sum / static_cast<double>(n);
}

struct EffectPair {
  std::string train;
  std::string test;
  double effect_a = 0.0;
  double effect_b = 0.0;
};

struct EffectCorrelation {
  std::vector<EffectPair> pairs;
  PearsonResult stats;
};

/// Pairs off-diagonal effects of two reports over the same contexts and
/// correlates them.
inline EffectCorrelation effect_correlation(const GeneralizationReport& a, const GeneralizationReport& b,
                                            const MsRange& window) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (sorted(a.contexts) != sorted(b.contexts))
    throw DataError("effect_correlation: reports cover different context sets");

  EffectCorrelation out;
  std::vector<double> xa, xb;
  for (const auto& train : a.contexts)
    for (const auto& test : a.contexts) {
      if (train == test) continue;
      EffectPair p{train, test, generalization_effect(a, train, test, window), generalization_effect(b, train, test, window)};
      xa.push_back(p.effect_a);
      xb.push_back(p.effect_b);
      out.pairs.push_back(std::move(p));
    }
  out.stats = pearson(xa, xb);
  return out;
}

}  // namespace phonedyn
