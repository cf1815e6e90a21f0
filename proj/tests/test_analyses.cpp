#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include <phonedyn/contours.hpp>
#include <phonedyn/context.hpp>
#include <phonedyn/decoding.hpp>
#include <phonedyn/parallel.hpp>
#include <phonedyn/synth.hpp>

#include "test_util.hpp"

using namespace phonedyn;

namespace {

/// ARPAbet dataset, one utterance per label sequence, 10 frames per phone,
/// word boundaries every `word_len` phones.
Dataset labelled_dataset(const std::vector<std::vector<std::string>>& utts, int word_len = 100) {
  Dataset ds;
  ds.vocab = PhonemeVocab::arpabet39();
  ds.dims = 2;
  for (std::size_t u = 0; u < utts.size(); ++u) {
    Utterance utt;
    utt.id = "u" + std::to_string(u);
    utt.speaker = "s0";
    const int frames = static_cast<int>(utts[u].size()) * 10 + 20;
    utt.features.data = RowMatrix::Zero(frames, 2);
    for (std::size_t k = 0; k < utts[u].size(); ++k) {
      PhoneToken t;
      t.utterance_id = utt.id;
      t.speaker_id = "s0";
      t.label = *ds.vocab.index_of(utts[u][k]);
      t.onset_s = (10 + 10 * static_cast<int>(k)) / 100.0;
      t.offset_s = t.onset_s + 0.1;
      t.word_index = static_cast<int>(k) / word_len;
      t.word_position = static_cast<int>(k) % word_len + 1;
      utt.tokens.push_back(t);
    }
    utt.index_onsets();
    ds.utterances.push_back(std::move(utt));
  }
  return ds;
}

SyntheticSpec small_static(double sigma) {
  SyntheticSpec s;
  s.n_phonemes = 2;
  s.n_vowels = 1;
  s.dims = 6;
  s.n_utterances = 6;
  s.n_speakers = 2;
  s.phones_per_utterance = 40;
  s.noise_sigma = sigma;
  s.seed = 3;
  return s;
}

SyntheticSpec small_context(EncodingMode mode, std::uint64_t seed) {
  SyntheticSpec s;
  s.n_phonemes = 6;
  s.n_vowels = 6;
  s.dims = 40;
  s.n_utterances = 12;
  s.phones_per_utterance = 120;
  s.mode = mode;
  s.seed = seed;
  return s;
}

bool has_vertex(const Polyline& p, double row, double col) {
  return std::any_of(p.vertices.begin(), p.vertices.end(), [&](const ContourPoint& v) {
    return std::abs(v.row - row) < 1e-12 && std::abs(v.col - col) < 1e-12;
  });
}

}  // namespace

// --- splits ----------------------------------------------------------------------------------

TEST(Split, PerSpeakerIsDisjointCoveringAndStratified) {
  const auto synth = synthesize(small_context(EncodingMode::context_invariant, 1));
  const auto& ds = synth.dataset;
  SplitConfig cfg;
  const auto s = split_utterances(ds, cfg, 9);
  EXPECT_EQ(s.method, "per_speaker");
  std::map<std::string, std::pair<int, int>> per_speaker;
  for (std::size_t u = 0; u < ds.utterances.size(); ++u) {
    EXPECT_NE(s.train[u], s.test[u]);
    auto& c = per_speaker[ds.utterances[u].speaker];
    (s.train[u] ? c.first : c.second)++;
  }
  for (const auto& [speaker, c] : per_speaker) {
    EXPECT_GE(c.first, 1) << speaker;
    EXPECT_GE(c.second, 1) << speaker;
  }
  const auto again = split_utterances(ds, cfg, 9);
  EXPECT_EQ(again.train, s.train);
}

TEST(Split, UtteranceLevelWithoutSpeakers) {
  auto ds = labelled_dataset({{"AA"}, {"AE"}, {"AH"}, {"AO"}});
  ds.utterances[2].speaker = "";
  const auto s = split_utterances(ds, {}, 1);
  EXPECT_EQ(s.method, "utterance");
  EXPECT_EQ(std::count(s.train.begin(), s.train.end(), true), 2);
  EXPECT_EQ(std::count(s.test.begin(), s.test.end(), true), 2);
}

TEST(Split, ExplicitLists) {
  const auto ds = labelled_dataset({{"AA"}, {"AE"}, {"AH"}});
  SplitConfig cfg;
  cfg.train_utterances = {"u0", "u2"};
  const auto s = split_utterances(ds, cfg, 0);
  EXPECT_EQ(s.method, "explicit");
  EXPECT_EQ(s.train, (std::vector<bool>{true, false, true}));
  EXPECT_EQ(s.test, (std::vector<bool>{false, true, false}));

  cfg.test_utterances = {"u2"};
  EXPECT_THROW(split_utterances(ds, cfg, 0), DataError);
  cfg.test_utterances = {"u9"};
  EXPECT_THROW(split_utterances(ds, cfg, 0), DataError);
}

// --- decoding window / TG ------------------------------------------------------------------------

TEST(Decoding, NoiselessStaticIsPerfectInsideWindow) {
  const auto synth = synthesize(small_static(0.0));
  WindowConfig cfg;
  cfg.offsets = {-4, 8};
  cfg.seed = 5;
  const auto curve = decoding_window(synth.dataset, cfg);
  ASSERT_EQ(curve.points.size(), 13u);
  EXPECT_EQ(curve.split_method, "per_speaker");
  for (const auto& p : curve.points) {
    EXPECT_GE(p.accuracy, 0.0);
    EXPECT_LE(p.accuracy, 1.0);
    if (p.offset_frames >= -2 && p.offset_frames <= 5) EXPECT_EQ(p.accuracy, 1.0) << p.offset_frames;
    EXPECT_GT(p.n_train, 0u);
    EXPECT_GT(p.n_test, 0u);
  }
}

TEST(Decoding, OutOfBoundsRowsAreDropped) {
  // Onsets 2 and 12 in a 20-frame stream; offset -3 drops the first token.
  const auto ds = testutil::sentinel_dataset(20, 1, {2, 12}, {0, 1});
  const std::vector<TokenRef> refs{{0, 0}, {0, 1}};
  const auto s = assemble_samples(ds, -3, refs);
  EXPECT_EQ(s.X.rows(), 1);
  EXPECT_EQ(s.X(0, 0), 9.0);
  EXPECT_EQ(s.dropped, 1u);
}

TEST(Decoding, TGDiagonalEqualsCurveExactly) {
  const auto synth = synthesize(small_static(0.3));
  WindowConfig cfg;
  cfg.offsets = {-6, 9};
  cfg.seed = 11;
  const auto curve = decoding_window(synth.dataset, cfg);
  const auto tg = temporal_generalization(synth.dataset, cfg, 0);
  ASSERT_EQ(tg.accuracy.rows(), 16);
  ASSERT_EQ(tg.accuracy.cols(), 16);
  EXPECT_EQ(tg.diagonal(), curve.accuracies());

  WindowConfig p1 = cfg;
  p1.filter.word_position = 1;
  EXPECT_EQ(temporal_generalization(synth.dataset, cfg, 1).diagonal(), decoding_window(synth.dataset, p1).accuracies());
}

TEST(Decoding, StaticPatternsGeneralizeAcrossTheWindow) {
  const auto synth = synthesize(small_static(0.1));
  WindowConfig cfg;
  cfg.offsets = {-2, 5};
  cfg.seed = 2;
  const auto tg = temporal_generalization(synth.dataset, cfg, 0);
  for (Eigen::Index i = 0; i < tg.accuracy.rows(); ++i)
    for (Eigen::Index j = 0; j < tg.accuracy.cols(); ++j)
      EXPECT_GE(tg.accuracy(i, j), 0.9 * tg.accuracy(j, j));
}

TEST(Decoding, WorkerCountDoesNotChangeResults) {
  const auto synth = synthesize(small_static(0.5));
  WindowConfig cfg;
  cfg.offsets = {-5, 7};
  cfg.seed = 4;
  const auto a = decoding_window(synth.dataset, cfg);
  cfg.workers = 4;
  const auto b = decoding_window(synth.dataset, cfg);
  EXPECT_EQ(a.accuracies(), b.accuracies());
  const auto ta = temporal_generalization(synth.dataset, cfg, 2);
  cfg.workers = 1;
  const auto tb = temporal_generalization(synth.dataset, cfg, 2);
  EXPECT_EQ(ta.accuracy, tb.accuracy);
}

TEST(Decoding, EmptySelectionsAreErrors) {
  const auto synth = synthesize(small_static(0.1));
  WindowConfig cfg;
  cfg.offsets = {0, 1};
  cfg.filter.word_position = 99;
  EXPECT_THROW(decoding_window(synth.dataset, cfg), DataError);
  cfg.filter.word_position.reset();
  cfg.offsets = {3, 1};
  EXPECT_THROW(decoding_window(synth.dataset, cfg), DataError);
}

// --- contours ----------------------------------------------------------------------------------

TEST(Contours, ConstantBelowThresholdIsEmpty) {
  const std::vector<double> c{0, 1, 2};
  EXPECT_TRUE(extract_contours(Eigen::MatrixXd::Constant(3, 3, 0.1), 0.2, c, c).empty());
}

TEST(Contours, SinglePeakGivesClosedDiamond) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(1, 1) = 1.0;
  const std::vector<double> c{0, 1, 2};
  const auto lines = extract_contours(g, 0.5, c, c);
  ASSERT_EQ(lines.size(), 1u);
  const auto& p = lines[0];
  EXPECT_TRUE(p.closed);
  ASSERT_EQ(p.vertices.size(), 5u);
  EXPECT_EQ(p.vertices.front().row, p.vertices.back().row);
  EXPECT_EQ(p.vertices.front().col, p.vertices.back().col);
  EXPECT_TRUE(has_vertex(p, 0.5, 1.0));
  EXPECT_TRUE(has_vertex(p, 1.0, 0.5));
  EXPECT_TRUE(has_vertex(p, 1.5, 1.0));
  EXPECT_TRUE(has_vertex(p, 1.0, 1.5));
}

TEST(Contours, HalfPlaneGivesOpenAntiDiagonal) {
  Eigen::MatrixXd g(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = i + j < 3 ? 1.0 : 0.0;
  const std::vector<double> c{0, 1, 2, 3};
  const auto lines = extract_contours(g, 0.5, c, c);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_FALSE(lines[0].closed);
  EXPECT_EQ(lines[0].vertices.size(), 6u);
  for (const auto& v : lines[0].vertices) EXPECT_NEAR(v.row + v.col, 2.5, 1e-12);
}

TEST(Contours, InterpolatesAndUsesCoordinates) {
  Eigen::MatrixXd g(2, 2);
  g << 0.0, 0.0, 1.0, 1.0;
  const std::vector<double> rows{-100, 0}, cols{-100, 100};
  const auto lines = extract_contours(g, 0.25, rows, cols);
  ASSERT_EQ(lines.size(), 1u);
  ASSERT_EQ(lines[0].vertices.size(), 2u);
  for (const auto& v : lines[0].vertices) EXPECT_DOUBLE_EQ(v.row, -75.0);
  EXPECT_THROW(extract_contours(g, 0.25, rows, std::vector<double>{0}), DimensionError);
}

TEST(Contours, TGThresholdValidatedAndMsCoordinates) {
  TGMatrix tg;
  tg.offsets = {-1, 0, 1};
  tg.frame_period_ms = 10.0;
  tg.accuracy = Eigen::MatrixXd::Zero(3, 3);
  tg.accuracy(1, 1) = 1.0;
  EXPECT_THROW(extract_contours(tg, 0.0), DataError);
  EXPECT_THROW(extract_contours(tg, 1.0), DataError);
  const auto lines = extract_contours(tg, 0.5);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_TRUE(has_vertex(lines[0], -5.0, 0.0));
  EXPECT_TRUE(has_vertex(lines[0], 0.0, 5.0));
}

// --- contexts ----------------------------------------------------------------------------------

TEST(Contexts, MannerPairLookup) {
  const auto ds = labelled_dataset({{"S", "AA", "Z"}, {"P", "IY", "M"}, {"AE", "T", "AH"}, {"L", "EH", "N"}});
  EXPECT_EQ(context_of(ds, {0, 1}, ContextMode::manner_pair), "fricative__fricative");
  EXPECT_EQ(context_of(ds, {1, 1}, ContextMode::manner_pair), "plosive__nasal");
  EXPECT_EQ(context_of(ds, {2, 0}, ContextMode::manner_pair), "");
  EXPECT_EQ(context_of(ds, {2, 2}, ContextMode::manner_pair), "");
  EXPECT_EQ(context_of(ds, {3, 1}, ContextMode::manner_pair), "");

  ContextSpec spec;
  spec.mode = ContextMode::manner_pair;
  const auto split = split_contexts(ds, spec);
  EXPECT_EQ(split.contexts, (std::vector<std::string>{"plosive__nasal", "fricative__fricative"}));
  EXPECT_EQ(split.dropped.size(), 7u);
  spec.min_class_size = 2;
  EXPECT_THROW(split_contexts(ds, spec), DataError);
}

TEST(Contexts, PositionsBeyondFourExcluded) {
  const auto ds = labelled_dataset({{"AA", "AE", "AH", "AO", "AW", "AY", "EH"}}, 7);
  ContextSpec spec;
  const auto split = split_contexts(ds, spec);
  EXPECT_EQ(split.contexts, (std::vector<std::string>{"p1", "p2", "p3", "p4"}));
  std::size_t total = 0;
  for (const auto& [ctx, toks] : split.tokens) total += toks.size();
  EXPECT_EQ(total, 4u);
}

TEST(Contexts, SubsamplesAreDisjointAndCounted) {
  const auto synth = synthesize(small_context(EncodingMode::context_invariant, 8));
  ContextSpec spec;
  spec.subsample_n = 150;
  spec.seed = 21;
  const OffsetRange offsets{0, 2};
  const auto report = cross_context_generalization(synth.dataset, spec, offsets);
  ASSERT_EQ(report.contexts, (std::vector<std::string>{"p1", "p2", "p3", "p4"}));
  EXPECT_EQ(report.curves.size(), 16u);
  EXPECT_EQ(report.offset_ms, (std::vector<double>{0, 10, 20}));
  for (const auto& ctx : report.contexts) {
    const auto& s = report.samples.at(ctx);
    EXPECT_EQ(s.train.size(), 120u);
    EXPECT_EQ(s.test.size(), 30u);
    std::set<TokenRef> train(s.train.begin(), s.train.end());
    for (const auto r : s.test) EXPECT_EQ(train.count(r), 0u);
    std::size_t hist = 0;
    for (const auto& [label, c] : report.class_histograms.at(ctx)) hist += c;
    EXPECT_EQ(hist, 150u);
  }
  const auto again = cross_context_generalization(synth.dataset, spec, offsets, 1.0, 3);
  for (std::size_t i = 0; i < report.curves.size(); ++i) {
    EXPECT_EQ(report.curves[i].accuracy, again.curves[i].accuracy);
    EXPECT_EQ(report.curves[i].baseline, again.curves[i].baseline);
  }
  spec.seed = 22;
  const auto other = cross_context_generalization(synth.dataset, spec, offsets);
  EXPECT_NE(other.samples.at("p1").train, report.samples.at("p1").train);
}

TEST(Contexts, SmallContextsDroppedWithReason) {
  const auto synth = synthesize(small_context(EncodingMode::context_invariant, 8));
  const auto split = split_contexts(synth.dataset, ContextSpec{});
  const auto p4 = split.tokens.at("p4").size();
  ContextSpec spec;
  spec.subsample_n = p4 + 1;
  spec.min_class_size = 1;
  const auto report = cross_context_generalization(synth.dataset, spec, OffsetRange{0, 0});
  EXPECT_EQ(std::count(report.contexts.begin(), report.contexts.end(), "p4"), 0);
  ASSERT_FALSE(report.dropped.empty());
  EXPECT_EQ(report.dropped.back().context, "p4");
  EXPECT_EQ(report.dropped.back().count, p4);
  spec.subsample_n = 100000;
  EXPECT_THROW(cross_context_generalization(synth.dataset, spec, OffsetRange{0, 0}), DataError);
}

// --- effects -----------------------------------------------------------------------------------

namespace {

GeneralizationReport toy_report(const std::vector<std::string>& contexts) {
  GeneralizationReport r;
  r.contexts = contexts;
  for (int ms = -50; ms <= 150; ms += 10) r.offset_ms.push_back(ms);
  const std::size_t no = r.offset_ms.size();
  r.curves.assign(contexts.size() * contexts.size(), ContextCurve{std::vector<double>(no, 0.5), std::vector<double>(no, 0.5)});
  return r;
}

}  // namespace

TEST(Effects, WorkedExamples) {
  auto r = toy_report({"a", "b"});
  EXPECT_DOUBLE_EQ(generalization_effect(r, "a", "b", {}), 0.0);

  auto& c = r.curve("a", "b");
  for (std::size_t i = 0; i < r.offset_ms.size(); ++i) {
    c.accuracy[i] = 0.4;
    c.baseline[i] = 0.25;
  }
  EXPECT_NEAR(generalization_effect(r, "a", "b", {}), 0.15, 1e-15);

  // Ramp 0.2 -> 0.4 across 0..100 ms, garbage outside the window.
  for (std::size_t i = 0; i < r.offset_ms.size(); ++i) {
    const double ms = r.offset_ms[i];
    c.accuracy[i] = ms < 0 || ms > 100 ? 0.9 : 0.2 + 0.2 * ms / 100.0;
    c.baseline[i] = 0.2;
  }
  EXPECT_NEAR(generalization_effect(r, "a", "b", {0, 100}), 0.1, 1e-12);
  EXPECT_THROW(generalization_effect(r, "a", "b", {1, 9}), DataError);
  EXPECT_THROW(generalization_effect(r, "a", "zz", {}), DataError);
}

TEST(Effects, SelfCorrelationOverTwelvePairs) {
  auto r = toy_report({"p1", "p2", "p3", "p4"});
  Rng rng(3);
  for (auto& c : r.curves)
    for (auto& a : c.accuracy) a = rng.uniform();
  const auto corr = effect_correlation(r, r, {});
  EXPECT_EQ(corr.pairs.size(), 12u);
  EXPECT_NEAR(corr.stats.r, 1.0, 1e-15);
  for (const auto& p : corr.pairs) {
    EXPECT_NE(p.train, p.test);
    EXPECT_EQ(p.effect_a, p.effect_b);
  }
  EXPECT_THROW(effect_correlation(r, toy_report({"p1", "p2", "p3"}), {}), DataError);
}

TEST(Effects, InvariantPositiveEntangledNull) {
  ContextSpec spec;
  spec.subsample_n = 150;
  spec.seed = 5;
  const OffsetRange offsets{0, 5};
  const auto inv = cross_context_generalization(synthesize(small_context(EncodingMode::context_invariant, 31)).dataset,
                                                spec, offsets);
  for (const auto& a : inv.contexts)
    for (const auto& b : inv.contexts) EXPECT_GT(generalization_effect(inv, a, b, {0, 50}), 0.2) << a << "->" << b;

  auto ent_spec = small_context(EncodingMode::context_entangled, 32);
  ent_spec.n_utterances = 40;
  spec.subsample_n = 400;
  const auto ent = cross_context_generalization(synthesize(ent_spec).dataset, spec, offsets);
  for (const auto& a : ent.contexts)
    for (const auto& b : ent.contexts) {
      const double e = generalization_effect(ent, a, b, {0, 50});
      if (a == b) {
        EXPECT_GT(e, 0.2);
      } else {
        EXPECT_LE(std::abs(e), 0.08) << a << "->" << b;
      }
    }
}

// --- parallel_for ------------------------------------------------------------------------------

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Parallel, LowestFailingIndexWins) {
  for (const unsigned workers : {1u, 3u, 8u}) {
    try {
      parallel_for(64, workers, [](std::size_t i) {
        if (i % 10 == 7) throw DataError("job " + std::to_string(i));
      });
      FAIL() << "no exception";
    } catch (const DataError& e) {
      EXPECT_STREQ(e.what(), "job 7");
    }
  }
}
