// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include <phonedyn/cli.hpp>
#include <phonedyn/phonedyn.hpp>

#include "test_util.hpp"

using namespace phonedyn;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- AC1 ------------------------------------------------------------------------------------

Outcome ac1_ridge_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  std::size_t label_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(rng.between(2, 50));
    const auto d = static_cast<Eigen::Index>(rng.between(1, 8));
    const int k = static_cast<int>(rng.between(2, 5));
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = 2.0 * rng.normal() + rng.uniform();
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    std::vector<int> classes(static_cast<std::size_t>(k));
    std::iota(classes.begin(), classes.end(), 0);
    const double alpha = std::pow(10.0, 3.0 * rng.uniform() - 1.5);

    // Oracle: explicit inverse of the regularized centered normal equations.
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, y[static_cast<std::size_t>(i)]) = 1.0;
    const Eigen::RowVectorXd xm = X.colwise().sum() / static_cast<double>(n);
    const Eigen::RowVectorXd ym = Y.colwise().sum() / static_cast<double>(n);
    const Eigen::MatrixXd Xc = X.rowwise() - xm, Yc = Y.rowwise() - ym;
    const Eigen::MatrixXd W =
        (Xc.transpose() * Xc + alpha * Eigen::MatrixXd::Identity(d, d)).inverse() * Xc.transpose() * Yc;
    const Eigen::VectorXd b = (ym - xm * W).transpose();

    const auto m = ridge_fit(X, y, alpha, classes);
    const double scale = std::max(W.cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (m.weights - W).cwiseAbs().maxCoeff() / scale);

    Eigen::MatrixXd T(n + 20, d);
    T.topRows(n) = X;
    for (Eigen::Index i = n; i < T.rows(); ++i)
      for (Eigen::Index j = 0; j < d; ++j) T(i, j) = 3.0 * rng.normal();
    const auto predicted = ridge_predict(m, T);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      const Eigen::VectorXd s = W.transpose() * T.row(i).transpose() + b;
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < s.size(); ++c)
        if (s(c) > s(best)) best = c;
      if (predicted[static_cast<std::size_t>(i)] != best) ++label_mismatch;
    }
  }
  return {worst <= 1e-8 && label_mismatch == 0,
          "max relative weight error " + f6(worst) + ", label mismatches " + std::to_string(label_mismatch)};
}

// --- synthetic datasets shared by AC2-AC4 ------------------------------------------------------

SyntheticSpec static39() {
  SyntheticSpec s;  // 39 phonemes, 15 vowels, window -2..+5, sigma 0.1
  s.dims = 64;
  s.n_utterances = 40;
  s.phones_per_utterance = 150;
  s.seed = 101;
  return s;
}

Dataset preprocessed(const SyntheticDataset& synth) {
  Dataset ds = synth.dataset;
  regress_out(ds, fit_dataset_projector(ds, synth.covariates));
  return ds;
}

Outcome ac2_window(const Dataset& ds) {
  WindowConfig cfg;  // offsets -80..79
  cfg.seed = 7;
  const auto curve = decoding_window(ds, cfg);
  double min_inside = 1.0, max_outside = 0.0;
  for (const auto& p : curve.points) {
    if (p.offset_frames >= -2 && p.offset_frames <= 5) min_inside = std::min(min_inside, p.accuracy);
    if (p.offset_frames < -6 || p.offset_frames > 9) max_outside = std::max(max_outside, std::abs(p.accuracy - p.baseline));
  }
  return {curve.points.size() == 160 && min_inside >= 0.95 && max_outside <= 0.05,
          std::to_string(ds.num_tokens()) + " tokens, min accuracy in [-2,+5] " + f6(min_inside) +
              ", max |accuracy - baseline| outside [-6,+9] " + f6(max_outside)};
}

Outcome ac3_diagonal(const Dataset& ds) {
  WindowConfig cfg;
  cfg.offsets = {-12, 15};
  cfg.seed = 13;
  cfg.workers = 2;
  const auto curve = decoding_window(ds, cfg);
  const auto tg = temporal_generalization(ds, cfg, 0);
  std::size_t diff = 0;
  const auto diag = tg.diagonal();
  const auto acc = curve.accuracies();
  for (std::size_t i = 0; i < acc.size(); ++i) diff += diag[i] != acc[i];

  WindowConfig p1 = cfg;
  p1.filter.word_position = 1;
  const auto d1 = temporal_generalization(ds, cfg, 1).diagonal();
  const auto a1 = decoding_window(ds, p1).accuracies();
  for (std::size_t i = 0; i < a1.size(); ++i) diff += d1[i] != a1[i];
  return {diff == 0, std::to_string(2 * acc.size()) + " diagonal entries compared (all tokens and p1), " +
                         std::to_string(diff) + " differ"};
}

Outcome ac4_dynamics(const Dataset& static_ds) {
  SyntheticSpec rot;
  rot.n_phonemes = 8;
  rot.n_vowels = 8;
  rot.dims = 72;
  rot.n_utterances = 150;
  rot.phones_per_utterance = 100;
  rot.mode = EncodingMode::rotating;
  rot.seed = 202;
  const auto rot_ds = preprocessed(synthesize(rot));

  WindowConfig cfg;
  cfg.offsets = {-4, 7};
  cfg.seed = 3;
  const auto tg = temporal_generalization(rot_ds, cfg, 0);
  const auto in_window = [](int o) { return o >= -2 && o <= 5; };
  double worst_rot = 0.0, worst_all = 0.0, min_diag = 1.0;
  for (std::size_t i = 0; i < tg.offsets.size(); ++i) {
    for (std::size_t j = 0; j < tg.offsets.size(); ++j) {
      const double a = tg.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::abs(tg.offsets[i] - tg.offsets[j]) < 2) continue;
      worst_all = std::max(worst_all, std::abs(a - tg.baseline));
      if (in_window(tg.offsets[i]) && in_window(tg.offsets[j]))
        worst_rot = std::max(worst_rot, std::abs(a - tg.baseline));
    }
    if (tg.offsets[i] >= -2 && tg.offsets[i] <= 5)
      min_diag = std::min(min_diag, tg.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
  }

  WindowConfig sc;
  sc.offsets = {-2, 5};
  sc.seed = 3;
  const auto st = temporal_generalization(static_ds, sc, 0);
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < st.accuracy.rows(); ++i)
    for (Eigen::Index j = 0; j < st.accuracy.cols(); ++j)
      worst_ratio = std::min(worst_ratio, st.accuracy(i, j) / st.accuracy(j, j));

  return {worst_rot <= 0.05 && min_diag >= 0.9 && worst_ratio >= 0.9,
          "rotating: " + std::to_string(rot_ds.num_tokens()) + " tokens, diagonal min " + f6(min_diag) +
              ", max |off-diagonal - baseline| at |delta|>=2 in window " + f6(worst_rot) + " (whole matrix " +
              f6(worst_all) + ")" +
              "; static: min acc(o,o')/acc(o',o') in window " + f6(worst_ratio)};
}

// --- AC5 ------------------------------------------------------------------------------------

SyntheticSpec context_spec(EncodingMode mode, int dims, std::uint64_t seed) {
  SyntheticSpec s;
  s.n_phonemes = 10;
  s.n_vowels = 10;
  s.dims = dims;
  s.n_utterances = 60;
  s.phones_per_utterance = 150;
  s.mode = mode;
  s.seed = seed;
  return s;
}

Outcome ac5_contexts() {
  ContextSpec spec;
  spec.subsample_n = 1000;
  spec.seed = 17;
  const OffsetRange offsets{0, 10};
  const MsRange window{0, 100};

  auto run = [&](EncodingMode mode, int dims, std::uint64_t seed) {
    return cross_context_generalization(preprocessed(synthesize(context_spec(mode, dims, seed))), spec, offsets, 1.0, 2);
  };
  const auto inv = run(EncodingMode::context_invariant, 32, 301);
  const auto ent = run(EncodingMode::context_entangled, 64, 302);
  const auto inv2 = run(EncodingMode::context_invariant, 32, 303);

  double min_inv = 1.0, max_ent = 0.0;
  for (const auto& a : inv.contexts)
    for (const auto& b : inv.contexts)
      if (a != b) min_inv = std::min(min_inv, generalization_effect(inv, a, b, window));
  for (const auto& a : ent.contexts)
    for (const auto& b : ent.contexts)
      if (a != b) max_ent = std::max(max_ent, std::abs(generalization_effect(ent, a, b, window)));

  std::string corr_detail;
  bool corr_ok = false;
  try {
    const auto c = effect_correlation(inv, inv2, window);
    corr_ok = c.pairs.size() == 12 && inv.contexts.size() == 4;
    corr_detail = std::to_string(c.pairs.size()) + " pairs, r=" + f6(c.stats.r);
  } catch (const Error& e) {
    corr_detail = std::string("correlation failed: ") + e.what();
  }
  return {min_inv > 0.2 && max_ent <= 0.05 && corr_ok,
          "invariant min off-diagonal effect " + f6(min_inv) + ", entangled max |effect| " + f6(max_ent) + "; " +
              corr_detail};
}

// --- AC6 ------------------------------------------------------------------------------------

Outcome ac6_projector() {
  Rng rng(606);
  double worst_dot = 0.0, worst_idem = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(rng.between(20, 400));
    const auto d = static_cast<Eigen::Index>(rng.between(2, 64));
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal() * (1.0 + j % 3);
    Eigen::MatrixXd C(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      C(i, 0) = X(i, 0) - 0.5 * X(i, d - 1) + 0.1 * rng.normal();
      C(i, 1) = rng.uniform() < 0.4 ? 0.0 : 100.0 + 150.0 * rng.uniform();
    }
    const auto p = fit_projector(X, C);
    const Eigen::MatrixXd once = project_out(p, X);
    const Eigen::MatrixXd twice = project_out(p, once);
    worst_dot = std::max(worst_dot, (once * p.directions).cwiseAbs().maxCoeff());
    worst_idem = std::max(worst_idem, (twice - once).cwiseAbs().maxCoeff());
  }
  return {worst_dot <= 1e-10 && worst_idem <= 1e-12,
          "max |row . direction| " + f6(worst_dot) + ", max idempotence gap " + f6(worst_idem)};
}

// --- AC7 ------------------------------------------------------------------------------------

double t_pdf(double t, double df) {
  return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi) *
         std::pow(1 + t * t / df, -(df + 1) / 2);
}

Outcome ac7_statistics() {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> up, down;
  for (const double v : x) {
    up.push_back(3 * v - 2);
    down.push_back(-0.5 * v + 7);
  }
  const double r_up = pearson(x, up).r, r_down = pearson(x, down).r;

  // n = 10 data with sample r exactly 0.6.
  Rng rng(77);
  Eigen::VectorXd a(10), b(10);
  for (int i = 0; i < 10; ++i) {
    a(i) = rng.normal();
    b(i) = rng.normal();
  }
  a.array() -= a.mean();
  a.normalize();
  b.array() -= b.mean();
  b -= b.dot(a) * a;
  b.normalize();
  const Eigen::VectorXd yv = 0.6 * a + 0.8 * b;
  const auto res = pearson(std::vector<double>(a.data(), a.data() + 10), std::vector<double>(yv.data(), yv.data() + 10));

  const double t = res.r * std::sqrt(8.0) / std::sqrt(1 - res.r * res.r);
  const int steps = 20000;
  const double h = t / steps;
  double s = t_pdf(0, 8) + t_pdf(t, 8);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * t_pdf(i * h, 8);
  const double oracle = 1.0 - 2.0 * s * h / 3.0;

  std::vector<int> labels(39);
  std::iota(labels.begin(), labels.end(), 0);
  const double h39 = label_entropy(labels);

  const bool ok = r_up == 1.0 && r_down == -1.0 && std::abs(res.p - 0.0667) <= 0.0005 &&
                  std::abs(res.p - oracle) <= 0.0005 && std::abs(h39 - std::log2(39.0)) <= 1e-6;
  return {ok, "r=" + f6(r_up) + "/" + f6(r_down) + ", p(n=10,r=" + f6(res.r) + ")=" + f6(res.p) + " vs integration " +
                  f6(oracle) + ", H(uniform 39)=" + f6(h39) + " bits"};
}

// --- AC8 ------------------------------------------------------------------------------------

Outcome ac8_logmel() {
  LogmelConfig cfg;
  Waveform w;
  w.samples.resize(16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 16000.0);
  const auto out = logmel(w, cfg);

  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 40; ++m) {
    const double center = hz(mel(20.0) + (mel(8000.0) - mel(20.0)) * (m + 1) / 41.0);
    if (std::abs(center - 1000.0) < best) {
      best = std::abs(center - 1000.0);
      nearest = static_cast<std::size_t>(m);
    }
  }
  std::size_t wrong = 0;
  for (Eigen::Index f = 0; f < out.frames(); ++f) {
    Eigen::Index arg = 0;
    out.data.row(f).maxCoeff(&arg);
    wrong += static_cast<std::size_t>(arg) != nearest;
  }

  std::size_t count_errors = 0;
  for (const std::size_t n : {400u, 559u, 560u, 4321u, 16000u}) {
    Waveform v;
    v.samples.assign(n, 0.25);
    count_errors += static_cast<std::size_t>(logmel(v, cfg).frames()) != 1 + (n - 400) / 160;
  }
  return {wrong == 0 && count_errors == 0 && out.dims() == 40 && out.frames() == 98,
          "argmax band " + std::to_string(nearest) + " on " + std::to_string(out.frames() - static_cast<Eigen::Index>(wrong)) +
              "/" + std::to_string(out.frames()) + " frames, frame-count mismatches " + std::to_string(count_errors) +
              ", dims " + std::to_string(out.dims())};
}

// --- AC9 ------------------------------------------------------------------------------------

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  cli " << args.front() << " failed: " << e.str();
  return code;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = testutil::slurp(e.path());
  return files;
}

Outcome ac9_determinism() {
  testutil::TempDir root("acceptance_ac9");
  const fs::path in = root / "input";
  fs::create_directories(in);

  testutil::spit(in / "spec.json", R"({"n_phonemes": 14, "n_vowels": 8, "dims": 40, "n_utterances": 24,
    "phones_per_utterance": 90, "n_speakers": 3, "mode": "context_invariant", "seed": 9})");

  // Audio input for logmel: tones per label, one aligned phone per 100 ms.
  {
    const auto vocab = PhonemeVocab::arpabet39();
    std::ofstream align(in / "audio_align.tsv");
    json wavs = json::object();
    Rng rng(5);
    for (int u = 0; u < 6; ++u) {
      const std::string id = "a" + std::to_string(u);
      Waveform w;
      w.samples.assign(16000, 0.0);
      std::vector<PhoneToken> toks;
      for (int k = 0; k < 8; ++k) {
        const int label = static_cast<int>(rng.below(3));
        for (int s = 1600 * (k + 1); s < 1600 * (k + 2); ++s)
          w.samples[static_cast<std::size_t>(s)] =
              0.4 * std::sin(2.0 * std::numbers::pi * (150.0 + 400.0 * label) * s / 16000.0) + 0.01 * rng.normal();
        toks.push_back({id, "spk" + std::to_string(u % 2), label, 0.1 * (k + 1), 0.1 * (k + 2), k / 3, k % 3 + 1});
      }
      write_alignment(align, toks, vocab);
      write_wav(in / (id + ".wav"), w);
      wavs[id] = id + ".wav";
    }
    testutil::spit(in / "audio.json",
                   json{{"frame_period_ms", 10.0}, {"alignments", "audio_align.tsv"}, {"wavs", wavs}}.dump(2));
  }

  bool ok = true;
  if (cli_run({"synth", "--spec", (in / "spec.json").string(), "--out", (in / "data").string()}) != 0) return {false, "synth failed"};
  const std::string manifest = (in / "data" / "manifest.json").string();
  // Fixed inputs for correlate and plot.
  const std::string fixed = (in / "fixed").string();
  auto with = [](std::vector<std::string> a, std::initializer_list<std::string> more) {
    a.insert(a.end(), more);
    return a;
  };
  ok &= cli_run(with({"context"}, {"--manifest", manifest, "--offsets", "-2..10", "--subsample-n", "150", "--seed", "1",
                                    "--out", fixed + "/ctx1"})) == 0;
  ok &= cli_run(with({"context"}, {"--manifest", manifest, "--offsets", "-2..10", "--subsample-n", "150", "--seed", "2",
                                    "--out", fixed + "/ctx2"})) == 0;
  ok &= cli_run({"window", "--manifest", manifest, "--offsets", "-10..15", "--out", fixed + "/window"}) == 0;
  ok &= cli_run({"tg", "--manifest", manifest, "--offsets", "-6..10", "--out", fixed + "/tg"}) == 0;
  ok &= cli_run({"correlate", "--primary", fixed + "/ctx1", "--acoustic", fixed + "/ctx2", "--out", fixed + "/corr"}) == 0;
  ok &= cli_run({"logmel", "--manifest", (in / "audio.json").string(), "--out", fixed + "/logmel"}) == 0;
  if (!ok) return {false, "fixed inputs failed"};

  std::vector<std::string> stdout_validate;
  auto pipeline = [&](const std::string& name, const std::string& workers) {
    const std::string out = (root / name).string();
    bool good = true;
    std::string text;
    good &= cli_run({"validate", "--manifest", manifest}, &text) == 0;
    stdout_validate.push_back(text);
    good &= cli_run({"synth", "--spec", (in / "spec.json").string(), "--out", out + "/synth"}) == 0;
    good &= cli_run({"logmel", "--manifest", (in / "audio.json").string(), "--out", out + "/logmel", "--workers",
                     workers}) == 0;
    good &= cli_run({"preprocess", "--manifest", manifest, "--out", out + "/preprocess"}) == 0;
    good &= cli_run({"window", "--manifest", manifest, "--offsets", "-10..15", "--seed", "4", "--workers", workers,
                     "--out", out + "/window"}) == 0;
    good &= cli_run({"window", "--manifest", fixed + "/logmel/manifest.json", "--offsets", "-3..8", "--workers", workers,
                     "--out", out + "/window_logmel"}) == 0;
    good &= cli_run({"tg", "--manifest", manifest, "--offsets", "-6..10", "--seed", "4", "--workers", workers, "--out",
                     out + "/tg"}) == 0;
    good &= cli_run({"context", "--manifest", manifest, "--offsets", "-2..10", "--subsample-n", "150", "--seed", "4",
                     "--workers", workers, "--out", out + "/context"}) == 0;
    good &= cli_run({"context", "--manifest", manifest, "--context-mode", "manner", "--offsets", "0..4",
                     "--subsample-n", "15", "--min-class-size", "15", "--workers", workers, "--out",
                     out + "/context_manner"}) == 0;
    good &= cli_run({"correlate", "--primary", fixed + "/ctx1", "--acoustic", fixed + "/ctx2", "--out",
                     out + "/correlate"}) == 0;
    for (const char* kind : {"window", "tg"})
      good &= cli_run({"plot", "--results", fixed + "/" + kind, "--kind", kind, "--out", out + "/plots"}) == 0;
    good &= cli_run({"plot", "--results", fixed + "/corr", "--kind", "effects", "--out", out + "/plots"}) == 0;
    return good;
  };
  ok &= pipeline("run_a", "1");
  ok &= pipeline("run_b", "1");
  ok &= pipeline("run_c", "8");
  if (!ok) return {false, "a subcommand failed"};

  const auto a = tree(root / "run_a"), b = tree(root / "run_b"), c = tree(root / "run_c");
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto* other : {&b, &c}) {
    if (other->size() != a.size()) ++differing;
    for (const auto& [name, bytes] : a) {
      const auto it = other->find(name);
      if (it == other->end() || it->second != bytes) {
        ++differing;
        if (first_diff.empty()) first_diff = name;
      }
    }
  }
  std::size_t csv_json = 0;
  std::set<std::string> covered;
  for (const auto& [name, bytes] : a) {
    const auto ext = fs::path(name).extension();
    if (ext == ".csv" || ext == ".json") {
      ++csv_json;
      covered.insert(name.substr(0, name.find('/')));
    }
  }
  std::vector<std::string> missing;
  for (const char* d : {"synth", "logmel", "preprocess", "window", "window_logmel", "tg", "context", "context_manner",
                        "correlate"})
    if (!covered.contains(d)) missing.push_back(d);
  const bool svgs = a.contains("plots/window.svg") && a.contains("plots/tg.svg") &&
                    a.contains("plots/effects.svg");
  const bool stdout_same = stdout_validate[0] == stdout_validate[1] && stdout_validate[0] == stdout_validate[2];
  return {differing == 0 && stdout_same && missing.empty() && svgs,
          std::to_string(a.size()) + " files per run (" + std::to_string(csv_json) +
              " CSV/JSON), workers 1/1/8, differing " + std::to_string(differing) +
              (first_diff.empty() ? "" : " (first: " + first_diff + ")") +
              ", validate stdout identical: " + (stdout_same ? "yes" : "no") +
              (missing.empty() ? "" : ", no CSV/JSON from " + missing.front()) + (svgs ? "" : ", SVGs missing")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << ": " << o.detail << " [" << f6(secs)
              << " s]" << std::endl;
    return secs;
  };

  const double ac1_secs = report("AC1", "ridge oracle equivalence", ac1_ridge_oracle);
  if (ac1_secs >= 10.0) {
    std::cout << "AC1 FAIL runtime " << f6(ac1_secs) << " s exceeds 10 s" << std::endl;
    ++failures;
  }

  const auto static_synth = synthesize(static39());
  const auto static_ds = preprocessed(static_synth);
  const double ac2_secs = report("AC2", "decodability window oracle", [&] { return ac2_window(static_ds); });
  if (ac2_secs >= 120.0) {
    std::cout << "AC2 FAIL runtime " << f6(ac2_secs) << " s exceeds 120 s" << std::endl;
    ++failures;
  }
  report("AC3", "TG diagonal identity", [&] { return ac3_diagonal(static_ds); });
  report("AC4", "TG dynamics discrimination", [&] { return ac4_dynamics(static_ds); });
  report("AC5", "context invariance discrimination", ac5_contexts);
  report("AC6", "projector correctness", ac6_projector);
  report("AC7", "statistics", ac7_statistics);
  report("AC8", "logmel sanity", ac8_logmel);
  report("AC9", "determinism", ac9_determinism);

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
