#pragma once

// The phonedyn command line: one analysis per invocation, results written
// as CSV/JSON (and SVG for `plot`) into --out.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acoustic.hpp"
#include "context.hpp"
#include "contours.hpp"
#include "dataset.hpp"
#include "decoding.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "preprocess.hpp"
#include "results.hpp"
#include "stats.hpp"
#include "svg.hpp"
#include "synth.hpp"
#include "text.hpp"

namespace phonedyn::cli {

using json = nlohmann::json;

/// "lo..hi" with optional signs, e.g. "-80..79".
inline std::pair<double, double> parse_range(const std::string& s, const char* flag) {
  const auto dots = s.find("..");
  std::optional<double> lo, hi;
  if (dots != std::string::npos) {
    lo = text::to_double(std::string_view(s).substr(0, dots));
    hi = text::to_double(std::string_view(s).substr(dots + 2));
  }
  if (!lo || !hi || *hi < *lo) throw DataError(std::string(flag) + ": expected lo..hi with lo <= hi, got '" + s + "'");
  return {*lo, *hi};
}

inline std::pair<int, int> parse_int_range(const std::string& s, const char* flag) {
  const auto [lo, hi] = parse_range(s, flag);
  if (lo != std::floor(lo) || hi != std::floor(hi)) throw DataError(std::string(flag) + ": bounds must be integers");
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

struct Options {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  std::string offsets = "-80..79";
  std::string positions = "1..4";
  std::string context_mode = "position";
  std::size_t subsample_n = 4500;
  double train_frac = 0.8;
  std::size_t min_class_size = 1;
  std::string effect_window = "0..100";
  std::string preprocess = "auto";
  unsigned workers = 1;
  bool vowels_only = false;
  int position = 0;
  int n_mels = 40;
  std::string spec;
  std::string primary;
  std::string acoustic;
  std::string results;
  std::string kind;
};

namespace detail {

inline OffsetRange offset_range(const Options& o) {
  const auto [lo, hi] = parse_int_range(o.offsets, "--offsets");
  return {lo, hi};
}

inline MsRange effect_window(const Options& o) {
  const auto [lo, hi] = parse_range(o.effect_window, "--effect-window");
  return {lo, hi};
}

/// Canonical config shared by the analysis subcommands; worker count and
/// output directory are left out so they never change output bytes.
inline json analysis_config(const std::string& command, const Options& o) {
  const auto offsets = offset_range(o);
  return {{"command", command},
          {"manifest", o.manifest},
          {"alpha", o.alpha},
          {"offsets", {offsets.lo, offsets.hi}},
          {"seed", o.seed},
          {"preprocess", o.preprocess},
          {"vowels_only", o.vowels_only}};
}

struct Loaded {
  DatasetManifest manifest;
  Dataset dataset;
  bool preprocessed = false;
};

inline Loaded load_for_analysis(const Options& o) {
  if (o.manifest.empty()) throw DataError("--manifest is required");
  Loaded l;
  l.manifest = parse_manifest(o.manifest);
  l.dataset = load_dataset(l.manifest);

  bool apply = false;
  if (o.preprocess == "on") {
    if (!l.manifest.covariates) throw DataError("--preprocess on: manifest lists no covariates");
    apply = true;
  } else if (o.preprocess == "auto") {
    apply = l.manifest.kind != "logmel" && l.manifest.covariates && !l.manifest.preprocessed;
  }
  if (apply) {
    const auto table = read_covariates(*l.manifest.covariates);
    regress_out(l.dataset, fit_dataset_projector(l.dataset, table, o.alpha));
  }
  l.preprocessed = apply || l.manifest.preprocessed;
  return l;
}

inline json dataset_json(const Loaded& l) {
  return {{"utterances", l.dataset.utterances.size()},
          {"tokens", l.dataset.num_tokens()},
          {"frames", l.dataset.num_frames()},
          {"dims", l.dataset.dims},
          {"frame_period_ms", l.dataset.frame_period_ms},
          {"kind", l.dataset.kind},
          {"preprocessed", l.preprocessed}};
}

inline double mean_duration_ms(const Dataset& ds, std::span<const TokenRef> tokens) {
  if (tokens.empty()) return 0.0;
  double sum = 0.0;
  for (const auto r : tokens) {
    const auto& t = ds.token(r);
    sum += (t.offset_s - t.onset_s) * 1000.0;
  }
  return sum / static_cast<double>(tokens.size());
}

inline std::vector<TokenRef> all_tokens(const Dataset& ds, const TokenFilter& f) {
  return select_tokens(ds, f, std::vector<bool>(ds.utterances.size(), true));
}

inline json label_counts(const Dataset& ds, std::span<const TokenRef> tokens) {
  std::map<int, std::size_t> counts;
  for (const auto r : tokens) ++counts[ds.token(r).label];
  json j = json::object();
  for (const auto& [label, n] : counts) j[ds.vocab[label].label] = n;
  return j;
}

inline std::vector<int> labels_of(const Dataset& ds, std::span<const TokenRef> tokens) {
  std::vector<int> out;
  for (const auto r : tokens) out.push_back(ds.token(r).label);
  return out;
}

inline fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw DataError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

inline std::string comment_of(const ResultMeta& m) { return meta_line(m).substr(1); }

// --- subcommands -------------------------------------------------------------

inline int cmd_validate(const Options& o, std::ostream& out) {
  if (o.manifest.empty()) throw DataError("--manifest is required");
  const auto m = parse_manifest(o.manifest);
  const auto ds = load_dataset(m);
  std::set<std::string> speakers;
  for (const auto& u : ds.utterances) speakers.insert(u.speaker);
  std::size_t aligned = 0;
  for (const auto& u : ds.utterances) aligned += !u.tokens.empty();
  out << "manifest ok: utterances=" << ds.utterances.size() << " aligned=" << aligned
      << " speakers=" << speakers.size() << " tokens=" << ds.num_tokens() << " frames=" << ds.num_frames()
      << " dims=" << ds.dims << " vocab=" << ds.vocab.size() << " kind=" << ds.kind << '\n';
  if (m.covariates) {
    const auto table = read_covariates(*m.covariates);
    for (const auto& u : ds.utterances)
      if (!table.count(u.id)) throw DataError("covariates: no rows for utterance \"" + u.id + "\"");
    out << "covariates ok: utterances=" << table.size() << '\n';
  }
  return 0;
}

inline int cmd_synth(const Options& o, bool seed_given, std::ostream& out) {
  if (o.spec.empty()) throw DataError("--spec is required");
  std::ifstream in(o.spec);
  if (!in) throw FormatError("cannot open spec: " + o.spec);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("spec " + o.spec + ": invalid JSON (" + e.what() + ")");
  }
  if (seed_given) j["seed"] = o.seed;
  const auto spec = SyntheticSpec::from_json(j);
  const ResultMeta meta{config_hash({{"command", "synth"}, {"spec", spec.to_json()}}), spec.seed};
  const auto dir = out_dir(o);
  const auto files = generate(spec, dir, comment_of(meta), {{"config_hash", meta.config_hash}, {"seed", meta.seed}});
  out << "wrote " << files.features.size() << " utterances to " << dir.string() << " (manifest "
      << files.manifest.filename().string() << ")\n";
  return 0;
}

inline int cmd_logmel(const Options& o, std::ostream& out) {
  if (o.manifest.empty()) throw DataError("--manifest is required");
  const auto m = parse_manifest(o.manifest, ManifestUse::audio);
  const auto dir = out_dir(o);
  const ResultMeta meta{config_hash({{"command", "logmel"}, {"manifest", o.manifest}, {"n_mels", o.n_mels}}), o.seed};

  std::vector<std::string> ids;
  for (const auto& [id, p] : m.wavs) ids.push_back(id);
  std::vector<FeatureMatrix> feats(ids.size());
  CovariateTable table;
  std::vector<CovariateColumns> cov(ids.size());
  parallel_for(ids.size(), o.workers, [&](std::size_t i) {
    const auto w = read_wav(m.wavs.at(ids[i]));
    LogmelConfig cfg;
    cfg.sample_rate_hz = w.sample_rate_hz;
    cfg.hop_ms = m.frame_period_ms;
    cfg.n_mels = o.n_mels;
    try {
      feats[i] = logmel(w, cfg);
      cov[i].amplitude = frame_amplitude(w, cfg).values;
      cov[i].pitch_hz = frame_pitch(w, cfg).values;
    } catch (const Error& e) {
      throw DataError("utterance \"" + ids[i] + "\": " + e.what());
    }
  });

  DatasetManifest outm;
  outm.frame_period_ms = m.frame_period_ms;
  outm.dims = o.n_mels;
  outm.vocab = m.vocab;
  outm.alignments = m.alignments;
  outm.kind = "logmel";
  fs::create_directories(dir / "features");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto p = dir / "features" / (ids[i] + ".npy");
    save_features(p, feats[i]);
    outm.features[ids[i]] = p;
    table[ids[i]] = std::move(cov[i]);
  }
  outm.covariates = dir / "covariates.tsv";
  {
    auto c = phonedyn::detail::open_output(*outm.covariates);
    c << meta_line(meta) << '\n';
    write_covariates(c, table);
  }
  auto mj = outm.to_json(fs::absolute(dir));
  mj["config_hash"] = meta.config_hash;
  mj["seed"] = meta.seed;
  auto mf = phonedyn::detail::open_output(dir / "manifest.json");
  mf << mj.dump(2) << '\n';
  out << "wrote logmel features for " << ids.size() << " utterances to " << dir.string() << '\n';
  return 0;
}

inline int cmd_preprocess(const Options& o, std::ostream& out) {
  if (o.manifest.empty()) throw DataError("--manifest is required");
  const auto m = parse_manifest(o.manifest);
  if (!m.covariates) throw DataError("preprocess: manifest lists no covariates");
  auto ds = load_dataset(m);
  const auto table = read_covariates(*m.covariates);
  const auto projector = fit_dataset_projector(ds, table, o.alpha);
  regress_out(ds, projector);

  const auto dir = out_dir(o);
  const ResultMeta meta{config_hash({{"command", "preprocess"}, {"manifest", o.manifest}, {"alpha", o.alpha}}), o.seed};
  DatasetManifest outm = m;
  outm.features.clear();
  outm.preprocessed = true;
  fs::create_directories(dir / "features");
  for (const auto& u : ds.utterances) {
    const auto p = dir / "features" / (u.id + ".npy");
    save_features(p, u.features);
    outm.features[u.id] = p;
  }
  auto mj = outm.to_json(fs::absolute(dir));
  mj["config_hash"] = meta.config_hash;
  mj["seed"] = meta.seed;
  {
    auto mf = phonedyn::detail::open_output(dir / "manifest.json");
    mf << mj.dump(2) << '\n';
  }
  json coef = json::array();
  for (Eigen::Index c = 0; c < projector.coefficients.cols(); ++c) coef.push_back(projector.coefficients.col(c).norm());
  write_summary(dir / "summary.json",
                {{"analysis", "preprocess"},
                 {"config", {{"manifest", o.manifest}, {"alpha", o.alpha}}},
                 {"covariates", {"amplitude", "pitch_hz"}},
                 {"coefficient_norms", coef},
                 {"directions_removed", projector.directions.cols()}},
                meta);
  out << "removed " << projector.directions.cols() << " covariate directions from " << ds.utterances.size()
      << " utterances\n";
  return 0;
}

inline WindowConfig window_config(const Options& o) {
  WindowConfig cfg;
  cfg.offsets = offset_range(o);
  cfg.alpha = o.alpha;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.filter.vowels_only = o.vowels_only;
  if (o.position > 0) cfg.filter.word_position = o.position;
  return cfg;
}

inline int cmd_window(const Options& o, std::ostream& out) {
  const auto l = load_for_analysis(o);
  const auto cfg = window_config(o);
  const auto curve = decoding_window(l.dataset, cfg);

  auto config = analysis_config("window", o);
  config["position"] = o.position;
  const ResultMeta meta{config_hash(config), o.seed};
  const auto dir = out_dir(o);
  write_decoding_window(dir / "decoding_window.csv", curve, meta);

  const auto tokens = all_tokens(l.dataset, cfg.filter);
  write_summary(dir / "summary.json",
                {{"analysis", "window"},
                 {"config", config},
                 {"dataset", dataset_json(l)},
                 {"split_method", curve.split_method},
                 {"split_policy", "one train/test split shared by all offsets"},
                 {"n_tokens", tokens.size()},
                 {"mean_phone_duration_ms", mean_duration_ms(l.dataset, tokens)}},
                meta);
  out << "decoding window: " << curve.points.size() << " offsets written to " << dir.string() << '\n';
  return 0;
}

inline int cmd_tg(const Options& o, std::ostream& out) {
  const auto l = load_for_analysis(o);
  const auto& ds = l.dataset;
  const auto cfg = window_config(o);
  const auto [p_lo, p_hi] = parse_int_range(o.positions, "--positions");
  if (p_lo < 1) throw DataError("--positions: positions start at 1");

  auto config = analysis_config("tg", o);
  config["positions"] = {p_lo, p_hi};
  const ResultMeta meta{config_hash(config), o.seed};

  std::vector<TGMatrix> tgs;
  std::vector<ContourSet> contours;
  json positions = json::array();
  std::map<int, double> mean_dur;
  for (int p = 1; p <= p_hi; ++p) {
    TokenFilter f = cfg.filter;
    f.word_position = p;
    mean_dur[p] = mean_duration_ms(ds, all_tokens(ds, f));
  }
  double shift = 0.0;
  for (int p = 1; p < p_lo; ++p) shift += mean_dur[p];

  for (int p = p_lo; p <= p_hi; ++p) {
    tgs.push_back(temporal_generalization(ds, cfg, p));
    const auto& tg = tgs.back();
    for (const double thr : {0.2, 0.4}) contours.push_back({p, thr, extract_contours(tg, thr)});

    WindowConfig local = cfg;
    local.filter.word_position = p;
    const auto setup = phonedyn::detail::prepare_decoding(ds, local);
    std::vector<TokenRef> both = setup.train;
    both.insert(both.end(), setup.test.begin(), setup.test.end());
    const auto labels = labels_of(ds, both);
    positions.push_back({{"position", p},
                         {"n_tokens", both.size()},
                         {"n_train_tokens", tg.n_train_tokens},
                         {"n_test_tokens", tg.n_test_tokens},
                         {"entropy_bits", label_entropy(labels)},
                         {"baseline", tg.baseline},
                         {"mean_duration_ms", mean_dur[p]},
                         {"shift_ms", shift},
                         {"label_counts", label_counts(ds, both)}});
    shift += mean_dur[p];
  }

  const auto dir = out_dir(o);
  write_tg_matrices(dir / "tg_matrix.csv", tgs, meta);
  write_contours(dir / "contours.csv", contours, meta);
  write_summary(dir / "summary.json",
                {{"analysis", "tg"},
                 {"config", config},
                 {"dataset", dataset_json(l)},
                 {"split_policy", "one train/test split shared by all offsets"},
                 {"contour_thresholds", {0.2, 0.4}},
                 {"frame_period_ms", ds.frame_period_ms},
                 {"positions", positions}},
                meta);
  out << "temporal generalization: " << tgs.size() << " positions written to " << dir.string() << '\n';
  return 0;
}

inline int cmd_context(const Options& o, std::ostream& out) {
  const auto l = load_for_analysis(o);
  const auto& ds = l.dataset;
  ContextSpec spec;
  if (o.context_mode == "position") {
    spec.mode = ContextMode::word_position;
  } else if (o.context_mode == "manner") {
    spec.mode = ContextMode::manner_pair;
  } else {
    throw DataError("--context-mode must be 'position' or 'manner'");
  }
  spec.vowels_only = true;
  spec.subsample_n = o.subsample_n;
  spec.train_fraction = o.train_frac;
  spec.min_class_size = o.min_class_size;
  spec.seed = o.seed;
  const auto window = effect_window(o);

  auto config = analysis_config("context", o);
  config["vowels_only"] = true;
  config["context_mode"] = o.context_mode;
  config["subsample_n"] = o.subsample_n;
  config["train_frac"] = o.train_frac;
  config["min_class_size"] = o.min_class_size;
  config["effect_window_ms"] = {window.lo, window.hi};
  const ResultMeta meta{config_hash(config), o.seed};

  const auto report = cross_context_generalization(ds, spec, offset_range(o), o.alpha, o.workers);
  const auto dir = out_dir(o);
  write_context_gen(dir / "context_gen.csv", report, meta);

  json contexts = json::array(), dropped = json::array(), effects = json::object();
  for (const auto& ctx : report.contexts) {
    const auto& s = report.samples.at(ctx);
    std::vector<int> labels;
    for (const auto& [label, n] : report.class_histograms.at(ctx)) labels.insert(labels.end(), n, label);
    json hist = json::object();
    for (const auto& [label, n] : report.class_histograms.at(ctx)) hist[ds.vocab[label].label] = n;
    contexts.push_back({{"context", ctx},
                        {"n_train", s.train.size()},
                        {"n_test", s.test.size()},
                        {"entropy_bits", label_entropy(labels)},
                        {"class_histogram", hist}});
    for (const auto& test : report.contexts) effects[ctx][test] = generalization_effect(report, ctx, test, window);
  }
  for (const auto& d : report.dropped) dropped.push_back({{"context", d.context}, {"count", d.count}, {"reason", d.reason}});
  write_summary(dir / "summary.json",
                {{"analysis", "context"},
                 {"config", config},
                 {"dataset", dataset_json(l)},
                 {"contexts", contexts},
                 {"dropped_contexts", dropped},
                 {"effects", effects}},
                meta);
  out << "cross-context generalization: " << report.contexts.size() << " contexts (" << report.dropped.size()
      << " dropped) written to " << dir.string() << '\n';
  return 0;
}

inline int cmd_correlate(const Options& o, std::ostream& out) {
  if (o.primary.empty() || o.acoustic.empty()) throw DataError("--primary and --acoustic result directories are required");
  const auto a = read_context_gen(fs::path(o.primary) / "context_gen.csv");
  const auto b = read_context_gen(fs::path(o.acoustic) / "context_gen.csv");
  const auto window = effect_window(o);
  const json config = {{"command", "correlate"},
                       {"primary", o.primary},
                       {"acoustic", o.acoustic},
                       {"effect_window_ms", {window.lo, window.hi}}};
  const ResultMeta meta{config_hash(config), o.seed};
  const auto corr = effect_correlation(a, b, window);
  const auto dir = out_dir(o);
  write_effects(dir / "effects.csv", corr, meta);
  write_summary(dir / "summary.json",
                {{"analysis", "correlate"},
                 {"config", config},
                 {"contexts", a.contexts},
                 {"n_pairs", corr.pairs.size()},
                 {"pearson_r", corr.stats.r},
                 {"p_value", corr.stats.p}},
                meta);
  out << "effect correlation over " << corr.pairs.size() << " pairs: r=" << text::format_fixed(corr.stats.r, 4)
      << " p=" << text::format_double(corr.stats.p) << '\n';
  return 0;
}

inline ResultMeta meta_from_summary(const json& s) {
  ResultMeta m;
  if (s.contains("config_hash")) m.config_hash = s.at("config_hash").get<std::string>();
  if (s.contains("seed")) m.seed = s.at("seed").get<std::uint64_t>();
  return m;
}

inline int cmd_plot(const Options& o, std::ostream& out) {
  if (o.results.empty()) throw DataError("--results is required");
  const fs::path res(o.results);
  const fs::path dir = o.out.empty() ? res : out_dir(o);
  const auto summary = read_summary(res / "summary.json");
  const auto meta = meta_from_summary(summary);
  std::string svg_text;
  if (o.kind == "window") {
    svg_text = svg::window_plot(read_decoding_window(res / "decoding_window.csv"),
                                summary.value("mean_phone_duration_ms", 0.0), meta);
  } else if (o.kind == "tg") {
    const auto sets = read_contours(res / "contours.csv");
    std::map<int, double> shifts;
    for (const auto& p : summary.at("positions")) shifts[p.at("position").get<int>()] = p.at("shift_ms").get<double>();
    const auto offsets = summary.at("config").at("offsets");
    const double period = summary.value("frame_period_ms", 10.0);
    const svg::Range ms{offsets.at(0).get<int>() * period, offsets.at(1).get<int>() * period};
    svg_text = svg::tg_plot(sets, shifts, ms, ms, meta);
  } else if (o.kind == "effects") {
    svg_text = svg::effects_plot(read_effects(res / "effects.csv"), meta);
  } else {
    throw DataError("--kind must be one of window, tg, effects");
  }
  const auto path = dir / (o.kind + ".svg");
  auto f = phonedyn::detail::open_output(path);
  f << svg_text;
  out << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace detail

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on success, 1 on analysis errors, 2 on usage errors.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Per-offset linear phonetic decoding of frame-level speech features", "phonedyn"};
  app.require_subcommand(1, 1);
  Options o;

  auto manifest = [&](CLI::App* s) { s->add_option("--manifest", o.manifest, "dataset manifest (JSON)"); };
  auto output = [&](CLI::App* s) { s->add_option("--out", o.out, "output directory"); };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "random seed"); };
  auto workers = [&](CLI::App* s) {
    s->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  };
  auto analysis = [&](CLI::App* s) {
    manifest(s);
    output(s);
    seed(s);
    workers(s);
    s->add_option("--alpha", o.alpha, "ridge regularization")->check(CLI::PositiveNumber);
    s->add_option("--offsets", o.offsets, "frame offsets lo..hi (default -80..79)");
    s->add_option("--preprocess", o.preprocess, "regress out covariates: on, off or auto")
        ->check(CLI::IsMember({"on", "off", "auto"}));
  };

  auto* validate = app.add_subcommand("validate", "check a manifest and print counts");
  manifest(validate);

  auto* logmel_cmd = app.add_subcommand("logmel", "compute logmel features and covariates from WAVs");
  manifest(logmel_cmd);
  output(logmel_cmd);
  workers(logmel_cmd);
  logmel_cmd->add_option("--n-mels", o.n_mels, "mel bands")->check(CLI::PositiveNumber);

  auto* preprocess = app.add_subcommand("preprocess", "regress amplitude and pitch out of features");
  manifest(preprocess);
  output(preprocess);
  preprocess->add_option("--alpha", o.alpha, "ridge regularization")->check(CLI::PositiveNumber);

  auto* window = app.add_subcommand("window", "decoding accuracy per offset from phone onset");
  analysis(window);
  window->add_flag("--vowels-only", o.vowels_only, "keep vowel tokens only");
  window->add_option("--position", o.position, "keep tokens at this word position")->check(CLI::NonNegativeNumber);

  auto* tg = app.add_subcommand("tg", "temporal generalization per word position");
  analysis(tg);
  tg->add_flag("--vowels-only", o.vowels_only, "keep vowel tokens only");
  tg->add_option("--positions", o.positions, "word positions lo..hi (default 1..4)");

  auto* context = app.add_subcommand("context", "cross-context generalization of vowel decoders");
  analysis(context);
  context->add_option("--context-mode", o.context_mode, "position or manner")
      ->check(CLI::IsMember({"position", "manner"}));
  context->add_option("--subsample-n", o.subsample_n, "tokens sampled per context")->check(CLI::PositiveNumber);
  context->add_option("--train-frac", o.train_frac, "training fraction per context");
  context->add_option("--min-class-size", o.min_class_size, "drop contexts with fewer tokens");
  context->add_option("--effect-window", o.effect_window, "effect window lo..hi in ms (default 0..100)");

  auto* correlate = app.add_subcommand("correlate", "correlate generalization effects of two context runs");
  output(correlate);
  correlate->add_option("--primary", o.primary, "context results of the primary features");
  correlate->add_option("--acoustic", o.acoustic, "context results of the acoustic features");
  correlate->add_option("--effect-window", o.effect_window, "effect window lo..hi in ms (default 0..100)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--spec", o.spec, "synthetic spec (JSON)");
  output(synth);
  seed(synth);

  auto* plot = app.add_subcommand("plot", "render SVG figures from a results directory");
  plot->add_option("--results", o.results, "results directory");
  plot->add_option("--kind", o.kind, "window, tg or effects")->check(CLI::IsMember({"window", "tg", "effects"}));
  output(plot);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "phonedyn: " << e.what() << '\n';
    return 2;
  }

  try {
    if (validate->parsed()) return detail::cmd_validate(o, out);
    if (logmel_cmd->parsed()) return detail::cmd_logmel(o, out);
    if (preprocess->parsed()) return detail::cmd_preprocess(o, out);
    if (window->parsed()) return detail::cmd_window(o, out);
    if (tg->parsed()) return detail::cmd_tg(o, out);
    if (context->parsed()) return detail::cmd_context(o, out);
    if (correlate->parsed()) return detail::cmd_correlate(o, out);
    if (synth->parsed()) return detail::cmd_synth(o, synth->get_option("--seed")->count() > 0, out);
    if (plot->parsed()) return detail::cmd_plot(o, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "phonedyn: error: " << msg << '\n';
    return 1;
  }
  return 2;
}

}  // namespace phonedyn::cli
