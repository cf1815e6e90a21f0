#pragma once

// Static SVG figures: decoding window, superimposed TG contours, and the
// effect scatter. Output is plain XML with a <metadata> element carrying
// the config hash and seed.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "context.hpp"
#include "results.hpp"
#include "stats.hpp"
#include "text.hpp"

namespace phonedyn::svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v) { return text::format_fixed(v, 2); }

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  double span() const { return hi > lo ? hi - lo : 1.0; }
};

/// Rounds a span to "nice" tick steps (1, 2 or 5 times a power of ten).
inline std::vector<double> ticks(Range r, int target = 6) {
  const double raw = r.span() / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

class Canvas {
 public:
  Canvas(Range x, Range y, std::string title, std::string xlabel, std::string ylabel)
      : x_(x), y_(y), title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  double px(double v) const { return kLeft + (v - x_.lo) / x_.span() * kPlotW; }
  double py(double v) const { return kTop + (y_.hi - v) / y_.span() * kPlotH; }

  void rect(double x0, double x1, double y0, double y1, const std::string& style) {
    const double a = px(std::min(x0, x1)), b = px(std::max(x0, x1));
    const double c = py(std::max(y0, y1)), d = py(std::min(y0, y1));
    body_ << "<rect x=\"" << fmt(a) << "\" y=\"" << fmt(c) << "\" width=\"" << fmt(b - a) << "\" height=\""
          << fmt(d - c) << "\" " << style << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      body_ << (i ? " " : "") << fmt(px(pts[i].first)) << ',' << fmt(py(pts[i].second));
    body_ << "\"/>\n";
  }

  void line(double x0, double y0, double x1, double y1, const std::string& style) {
    polyline({{x0, y0}, {x1, y1}}, style);
  }

  void circle(double x, double y, double r, const std::string& style) {
    body_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << fmt(r) << "\" " << style << "/>\n";
  }

  /// Text in pixel coordinates.
  void label(double x, double y, const std::string& s, const std::string& extra = {}) {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"12\"" << (extra.empty() ? "" : " ")
          << extra << '>' << escape(s) << "</text>\n";
  }

  std::string render(const ResultMeta& meta, const std::string& kind) const {
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n";
    o << "<metadata>phonedyn plot=" << escape(kind) << " config_hash=" << escape(meta.config_hash)
      << " seed=" << meta.seed << "</metadata>\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" << escape(title_)
      << "</text>\n";
    o << "<g id=\"data\">\n" << body_.str() << "</g>\n";

    o << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\"" << kPlotH
      << "\" fill=\"none\"/>\n";
    for (const double t : ticks(x_))
      o << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << kTop + kPlotH << "\" x2=\"" << fmt(px(t)) << "\" y2=\""
        << kTop + kPlotH + 5 << "\"/>\n";
    for (const double t : ticks(y_))
      o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << kLeft << "\" y2=\"" << fmt(py(t))
        << "\"/>\n";
    o << "</g>\n<g id=\"tick-labels\" font-size=\"11\">\n";
    for (const double t : ticks(x_))
      o << "<text x=\"" << fmt(px(t)) << "\" y=\"" << kTop + kPlotH + 18 << "\" text-anchor=\"middle\">"
        << text::format_double(t) << "</text>\n";
    for (const double t : ticks(y_))
      o << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(t) + 4) << "\" text-anchor=\"end\">"
        << text::format_double(t) << "</text>\n";
    o << "</g>\n";
    o << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << escape(xlabel_) << "</text>\n";
    o << "<text x=\"16\" y=\"" << kTop + kPlotH / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + kPlotH / 2 << ")\">" << escape(ylabel_) << "</text>\n";
    o << "</svg>\n";
    return o.str();
  }

  static constexpr int kWidth = 640, kHeight = 440;
  static constexpr int kLeft = 64, kTop = 40, kPlotW = 540, kPlotH = 340;

 private:
  Range x_, y_;
  std::string title_, xlabel_, ylabel_;
  std::ostringstream body_;
};

/// Accuracy and baseline over offsets, with the mean phone duration shaded
/// from onset.
inline std::string window_plot(const std::vector<WindowRow>& rows, double mean_duration_ms, const ResultMeta& meta) {
  Range x{0.0, 1.0};
  if (!rows.empty()) {
    x.lo = rows.front().offset_ms;
    x.hi = rows.back().offset_ms;
  }
  Canvas c(x, {0.0, 1.0}, "Decoding accuracy by offset from phone onset", "offset from onset (ms)", "accuracy");
  if (mean_duration_ms > 0.0)
    c.rect(std::clamp(0.0, x.lo, x.hi), std::clamp(mean_duration_ms, x.lo, x.hi), 0.0, 1.0,
           "fill=\"#cccccc\" fill-opacity=\"0.5\" stroke=\"none\"");
  std::vector<std::pair<double, double>> acc, base;
  for (const auto& r : rows) {
    acc.emplace_back(r.offset_ms, r.accuracy);
    base.emplace_back(r.offset_ms, r.baseline);
  }
  c.polyline(base, "stroke=\"#888888\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" class=\"baseline\"");
  c.polyline(acc, "stroke=\"#1f5fa8\" stroke-width=\"2\" class=\"accuracy\"");
  c.label(Canvas::kLeft + 10, Canvas::kTop + 16, "accuracy (solid), majority baseline (dashed)");
  return c.render(meta, "window");
}

/// Contours per word position; position p is shifted right by shift_ms[p].
/// Threshold 0.2 is drawn dotted, 0.4 (and anything higher) solid.
inline std::string tg_plot(const std::vector<ContourSet>& sets, const std::map<int, double>& shift_ms, Range train_ms,
                           Range test_ms, const ResultMeta& meta) {
  double extra = 0.0;
  for (const auto& [p, s] : shift_ms) extra = std::max(extra, s);
  Canvas c({test_ms.lo, test_ms.hi + extra}, train_ms, "Temporal generalization contours by word position",
           "test time (ms, shifted by preceding phones)", "train time (ms)");
  static const char* colors[] = {"#1f5fa8", "#d9541e", "#2e8b3a", "#8e3fa8", "#555555"};
  for (const auto& s : sets) {
    const auto it = shift_ms.find(s.position);
    const double shift = it == shift_ms.end() ? 0.0 : it->second;
    const std::string color = colors[static_cast<std::size_t>(std::clamp(s.position - 1, 0, 4))];
    std::string style = "stroke=\"" + color + "\" stroke-width=\"1.5\"";
    if (s.threshold < 0.3) style += " stroke-dasharray=\"2 3\"";
    for (const auto& line : s.polylines) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& v : line.vertices) pts.emplace_back(v.col + shift, v.row);
      c.polyline(pts, style);
    }
  }
  double y = Canvas::kTop + 16;
  for (const auto& [p, s] : shift_ms) {
    c.label(Canvas::kLeft + 10, y,
            "p" + std::to_string(p) + " (+" + text::format_fixed(s, 1) + " ms)",
            "fill=\"" + std::string(colors[static_cast<std::size_t>(std::clamp(p - 1, 0, 4))]) + "\"");
    y += 16;
  }
  c.label(Canvas::kLeft + 10, y, "0.2 dotted, 0.4 solid");
  return c.render(meta, "tg");
}

/// Scatter of paired effects with the y = x reference and a least-squares
/// fit; r and p are annotated when defined.
inline std::string effects_plot(const std::vector<EffectPair>& pairs, const ResultMeta& meta) {
  Range r{0.0, 1.0};
  if (!pairs.empty()) {
    r = {pairs.front().effect_a, pairs.front().effect_a};
    for (const auto& p : pairs)
      for (const double v : {p.effect_a, p.effect_b}) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
    const double pad = 0.05 * std::max(r.hi - r.lo, 0.02);
    r = {r.lo - pad, r.hi + pad};
  }
  Canvas c(r, r, "Generalization effects", "effect (primary features)", "effect (acoustic features)");
  c.line(r.lo, r.lo, r.hi, r.hi, "stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 4\" class=\"identity\"");

  std::vector<double> xa, xb;
  for (const auto& p : pairs) {
    xa.push_back(p.effect_a);
    xb.push_back(p.effect_b);
  }
  std::optional<PearsonResult> stats;
  try {
    if (pairs.size() >= 3) stats = pearson(xa, xb);
  } catch (const Error&) {
  }
  if (stats) {
    const double n = static_cast<double>(xa.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      mx += xa[i] / n;
      my += xb[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      sxy += (xa[i] - mx) * (xb[i] - my);
      sxx += (xa[i] - mx) * (xa[i] - mx);
    }
    const double slope = sxy / sxx, icpt = my - slope * mx;
    c.line(r.lo, icpt + slope * r.lo, r.hi, icpt + slope * r.hi, "stroke=\"#d9541e\" stroke-width=\"1.5\" class=\"fit\"");
  }
  for (const auto& p : pairs) c.circle(p.effect_a, p.effect_b, 4, "fill=\"#1f5fa8\" fill-opacity=\"0.8\"");
  c.label(Canvas::kLeft + 10, Canvas::kTop + 16,
          stats ? "r = " + text::format_fixed(stats->r, 3) + ", p = " + text::format_double(stats->p) +
                      ", n = " + std::to_string(pairs.size())
                : "n = " + std::to_string(pairs.size()));
  return c.render(meta, "effects");
}

}  // namespace phonedyn::svg
