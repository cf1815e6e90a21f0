#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "error.hpp"

namespace phonedyn {

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;  // two-sided
};

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom:
/// P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DataError("student_t_two_sided_p: df must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

inline PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DimensionError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
  const std::size_t n = x.size();
  if (n < 3) throw DataError("pearson: need at least 3 pairs");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: constant input");

  PearsonResult res;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double one_minus = 1.0 - res.r * res.r;
  res.p = one_minus <= 0.0 ? 0.0
                           : student_t_two_sided_p(res.r * std::sqrt(df) / std::sqrt(one_minus), df);
  return res;
}

/// Shannon entropy (bits) of the empirical label distribution.
inline double label_entropy(std::span<const int> labels) {
  if (labels.empty()) throw DataError("label_entropy: empty input");
  std::map<int, std::size_t> counts;
  for (const int l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;
}

}  // namespace phonedyn
