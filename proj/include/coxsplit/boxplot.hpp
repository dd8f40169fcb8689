#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "coxsplit/errors.hpp"

namespace coxsplit {

// Five-number summary plus Tukey whiskers: each whisker ends at the most
// extreme observation within 1.5 IQR of its quartile; anything beyond is an
// outlier. Quartiles use linear interpolation between order statistics.
struct BoxplotSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

inline double quantile_linear(std::span<const double> sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline BoxplotSummary boxplot_summary(std::span<const double> values) {
  if (values.empty()) throw ValidationError("boxplot_summary: empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  BoxplotSummary b;
  b.min = s.front();
  b.max = s.back();
  b.q1 = quantile_linear(s, 0.25);
  b.median = quantile_linear(s, 0.5);
  b.q3 = quantile_linear(s, 0.75);
  const double reach = 1.5 * (b.q3 - b.q1);
  const double lo_fence = b.q1 - reach;
  const double hi_fence = b.q3 + reach;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double x : s) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
    }
  }
  return b;
}

}  // namespace coxsplit
