#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "coxsplit/errors.hpp"
#include "coxsplit/numeric.hpp"

namespace coxsplit {

// One cell address of the effective-power table. delta is the standardized
// signal mu * sqrt(r) / sigma0; split_fraction is ignored by exact_power.
struct PowerQuery {
  int m = 2;
  double delta = 0.0;
  double split_fraction = 0.4;
  double alpha = 0.1;

  void validate() const {
    if (m < 1) throw DomainError("PowerQuery: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("PowerQuery: alpha must lie in (0, 1)");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
      throw DomainError("PowerQuery: split_fraction must lie in (0, 1)");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw DomainError("PowerQuery: delta must be finite and >= 0");
    }
  }
};

namespace detail {

// Integral of Phi(v)^(m-1) phi(v - shift) over [lower, +inf), truncated at
// shift + 10 (the remaining tail is below 1e-22).
inline double max_statistic_tail(int m, double shift, double lower) {
  const double lo = std::max(lower, shift - 10.0);
  const double hi = shift + 10.0;
  if (!(lo < hi)) return 0.0;
  return integrate(
      [m, shift](double v) { return std::pow(normal_cdf(v), m - 1) * normal_pdf(v - shift); },
      QuadratureSpec{lo, hi, 1e-12});
}

}  // namespace detail

/// Per-population level alpha_m whose selection-adjusted level is alpha,
/// i.e. the solution of alpha = 1 - (1 - alpha_m)^m.
inline double alpha_single_from_family(double alpha, int m) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha_single_from_family: alpha must lie in (0, 1)");
  }
  if (m < 1) throw DomainError("alpha_single_from_family: m must be >= 1");
  return -std::expm1(std::log1p(-alpha) / m);
}

/// Effective power of the data-splitting procedure: the probability that the
/// population with the largest first-portion mean is the true one and its
/// second-portion mean is significant at level alpha.
inline double split_power(const PowerQuery& q) {
  q.validate();
  const double k = -normal_quantile(q.alpha);
  const double second = normal_cdf(-k + q.delta * std::sqrt(1.0 - q.split_fraction));
  const double selection =
      detail::max_statistic_tail(q.m, q.delta * std::sqrt(q.split_fraction), -HUGE_VAL);
  return std::clamp(second * selection, 0.0, 1.0);
}

/// Effective power of the exact (max-statistic) procedure at family level alpha.
inline double exact_power(const PowerQuery& q) {
  PowerQuery checked = q;
  checked.split_fraction = 0.5;  // unused here
  checked.validate();
  const double k = -normal_quantile(alpha_single_from_family(q.alpha, q.m));
  return std::clamp(detail::max_statistic_tail(q.m, q.delta, k), 0.0, 1.0);
}

enum class Procedure { split, exact };

struct PowerTableEntry {
  PowerQuery query;  // query.split_fraction is meaningless for Procedure::exact
  Procedure procedure = Procedure::split;
  double value = 0.0;
};

/// Formats an effective power for display: two
/// significant digits, or three decimals once the value reaches 0.995
/// ("0.998", "1.000").
inline std::string format_power(double value) {
  char buf[32];
  if (value >= 0.995) {
    std::snprintf(buf, sizeof buf, "%.3f", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.2g", value);
    // %g drops trailing zeros ("0.2" for 0.20); restore two significant digits.
    std::string s = buf;
    const auto first = s.find_first_not_of("0.");
    if (first != std::string::npos && s.size() - first < 2) s += '0';
    return s;
  }
  return buf;
}

/// Cartesian product alphas x ms x deltas x (ps..., exact). The exact column
/// is evaluated once per (alpha, m, delta).
inline std::vector<PowerTableEntry> power_table(std::span<const double> alphas,
                                                std::span<const int> ms,
                                                std::span<const double> deltas,
                                                std::span<const double> ps) {
  std::vector<PowerTableEntry> out;
  for (double alpha : alphas) {
    for (int m : ms) {
      for (double delta : deltas) {
        for (double p : ps) {
          PowerQuery q{m, delta, p, alpha};
          out.push_back({q, Procedure::split, split_power(q)});
        }
        PowerQuery q{m, delta, 0.5, alpha};
        out.push_back({q, Procedure::exact, exact_power(q)});
      }
    }
  }
  return out;
}

/// The published grid: alpha in {0.1, 0.01}, m = 2 with delta in {1, 2, 4},
/// m = 10 with delta in {1, 2, 4, 6}, p in {0.2, 0.4, 0.6} plus exact.
inline std::vector<PowerTableEntry> reference_power_grid() {
  const std::vector<double> alphas{0.1, 0.01};
  const std::vector<double> ps{0.2, 0.4, 0.6};
  const std::vector<int> m2{2};
  const std::vector<int> m10{10};
  const std::vector<double> d2{1, 2, 4};
  const std::vector<double> d10{1, 2, 4, 6};
  std::vector<PowerTableEntry> out;
  for (double alpha : alphas) {
    const std::vector<double> a{alpha};
    for (auto& e : power_table(a, m2, d2, ps)) out.push_back(e);
    for (auto& e : power_table(a, m10, d10, ps)) out.push_back(e);
  }
  return out;
}

}  // namespace coxsplit
