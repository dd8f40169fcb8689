#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "coxsplit/errors.hpp"

namespace coxsplit {

// p -> e transforms. Shafer and Epsilon are calibrators (their integral over
// uniform p is 1). VSBound is the pointwise supremum of the Epsilon family and
// is NOT a valid e-value; anything serialized from it must say so.
class CalibratorKind {
 public:
  enum class Variant { shafer, epsilon, vs_bound };

  static CalibratorKind shafer() { return CalibratorKind(Variant::shafer, 0.0); }
  static CalibratorKind vs_bound() { return CalibratorKind(Variant::vs_bound, 0.0); }
  static CalibratorKind epsilon(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("CalibratorKind: epsilon must lie in (0, 1)");
    return CalibratorKind(Variant::epsilon, eps);
  }

  Variant variant() const { return variant_; }
  double eps() const { return eps_; }
  bool is_valid_evalue() const { return variant_ != Variant::vs_bound; }

  std::string name() const {
    switch (variant_) {
      case Variant::shafer: return "shafer";
      case Variant::epsilon: return "epsilon(" + std::to_string(eps_) + ")";
      case Variant::vs_bound: return "vs_bound";
    }
    return {};
  }

 private:
  CalibratorKind(Variant v, double eps) : variant_(v), eps_(eps) {}
  Variant variant_;
  double eps_;
};

inline constexpr const char* kVsBoundNote = "VS bound: not a valid e-value";

inline double calibrate(double p, const CalibratorKind& kind) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("calibrate: p must lie in (0, 1]");
  switch (kind.variant()) {
    case CalibratorKind::Variant::shafer:
      return 1.0 / std::sqrt(p) - 1.0;
    case CalibratorKind::Variant::epsilon:
      return kind.eps() * std::pow(p, kind.eps() - 1.0);
    case CalibratorKind::Variant::vs_bound:
      if (p <= std::exp(-1.0)) return -std::exp(-1.0) / (p * std::log(p));
      return 1.0;
  }
  return 0.0;
}

/// Inverse of Shafer's calibrator, (e + 1)^-2. The result is the p-value that
/// would be needed to reach e through calibration, not a valid p-value.
inline double shafer_inverse(double e) {
  if (!(e >= 0.0)) throw DomainError("shafer_inverse: e must be nonnegative");
  const double d = e + 1.0;
  return 1.0 / (d * d);
}

/// The reciprocal e -> min(1, 1/e).
inline double e_to_p(double e) {
  if (!(e > 0.0)) return 1.0;
  return std::min(1.0, 1.0 / e);
}

enum class SignificanceVerdict { not_significant, significant, highly_significant };

inline const char* to_string(SignificanceVerdict v) {
  switch (v) {
    case SignificanceVerdict::not_significant: return "not_significant";
    case SignificanceVerdict::significant: return "significant";
    case SignificanceVerdict::highly_significant: return "highly_significant";
  }
  return "";
}

/// Jeffreys's rule of thumb; both thresholds are strict.
inline SignificanceVerdict jeffreys_verdict(double e) {
  if (!(e >= 0.0)) throw DomainError("jeffreys_verdict: e must be nonnegative");
  if (e > 10.0) return SignificanceVerdict::highly_significant;
  if (e > std::sqrt(10.0)) return SignificanceVerdict::significant;
  return SignificanceVerdict::not_significant;
}

/// The e-value Jeffreys attaches to p, defined only at p = 0.05 and p = 0.01.
inline std::optional<double> jeffreys_anchor(double p) {
  if (p == 0.05) return std::sqrt(10.0);
  if (p == 0.01) return 10.0;
  return std::nullopt;
}

/// Checks that the closed-form VS bound dominates epsilon * p^(epsilon - 1)
/// over the grid and, when p <= 1/e, is attained at epsilon* = -1/ln p.
inline bool vs_is_supremum(double p, std::span<const double> eps_grid) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("vs_is_supremum: p must lie in (0, 1)");
  const double vs = calibrate(p, CalibratorKind::vs_bound());
  for (double eps : eps_grid) {
    if (vs < calibrate(p, CalibratorKind::epsilon(eps)) - 1e-12) return false;
  }
  if (p <= std::exp(-1.0)) {
    const double eps_star = -1.0 / std::log(p);
    if (eps_star < 1.0) {
      const double attained = eps_star * std::pow(p, eps_star - 1.0);
      if (std::abs(attained - vs) > 1e-9 * std::max(1.0, vs)) return false;
    }
  }
  return true;
}

}  // namespace coxsplit
