#include "coxsplit/numeric.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace coxsplit {
namespace {

TEST(NormalPdf, KnownValues) {
  EXPECT_DOUBLE_EQ(normal_pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(normal_pdf(0.0), 0.3989422804, 1e-10);
  // 50-digit oracle: 0.24197072451914334979...
  EXPECT_NEAR(normal_pdf(1.0), 0.24197072451914335, 1e-16);
  EXPECT_NEAR(normal_pdf(1.0), oracle::normal_pdf_mp(1.0), 1e-16);
  EXPECT_EQ(normal_pdf(-3.0), normal_pdf(3.0));
}

TEST(NormalPdf, MatchesClosedFormOnGrid) {
  for (double x = -12.0; x <= 12.0; x += 0.37) {
    EXPECT_DOUBLE_EQ(normal_pdf(x), std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi));
    EXPECT_GT(normal_pdf(x), 0.0);
  }
}

TEST(NormalPdf, RejectsNonFinite) {
  EXPECT_THROW(normal_pdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(normal_pdf(HUGE_VAL), DomainError);
}

TEST(NormalCdf, KnownValues) {
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  // The 95% point found by bisection on the cdf lands at 1.6449 to 4 digits.
  const double z95 = oracle::bisect([](double x) { return normal_cdf(x) - 0.95; }, 0.0, 5.0);
  EXPECT_NEAR(z95, 1.6449, 5e-5);
  EXPECT_NEAR(normal_cdf(1.6449), 0.95, 1e-5);
  EXPECT_LT(normal_cdf(-8.0), 1e-14);
  EXPECT_LT(normal_cdf(-8.0), normal_pdf(8.0) / 8.0);
  EXPECT_NEAR(normal_cdf(-8.0) / oracle::normal_cdf_mp(-8.0), 1.0, 1e-12);
}

TEST(NormalCdf, AgreesWithMultiprecisionOracle) {
  for (double x = -30.0; x <= 8.0; x += 0.173) {
    const double ref = oracle::normal_cdf_mp(x);
    EXPECT_NEAR(normal_cdf(x), ref, 1e-15 + 1e-13 * ref) << "x=" << x;
  }
}

TEST(NormalCdf, SymmetryAndMonotonicity) {
  double prev = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-14) << "x=" << x;
    EXPECT_GE(normal_cdf(x), prev);
    prev = normal_cdf(x);
  }
}

TEST(NormalCdf, RejectsNonFinite) {
  EXPECT_THROW(normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(NormalQuantile, KnownValues) {
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  // Bisection on normal_cdf to 1e-12.
  const auto inverse = [](double q) {
    return oracle::bisect([q](double x) { return normal_cdf(x) - q; }, -40.0, 40.0, 1e-12);
  };
  EXPECT_NEAR(normal_quantile(0.05), inverse(0.05), 1e-11);
  EXPECT_NEAR(normal_quantile(0.01), inverse(0.01), 1e-11);
  EXPECT_NEAR(normal_quantile(0.05), -1.6448536269514727, 1e-13);
  EXPECT_NEAR(normal_quantile(0.01), -2.3263478740408411, 1e-13);
}

TEST(NormalQuantile, RoundTripsThroughCdf) {
  for (double q = 1e-6; q < 1.0 - 1e-6; q += 1e-4) {
    EXPECT_NEAR(normal_cdf(normal_quantile(q)), q, 1e-12) << "q=" << q;
  }
  for (double q : {1e-6, 1e-5, 1e-4, 1.0 - 1e-4, 1.0 - 1e-5, 1.0 - 1e-6}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(q)), q, 1e-12) << "q=" << q;
  }
}

TEST(NormalQuantile, RejectsOutOfRange) {
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
  EXPECT_THROW(normal_quantile(-0.1), DomainError);
  EXPECT_THROW(normal_quantile(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(Integrate, NormalDensityHasUnitMass) {
  EXPECT_NEAR(integrate([](double v) { return normal_pdf(v); }, {-10.0, 10.0, 1e-12}), 1.0, 1e-10);
}

TEST(Integrate, MaxOfUniformsIdentity) {
  // d/dv Phi(v)^m / m = Phi(v)^(m-1) phi(v), total mass 1/m.
  for (int m = 1; m <= 20; ++m) {
    const double value = integrate(
        [m](double v) { return std::pow(normal_cdf(v), m - 1) * normal_pdf(v); }, {-10.0, 10.0, 1e-12});
    EXPECT_NEAR(value, 1.0 / m, 1e-9) << "m=" << m;
  }
}

TEST(Integrate, AgreesWithBruteForceTrapezoid) {
  const auto f = [](double v) { return normal_cdf(v) * normal_pdf(v - 2.0); };
  const double brute = oracle::trapezoid(f, -10.0, 12.0, 10'000'000);
  const double value = integrate(f, {-10.0, 12.0, 1e-12});
  EXPECT_NEAR(value, brute, 1e-8);
  // Closed form: P(Z1 <= Z2 + 2) = Phi(2 / sqrt 2).
  EXPECT_NEAR(value, 0.92135039647485743, 1e-10);
}

TEST(Integrate, ReportsNonConvergence) {
  QuadratureSpec spec{-1.0, 1.0, 1e-14};
  spec.max_depth = 2;
  try {
    integrate([](double v) { return v < 0.1234 ? 0.0 : 1.0; }, spec);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_GT(e.error_estimate(), 1e-14);
  }
}

TEST(Integrate, RejectsBadSpec) {
  const auto f = [](double) { return 1.0; };
  EXPECT_THROW(integrate(f, {1.0, 1.0, 1e-10}), DomainError);
  EXPECT_THROW(integrate(f, {2.0, 1.0, 1e-10}), DomainError);
  EXPECT_THROW(integrate(f, {0.0, 1.0, 0.0}), DomainError);
}

}  // namespace
}  // namespace coxsplit
