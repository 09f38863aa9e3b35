#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "dpost/quadrature.hpp"

using namespace dpost;

TEST(GaussHermite, MomentsAreExactForPolynomials) {
  const GaussHermiteRule rule(40);
  for (int k = 0; k <= 20; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights()[i] * std::pow(rule.nodes()[i], 2 * k);
    const double exact = std::tgamma(k + 0.5);
    EXPECT_NEAR(s / exact, 1.0, 1e-11) << "k=" << k;
  }
}

TEST(GaussHermite, NodesSymmetricAndSorted) {
  const GaussHermiteRule rule(81);
  for (std::size_t i = 0; i + 1 < rule.size(); ++i) EXPECT_LT(rule.nodes()[i], rule.nodes()[i + 1]);
  EXPECT_EQ(rule.nodes()[40], 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    EXPECT_EQ(rule.nodes()[i], -rule.nodes()[rule.size() - 1 - i]);
    EXPECT_GT(rule.weights()[i], 0.0);
  }
}

// Reference values: 60-digit Hermite roots and Christoffel weights (mpmath).
TEST(GaussHermite, MatchesReferenceRuleIncludingTails) {
  const GaussHermiteRule rule(80);
  EXPECT_NEAR(rule.nodes()[79], 11.887863560471148, 1e-11);
  EXPECT_NEAR(rule.nodes()[40], 0.12379686317313209, 1e-13);
  EXPECT_NEAR(rule.weights()[40] / 0.24383585380721183, 1.0, 1e-11);
  EXPECT_NEAR(rule.weights()[79] / 2.9557746032981917e-62, 1.0, 1e-8);
}

TEST(GaussHermite, IntegratesExponentialGrowthInTails) {
  // int exp(-x^2) cosh(3x) dx = sqrt(pi) exp(9/4); the integrand peaks at |x| = 1.5.
  const GaussHermiteRule rule(80);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights()[i] * std::cosh(3.0 * rule.nodes()[i]);
  EXPECT_NEAR(s / (std::sqrt(std::numbers::pi) * std::exp(2.25)), 1.0, 1e-12);
}

TEST(GaussHermite, RejectsZeroPoints) { EXPECT_THROW(GaussHermiteRule(0), Error); }

TEST(AdaptiveQuadrature, AgreesWithBoostGaussKronrod) {
  using boost::math::quadrature::gauss_kronrod;
  const auto f1 = [](double x) { return std::exp(-x * x) * std::cos(5.0 * x); };
  const auto f2 = [](double x) { return std::sqrt(x) * std::log1p(x); };
  const auto f3 = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
  EXPECT_NEAR(integrate(f1, -8.0, 8.0).value, (gauss_kronrod<double, 61>::integrate(f1, -8.0, 8.0, 15, 1e-14)), 1e-12);
  EXPECT_NEAR(integrate(f2, 0.0, 3.0).value, (gauss_kronrod<double, 61>::integrate(f2, 0.0, 3.0, 15, 1e-14)), 1e-11);
  EXPECT_NEAR(integrate(f3, -1.0, 1.0).value, 0.4 * std::atan(5.0), 1e-12);
}

TEST(AdaptiveQuadrature, BreakpointsHandleDiscontinuities) {
  const auto step = [](double x) { return x < 0.3 ? 1.0 : 2.0; };
  const double bp[] = {0.0, 0.3, 1.0};
  const auto r = integrate(step, std::span<const double>(bp));
  EXPECT_NEAR(r.value, 0.3 + 1.4, 1e-14);
  EXPECT_EQ(r.evaluations, 30);
}

TEST(AdaptiveQuadrature, ThrowsNoConvergenceBeyondDepthLimit) {
  const auto bad = [](double x) { return 1.0 / std::abs(x - 1.0 / 3.0); };
  try {
    integrate(bad, 0.0, 1.0);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
  }
}
