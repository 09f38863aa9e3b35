#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "dpost/hierarchical.hpp"
#include "dpost/io.hpp"
#include "dpost/models.hpp"
#include "dpost/posterior.hpp"
#include "dpost/regression.hpp"

using namespace dpost;

namespace {

template <class F>
double gk_integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// log |det d theta / d u| by central differences.
template <ParametricModel M>
double fd_log_jacobian(const M& m, const Vec& u) {
  const auto d = u.size();
  Eigen::MatrixXd j(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(u(i)));
    Vec up = u, um = u;
    up(i) += h;
    um(i) -= h;
    j.col(i) = (m.to_constrained(up) - m.to_constrained(um)) / (2.0 * h);
  }
  return std::log(std::abs(j.determinant()));
}

std::string data_path(const char* name) { return std::string(DPOST_SOURCE_DIR) + "/data/" + name; }

}  // namespace

TEST(NormalMean, DensityMatchesBoost) {
  const NormalMean m(1.7);
  const boost::math::normal_distribution<> ref(0.3, 1.7);
  for (double x : {-4.0, 0.0, 0.3, 2.5, 9.0})
    EXPECT_NEAR(m.log_density(Vec{{0.3}}, x), std::log(boost::math::pdf(ref, x)), 1e-12);
  EXPECT_THROW(NormalMean(0.0), Error);
}

TEST(NormalLocationScale, TransformsRoundTripWithJacobian) {
  const NormalLocationScale m;
  const Vec th{{-1.2, 0.4}};
  const Vec u = m.to_unconstrained(th);
  EXPECT_NEAR((m.to_constrained(u) - th).norm(), 0.0, 1e-14);
  EXPECT_NEAR(m.log_jacobian(u), fd_log_jacobian(m, u), 1e-7);
  EXPECT_THROW(m.to_unconstrained(Vec{{0.0, -1.0}}), Error);
}

TEST(ExpGamma, DensityIntegratesToOne) {
  const ExpGamma m;
  for (const Vec& th : {Vec{{5.0, 0.25}}, Vec{{0.7, 3.0}}, Vec{{40.0, 0.01}}}) {
    const auto w = m.window(th);
    const double total = gk_integrate([&](double x) { return std::exp(m.log_density(th, x)); }, w.lo, w.hi);
    EXPECT_NEAR(total, 1.0, 1e-9) << th.transpose();
  }
}

TEST(ExpGamma, LogOfGammaDrawsMatchesDensityAndMoments) {
  const ExpGamma m;
  const Vec th{{5.0, 0.25}};
  // Oracle: X = log W with W from std::gamma_distribution.
  std::mt19937_64 rng(11);
  std::gamma_distribution<double> gam(th(0), th(1));
  std::vector<double> x(200000);
  for (double& v : x) v = std::log(gam(rng));
  const Vec mom = m.moments(th);
  EXPECT_NEAR(mean(x), mom(0), 4.0 * std::sqrt(mom(1) / x.size()));
  EXPECT_NEAR(variance(x), mom(1), 0.01 * mom(1));
  // Change of variables: f_X(x) = f_W(e^x) e^x.
  const boost::math::gamma_distribution<> w(th(0), th(1));
  for (double v : {-3.0, -1.5, 0.0, 0.5})
    EXPECT_NEAR(m.log_density(th, v), std::log(boost::math::pdf(w, std::exp(v))) + v, 1e-10);
}

TEST(ExpGamma, JacobianMatchesFiniteDifferences) {
  const ExpGamma m;
  const Vec u{{std::log(3.0), std::log(0.5)}};
  EXPECT_NEAR(m.log_jacobian(u), fd_log_jacobian(m, u), 1e-7);
}

TEST(UnivariatePrior, DensitiesMatchBoost) {
  const auto n = UnivariatePrior::normal(1.0, 4.0);
  const auto g = UnivariatePrior::gamma(3.0, 0.5);
  const auto ig = UnivariatePrior::inverse_gamma(2.0, 0.1);
  const boost::math::normal_distribution<> bn(1.0, 2.0);
  const boost::math::gamma_distribution<> bg(3.0, 0.5);
  const boost::math::inverse_gamma_distribution<> big(2.0, 0.1);
  for (double x : {0.05, 0.4, 1.0, 3.3}) {
    EXPECT_NEAR(n.log_density(x), std::log(boost::math::pdf(bn, x)), 1e-12);
    EXPECT_NEAR(g.log_density(x), std::log(boost::math::pdf(bg, x)), 1e-12);
    EXPECT_NEAR(ig.log_density(x), std::log(boost::math::pdf(big, x)), 1e-12);
  }
  EXPECT_EQ(g.log_density(-1.0), -kInf);
  EXPECT_EQ(ig.log_density(0.0), -kInf);
  EXPECT_DOUBLE_EQ(UnivariatePrior::chi_square(3.0).mean(), 3.0);
}

TEST(UnivariatePrior, SampleMeansMatchAnalyticMeans) {
  Rng rng(5);
  for (const auto& p : {UnivariatePrior::normal(-2.0, 9.0), UnivariatePrior::gamma(2.5, 1.5),
                        UnivariatePrior::inverse_gamma(6.0, 5.0)}) {
    std::vector<double> xs(100000);
    for (double& x : xs) x = p.sample(rng);
    EXPECT_NEAR(mean(xs), p.mean(), 5.0 * stddev(xs) / std::sqrt(xs.size()));
  }
}

TEST(UnivariatePrior, RejectsBadParameters) {
  EXPECT_THROW(UnivariatePrior::normal(0.0, 0.0), Error);
  EXPECT_THROW(UnivariatePrior::gamma(-1.0, 1.0), Error);
  EXPECT_THROW(UnivariatePrior::inverse_gamma(1.0, 1.0), Error);
}

TEST(ProductPrior, SumsComponentsAndChecksDimension) {
  const ProductPrior p({UnivariatePrior::normal(0.0, 1.0), UnivariatePrior::gamma(2.0, 1.0)});
  const Vec th{{0.5, 1.5}};
  EXPECT_NEAR(p.log_density(th), p[0].log_density(0.5) + p[1].log_density(1.5), 1e-15);
  EXPECT_THROW(p.log_density(Vec{{1.0}}), Error);
  EXPECT_THROW(DPosterior<NormalMean>(NormalMean(), p, 10.0, [](const Vec&) { return 0.0; }), Error);
}

TEST(RandomEffectsModel, LikelihoodFormMatchesDirectSum) {
  const std::vector<std::vector<double>> groups = {{0.1, 0.3, -0.2}, {1.2, 0.9, 1.1}, {-0.5, -0.4, -0.9}};
  const RandomEffectsModel m(groups, {});
  Vec th(6);
  th << 0.05, 1.0, -0.6, 0.2, 0.25, 0.8;
  const boost::math::normal_distribution<> eps(0.0, 0.25), lat(0.2, 0.8);
  double ref = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (double y : groups[i]) ref += std::log(boost::math::pdf(eps, y - th(i)));
    ref += std::log(boost::math::pdf(lat, th(i)));
  }
  EXPECT_NEAR(m.observation_term(th) + m.latent_term(th), ref, 1e-10);
  const RandomEffectsPrior pr;
  const double lp = pr.mu.log_density(0.2) + pr.sigma2.log_density(0.0625) + std::log(0.5) +
                    pr.tau2.log_density(0.64) + std::log(1.6);
  EXPECT_NEAR(m.log_density(th), ref + lp, 1e-10);
}

TEST(RandomEffectsModel, DisparityTermsAreFiniteAndRejectDegenerateData) {
  HierarchicalSpec spec;
  spec.latent = TermKind::Disparity;
  spec.observation = TermKind::Disparity;
  spec.observation_estimator = Estimator::GaussHermite;
  const RandomEffectsModel m({{0.1, 0.3, -0.2, 0.0, 0.2}, {1.2, 0.9, 1.1, 1.0, 1.3}, {-0.5, -0.4, -0.9, -0.6, -0.7}},
                             spec);
  EXPECT_TRUE(std::isfinite(m.log_density(m.initial())));
  EXPECT_GT(m.latent_bandwidth(), 0.0);
  EXPECT_GT(m.observation_bandwidth(), 0.0);
  const auto p = m.problem();
  EXPECT_TRUE(std::isfinite(p.log_target(p.init)));
  EXPECT_THROW(RandomEffectsModel({{1.0, 2.0}}, {}), Error);
  EXPECT_THROW(RandomEffectsModel({{1.0, 1.0}, {2.0, 2.0}}, {}), Error);
}

TEST(BinomialLogitNormal, ObservationTermIsBinomialLogLikelihood) {
  const std::vector<double> k{3, 7, 0}, n{10, 12, 5};
  const BinomialLogitNormalModel m(k, n, {});
  Vec th(5);
  th << -0.7, 0.4, -2.0, 0.0, 1.0;
  double ref = 0.0;
  for (int i = 0; i < 3; ++i) {
    const boost::math::binomial_distribution<> b(n[i], expit(th(i)));
    // The model omits the binomial coefficient.
    ref += std::log(boost::math::pdf(b, k[i])) -
           std::log(boost::math::binomial_coefficient<double>(static_cast<unsigned>(n[i]),
                                                               static_cast<unsigned>(k[i])));
  }
  EXPECT_NEAR(m.observation_term(th), ref, 1e-10);
  HierarchicalSpec bad;
  bad.observation = TermKind::Disparity;
  EXPECT_THROW(BinomialLogitNormalModel(k, n, bad), Error);
  EXPECT_THROW(BinomialLogitNormalModel({5}, {3}, {}), Error);
}

TEST(BinomialLogitNormal, LoadsShippedData) {
  const auto d = read_parasite_csv(data_path("parasite.csv"));
  ASSERT_FALSE(d.trials.empty());
  for (std::size_t i = 0; i < d.trials.size(); ++i) EXPECT_LE(d.successes[i], d.trials[i]);
  HierarchicalSpec spec;
  spec.latent = TermKind::Disparity;
  spec.kind = DisparityKind::NegativeExponential;
  const BinomialLogitNormalModel m(d.successes, d.trials, spec);
  EXPECT_TRUE(std::isfinite(m.log_density(m.initial())));
}

TEST(RandomInterceptModel, LikelihoodFormMatchesDirectSum) {
  const auto d = read_survey_csv(data_path("survey.csv"));
  const RandomInterceptModel m(d, {});
  const Vec th = m.initial();
  const auto n = static_cast<Eigen::Index>(d.y.size());
  const double sigma = std::sqrt(th(n + 4)), tau = std::sqrt(th(n + 5));
  double ref = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = d.group[static_cast<std::size_t>(i)];
    for (int k = 0; k < 4; ++k)
      ref += normal_logpdf(d.y[static_cast<std::size_t>(i)][k] - th(i) - th(n + 2 + g) * d.times[k], 0.0, sigma);
    ref += normal_logpdf(th(i), th(n + g), tau);
  }
  EXPECT_NEAR(m.observation_term(th) + m.latent_term(th), ref, 1e-9);
  for (auto obs : {TermKind::Likelihood, TermKind::Disparity})
    for (auto lat : {TermKind::Likelihood, TermKind::Disparity}) {
      HierarchicalSpec s;
      s.observation = obs;
      s.latent = lat;
      const RandomInterceptModel r(d, s);
      EXPECT_TRUE(std::isfinite(r.log_density(r.initial())));
    }
}

TEST(Regression, OlsMatchesNormalEquations) {
  Rng rng(3);
  RegressionData d;
  d.covariates = Eigen::MatrixXd(40, 2);
  d.y = Vec(40);
  for (int i = 0; i < 40; ++i) {
    d.covariates(i, 0) = standard_normal(rng);
    d.covariates(i, 1) = standard_normal(rng);
    d.y(i) = 1.0 + 2.0 * d.covariates(i, 0) - d.covariates(i, 1) + 0.5 * standard_normal(rng);
  }
  const auto f = ols(d);
  const Eigen::MatrixXd x = d.design();
  const Vec ref = (x.transpose() * x).ldlt().solve(x.transpose() * d.y);
  EXPECT_NEAR((f.beta - ref).norm(), 0.0, 1e-10);
  EXPECT_NEAR((x.transpose() * f.residuals).norm(), 0.0, 1e-9);
  Vec th(4);
  th << f.beta, f.sigma;
  double nll = 0.0;
  for (int i = 0; i < 40; ++i) nll -= normal_logpdf(f.residuals(i), 0.0, f.sigma);
  EXPECT_NEAR(gaussian_regression_loss(d)(th), nll, 1e-9);
}

TEST(Regression, HuberLossReducesToGaussianForLargeCutoff) {
  RegressionData d;
  d.covariates = Eigen::MatrixXd::Zero(6, 1);
  d.covariates << 0, 1, 2, 3, 4, 5;
  d.y = Vec{{0.1, 1.2, 1.9, 3.1, 4.0, 5.2}};
  Vec th{{0.0, 1.0, 0.7}};
  // rho(u) = u^2/2 when |u| <= c, so the loss equals the Gaussian one minus the constant n log sqrt(2 pi).
  EXPECT_NEAR(huber_regression_loss(d, 100.0)(th), gaussian_regression_loss(d)(th) - 6.0 * kLogSqrt2Pi, 1e-10);
  EXPECT_THROW(huber_regression_loss(d, 0.0), Error);
  RegressionData tiny;
  tiny.covariates = Eigen::MatrixXd::Zero(2, 1);
  tiny.y = Vec{{1.0, 2.0}};
  EXPECT_THROW(ols(tiny), Error);
}

TEST(RegressionPrior, IncludesChangeOfVariablesToSigma) {
  const RegressionPrior p;
  const boost::math::inverse_gamma_distribution<> ig(2.0, 1.0);
  const double s = 0.8;
  EXPECT_NEAR(p.log_sigma(s), std::log(boost::math::pdf(ig, s * s) * 2.0 * s), 1e-12);
  // Integrates to one in sigma.
  EXPECT_NEAR(gk_integrate([&](double x) { return std::exp(p.log_sigma(x)); }, 1e-6, 200.0), 1.0, 1e-6);
}
