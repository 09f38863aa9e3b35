#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "dpost/inference.hpp"

using namespace dpost;

namespace {

const GFunction kHd(DisparityKind::Hellinger);
const GFunction kKl(DisparityKind::KullbackLeibler);

ChainConfig chain(std::size_t steps, double scale, std::uint64_t seed) {
  ChainConfig c;
  c.steps = steps;
  c.proposal_scales = {scale};
  c.seed = seed;
  return c;
}

ProductPrior normal_prior(double mean = 0.0, double var = 25.0) {
  return ProductPrior({UnivariatePrior::normal(mean, var)});
}

// Conjugate oracle: with the KL kind, D(h, f_mu) = const + (mu - E_h X)^2 / 2 for the
// unit-variance normal model, so the D-posterior is normal with data mean E_h X.
double conjugate_mean(double data_mean, double n, double m0 = 0.0, double v0 = 25.0) {
  return (n * data_mean + m0 / v0) / (n + 1.0 / v0);
}

}  // namespace

TEST(ContaminatedDensity, MixtureIntegratesToOne) {
  const auto h = ContaminatedDensity(normal_density(5.0, 1.0), -10.0, 0.1, 0.1).density();
  const auto windows = IntegrationWindows::merge(h.windows, h.cuts);
  double total = 0.0;
  for (const auto& [a, b] : windows.pieces)
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h.pdf, a, b, 15, 1e-12);
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(h(-10.0), 0.1 / 0.1 + 0.9 * normal_pdf(-10.0, 5.0, 1.0));
  EXPECT_DOUBLE_EQ(h.mass, 1.0);
  EXPECT_THROW(ContaminatedDensity(normal_density(0, 1), 0.0, 1.5), Error);
  EXPECT_THROW(ContaminatedDensity(normal_density(0, 1), 0.0, 0.1, 0.0), Error);
}

TEST(ContaminatedDensity, DrawsFollowMixtureWeights) {
  const auto h = ContaminatedDensity(normal_density(5.0, 1.0), 30.0, 0.25).density();
  Rng rng(1);
  int far = 0;
  for (int i = 0; i < 40000; ++i) far += h.draw(rng) > 20.0;
  EXPECT_NEAR(far / 40000.0, 0.25, 0.01);
}

TEST(Mde, RecoversModelParametersFromModelDensity) {
  const NormalLocationScale model;
  const auto d = analytic_disparity(model, kHd, normal_density(5.0, 1.0));
  const auto r = mde(model, d, Vec{{4.0, 1.5}});
  EXPECT_NEAR(r.theta(0), 5.0, 1e-4);
  EXPECT_NEAR(r.theta(1), 1.0, 1e-4);
  EXPECT_NEAR(r.value, 0.0, 1e-9);
}

TEST(Mde, HellingerResistsDistantContamination) {
  const NormalLocationScale model;
  const auto h = ContaminatedDensity(normal_density(5.0, 1.0), -10.0, 0.1, 0.1).density();
  const auto hd = mde(model, analytic_disparity(model, kHd, h), Vec{{5.0, 1.0}});
  EXPECT_NEAR(hd.theta(0), 5.0, 0.15);
  const auto kl = mde(model, analytic_disparity(model, kKl, h), Vec{{5.0, 1.0}});
  EXPECT_NEAR(kl.theta(0), 0.9 * 5.0 + 0.1 * -10.0, 1e-3);  // KL tracks the mixture mean
}

TEST(Mde, EmpiricalKlGivesMaximumLikelihood) {
  Rng rng(4);
  std::vector<double> x(30);
  for (double& v : x) v = 2.0 + 1.5 * standard_normal(rng);
  const NormalLocationScale model;
  const auto r = mde(model, empirical_kl(model, x), Vec{{0.0, 1.0}});
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  EXPECT_NEAR(r.theta(0), m, 1e-6);
  EXPECT_NEAR(r.theta(1), std::sqrt(ss / x.size()), 1e-6);
}

TEST(DisparityInformation, EqualsFisherInformationAtModel) {
  const NormalLocationScale model;
  const double sigma = 1.5;
  for (auto kind : {DisparityKind::Hellinger, DisparityKind::NegativeExponential}) {
    const auto d = analytic_disparity(model, GFunction(kind), normal_density(2.0, sigma));
    const auto info = disparity_information(d, Vec{{2.0, sigma}});
    EXPECT_NEAR(info.matrix(0, 0), 1.0 / (sigma * sigma), 0.02 / (sigma * sigma));
    EXPECT_NEAR(info.matrix(1, 1), 2.0 / (sigma * sigma), 0.04 / (sigma * sigma));
    EXPECT_NEAR(info.matrix(0, 1), 0.0, 1e-3);
    EXPECT_NEAR(info.matrix(0, 1), info.matrix(1, 0), 1e-8);
    EXPECT_TRUE(info.positive_definite);
  }
}

TEST(DisparityInformation, TransformsWithJacobianSquared) {
  // Rescaling data by c rescales the location by c, so I_mu scales by 1/c^2.
  const double c = 3.0;
  const auto g = ContaminatedDensity(normal_density(0.0, 1.0), 4.0, 0.05).density();
  const auto gc = AnalyticDensity{[&](double x) { return g(x / c) / c; },
                                  {gaussian_window(0.0, c), {3.0 * c, 5.0 * c, 3.0 * c, 5.0 * c, c}},
                                  {c * 3.95, c * 4.05}, nullptr, 1.0};
  const auto i1 = disparity_information(analytic_disparity(NormalMean(1.0), kHd, g), Vec{{0.0}});
  const auto ic = disparity_information(analytic_disparity(NormalMean(c), kHd, gc), Vec{{0.0}});
  EXPECT_NEAR(ic.matrix(0, 0) * c * c, i1.matrix(0, 0), 1e-3 * i1.matrix(0, 0));
}

TEST(DisparityInformation, WaldIntervalMatchesChainInterval) {
  Rng rng(7);
  std::vector<double> x(20);
  for (double& v : x) v = 5.0 + standard_normal(rng);
  const NormalMean model;
  const KernelDensity kde(x, select_bandwidth(x, BandwidthSelector::SheatherJones));
  const auto d = gh_disparity(model, GaussHermiteDisparity(kHd, 80), kde);
  const auto m = mde(model, d, Vec{{median(x)}});
  const auto info = disparity_information(d, m.theta);
  const double wald = 2.0 * 1.959963984540054 / std::sqrt(20.0 * info.matrix(0, 0));
  const auto r = fit(DPosterior<NormalMean>(model, normal_prior(), 20.0, d).problem(m.theta),
                     chain(40000, 0.6, 2));
  EXPECT_NEAR(r.summary.length(0), wald, 0.15 * wald);
}

TEST(Influence, KlDisplacementGrowsLinearly) {
  const NormalMean model;
  InfluenceOptions opt;
  opt.chain = chain(20000, 0.6, 3);
  const double alpha = 0.05;
  for (double z : {0.0, 10.0, 20.0}) {
    const auto r = influence_alpha(model, normal_prior(), 20.0, normal_density(5.0, 1.0), kKl, z,
                                   alpha, Vec{{5.0}}, opt);
    const double oracle = (conjugate_mean((1 - alpha) * 5.0 + alpha * z, 20.0) - conjugate_mean(5.0, 20.0)) / alpha;
    EXPECT_NEAR(r.displacement(0), oracle, 4.0 * r.mc_se(0) + 1e-3) << "z=" << z;
  }
}

TEST(Influence, HellingerRedescends) {
  const NormalMean model;
  InfluenceOptions opt;
  opt.chain = chain(20000, 0.6, 3);
  const auto at = [&](double z) {
    return influence_alpha(model, normal_prior(), 20.0, normal_density(5.0, 1.0), kHd, z, 0.05,
                           Vec{{5.0}}, opt);
  };
  const auto near = at(7.0), far = at(20.0);
  EXPECT_GT(std::abs(near.displacement(0)), 0.3);
  EXPECT_LT(std::abs(far.displacement(0)), std::abs(near.displacement(0)));
  EXPECT_LT(std::abs(far.displacement(0)), 4.0 * far.mc_se(0) + 0.2);
}

TEST(Influence, RejectsZeroLevel) {
  try {
    influence_alpha(NormalMean(), normal_prior(), 20.0, normal_density(5, 1), kHd, 3.0, 0.0,
                    Vec{{5.0}}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidLevel);
  }
}

TEST(Breakdown, ZeroLevelLeavesFunctionalUnchanged) {
  const NormalMean model;
  const auto cfg = chain(10000, 0.6, 5);
  const auto g = normal_density(5.0, 1.0);
  const auto a = posterior_functional(model, normal_prior(), 20.0, analytic_disparity(model, kHd, g),
                                      Vec{{5.0}}, cfg);
  const auto b = posterior_functional(
      model, normal_prior(), 20.0,
      analytic_disparity(model, kHd, ContaminatedDensity(g, 50.0, 0.0).density()), Vec{{5.0}}, cfg);
  EXPECT_NEAR(a.edap(0), b.edap(0), 1e-6);
}

TEST(Breakdown, ReportShapeAndValidation) {
  const NormalMean model;
  InfluenceOptions opt;
  opt.chain = chain(4000, 0.6, 5);
  const auto rep = breakdown_limit_check(model, normal_prior(), 20.0, normal_density(5.0, 1.0), kHd,
                                         0.2, {10.0, 50.0}, Vec{{5.0}}, opt);
  EXPECT_EQ(rep.z.size(), 2u);
  EXPECT_EQ(rep.scaled_n, 18u);
  EXPECT_TRUE(std::isfinite(rep.terminal_ratio()));
  EXPECT_THROW(breakdown_limit_check(model, normal_prior(), 20.0, normal_density(5.0, 1.0), kHd, 0.2,
                                     {50.0, 10.0}, Vec{{5.0}}, opt),
               Error);
}

TEST(ZeroDensity, PosteriorIsThePrior) {
  const NormalMean model;
  const auto d = analytic_disparity(model, kHd, zero_density(gaussian_window(5.0, 1.0)));
  // D(0, f) = G(-1) for every theta.
  EXPECT_NEAR(d(Vec{{-3.0}}), d(Vec{{8.0}}), 1e-9);
  const auto r = posterior_functional(model, normal_prior(), 20.0, d, Vec{{5.0}}, chain(40000, 12.0, 10));
  EXPECT_NEAR(r.edap(0), 0.0, 3.0 * r.mc_se(0));
}

TEST(ZeroVarianceMean, ExactForGaussianTarget) {
  const NormalMean model;
  const auto d = analytic_disparity(model, kKl, normal_density(5.0, 1.0));
  const DPosterior<NormalMean> post(model, normal_prior(), 50.0, d);
  const auto problem = post.problem(Vec{{5.0}});
  const auto cfg = chain(4000, 0.3, 1);
  const auto r = fit(problem, cfg);
  const Vec zv = zero_variance_mean(problem, r.chain, r.summary);
  EXPECT_NEAR(zv(0), conjugate_mean(5.0, 50.0), 1e-5);
  EXPECT_GT(std::abs(r.summary.edap(0) - conjugate_mean(5.0, 50.0)), std::abs(zv(0) - conjugate_mean(5.0, 50.0)));
}

TEST(EdapMdeGap, KlMatchesConjugateTheory) {
  const NormalMean model;
  const auto d = analytic_disparity(model, kKl, normal_density(5.0, 1.0));
  const auto pts = edap_mde_gap(model, normal_prior(), d, {50, 200}, Vec{{4.0}}, chain(6000, 2.4, 3));
  for (const auto& p : pts) {
    EXPECT_NEAR(p.mde(0), 5.0, 1e-5);
    EXPECT_NEAR(p.gap, std::abs(conjugate_mean(5.0, static_cast<double>(p.n)) - 5.0), 1e-4) << p.n;
  }
}

TEST(EdapMdeGap, PriorAtTruthGivesSmallerGap) {
  const NormalMean model;
  const auto d = gh_disparity(model, GaussHermiteDisparity(kHd, 80),
                              [](double x) { return normal_pdf(x, 5.0, 1.0); });
  const auto cfg = chain(8000, 2.4, 4);
  const auto at = edap_mde_gap(model, normal_prior(5.0), d, {50}, Vec{{5.0}}, cfg);
  const auto off = edap_mde_gap(model, normal_prior(-5.0), d, {50}, Vec{{5.0}}, cfg);
  EXPECT_LT(at[0].gap, off[0].gap);
}
