#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dpost/simharness.hpp"

using namespace dpost;

namespace {

Scenario small(Method method, DisparityKind kind, std::size_t reps = 6) {
  Scenario s;
  s.name = "small";
  s.family = Family::NormalMean;
  s.method = method;
  s.kind = kind;
  s.n = 20;
  s.chain.steps = 2000;
  s.chain.thinning = 2;
  s.chain.proposal_scales = {std::sqrt(0.5)};
  s.replications = reps;
  s.seed = 77;
  return s;
}

bool same_rows(const std::vector<TableRow>& a, const std::vector<TableRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    if (a[i].component != b[i].component || !eq(a[i].mean, b[i].mean) || !eq(a[i].sd, b[i].sd) ||
        !eq(a[i].coverage, b[i].coverage) || !eq(a[i].interval_length, b[i].interval_length))
      return false;
  }
  return true;
}

}  // namespace

TEST(Simulators, NormalAppendsOutliersAtOffsetFromTruth) {
  Scenario s = small(Method::Likelihood, DisparityKind::KullbackLeibler);
  s.contamination = {5, -3.0};
  const auto x = simulate_normal(s, 1);
  ASSERT_EQ(x.size(), 25u);
  for (std::size_t i = 20; i < 25; ++i) EXPECT_DOUBLE_EQ(x[i], 2.0);
  EXPECT_EQ(simulate_normal(s, 1), x);
  EXPECT_NE(simulate_normal(s, 2), x);
}

TEST(Simulators, ExpGammaOutlierAndMoments) {
  Scenario s;
  s.family = Family::ExpGamma;
  s.n = 20000;
  const auto x = simulate_expgamma(s, 3);
  // log of Gamma(5, 0.25): mean digamma(5) + log 0.25, variance trigamma(5).
  EXPECT_NEAR(mean(x), boost::math::digamma(5.0) + std::log(0.25), 0.01);
  EXPECT_NEAR(variance(x), boost::math::trigamma(5.0), 0.01);
  s.n = 20;
  s.contamination = {1, std::log(20.0)};
  const auto y = simulate_expgamma(s, 3);
  ASSERT_EQ(y.size(), 21u);
  EXPECT_DOUBLE_EQ(y.back(), std::log(20.0));
}

TEST(Simulators, RegressionCovariatesAreCorrelated) {
  const auto x = regression_covariates(20000, 5);
  ASSERT_EQ(x.cols(), 3);
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  EXPECT_NEAR(cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1)), 0.5, 0.03);
  EXPECT_NEAR(cov(2, 2), 1.0, 0.05);
}

TEST(Simulators, GroupsWithOutlyingGroup) {
  Scenario s;
  s.family = Family::RandomEffects;
  s.n = 10;
  s.contamination = {1, 40.0};
  const auto g = simulate_groups(s, 4);
  ASSERT_EQ(g.size(), 11u);
  for (const auto& grp : g) EXPECT_EQ(grp.size(), kRandomEffectsGroupSize);
  EXPECT_NEAR(mean(g.back()), 40.0, 1.0);
}

TEST(Scenario, ValidateRejectsInconsistentSettings) {
  auto s = small(Method::Likelihood, DisparityKind::KullbackLeibler);
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad.name.clear();
  EXPECT_THROW(bad.validate(), Error);
  bad = s;
  bad.contamination = {20, -3.0};
  EXPECT_THROW(bad.validate(), Error);
  bad = s;
  bad.method = Method::TukeyMcmc;
  EXPECT_THROW(bad.validate(), Error);  // no cutoff
  bad = s;
  bad.family = Family::ExpGamma;
  bad.method = Method::Disparity;
  bad.estimator = Estimator::GaussHermite;
  EXPECT_THROW(bad.validate(), Error);
  bad = s;
  bad.family = Family::RandomEffects;
  bad.method = Method::Disparity;
  EXPECT_THROW(bad.validate(), Error);  // needs a formulation
  bad = s;
  bad.level = 1.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Scenario, EnumNamesRoundTrip) {
  for (auto id : {TableId::NormalClean, TableId::NormalOutliers, TableId::ExpGamma, TableId::LinReg,
                  TableId::RandEffects})
    EXPECT_EQ(parse_table_id(to_string(id)), id);
  EXPECT_THROW(parse_table_id("bogus"), Error);
  EXPECT_EQ(parse_family(to_string(Family::ExpGamma)), Family::ExpGamma);
  EXPECT_EQ(parse_method(to_string(Method::HuberMin)), Method::HuberMin);
}

TEST(RunScenario, DeterministicAndOrderIndependent) {
  const auto s = small(Method::Disparity, DisparityKind::Hellinger);
  const auto a = run_scenario(s, 1);
  const auto b = run_scenario(s, 3);
  EXPECT_TRUE(same_rows(a.rows, b.rows));
  EXPECT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(a.rows[0].replications + a.excluded, 6u);
  auto other = s;
  other.seed = 78;
  EXPECT_FALSE(same_rows(a.rows, run_scenario(other, 1).rows));
}

TEST(RunScenario, ScenariosSharingSeedSeeSameData) {
  // Huber-min is a deterministic function of the data; two runs with different
  // chain settings but the same seed must agree exactly.
  auto s = small(Method::HuberMin, DisparityKind::KullbackLeibler);
  s.cutoff = kHuberCutoff80;
  auto t = s;
  t.chain.steps = 5000;
  EXPECT_TRUE(same_rows(run_scenario(s).rows, run_scenario(t).rows));
}

TEST(RunScenario, LikelihoodMatchesConjugatePosterior) {
  auto s = small(Method::Likelihood, DisparityKind::KullbackLeibler, 4);
  s.chain.steps = 20000;
  const auto r = run_scenario(s);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto x = simulate_normal(s, derive_seed(s.seed, i, 0));
    const double post = (std::accumulate(x.begin(), x.end(), 0.0)) / (20.0 + 1.0 / 25.0);
    EXPECT_NEAR(r.replicates[i].estimate(0), post, 0.02);
  }
}

TEST(RunScenario, ExcludedReplicationsAreCounted) {
  auto s = small(Method::Likelihood, DisparityKind::KullbackLeibler, 3);
  s.chain.proposal_scales = {500.0};  // acceptance far below 1 percent
  s.chain.steps = 2000;
  const auto r = run_scenario(s);
  EXPECT_EQ(r.excluded, 3u);
  EXPECT_EQ(r.rows[0].replications, 0u);
  EXPECT_TRUE(std::isnan(r.rows[0].bias));
  EXPECT_EQ(r.exclusion_reasons.size(), 1u);
}

TEST(RunScenario, RedescendingHellingerBias) {
  auto far = small(Method::Disparity, DisparityKind::Hellinger, 30);
  far.chain.steps = 4000;
  far.contamination = {5, -10.0};
  auto near = far;
  near.contamination = {5, -3.0};
  EXPECT_LE(std::abs(run_scenario(far).rows[0].bias), std::abs(run_scenario(near).rows[0].bias));
}

TEST(TableSpec, CheckedSubsetKeepsReferencedScenarios) {
  for (auto id : {TableId::NormalClean, TableId::NormalOutliers, TableId::ExpGamma,
                  TableId::RandEffects}) {
    const auto full = table_spec(id, 1.0, 1);
    const auto sub = full.checked_only();
    EXPECT_FALSE(sub.checks.empty());
    EXPECT_LE(sub.entries.size(), full.entries.size());
    std::set<std::string> names;
    for (const auto& e : sub.entries) names.insert(e.scenario.name);
    for (const auto& c : sub.checks) {
      EXPECT_TRUE(names.count(c.scenario)) << c.scenario;
      if (!c.baseline.empty()) {
        EXPECT_TRUE(names.count(c.baseline));
      }
    }
    for (const auto& e : full.entries) EXPECT_NO_THROW(e.scenario.validate()) << e.scenario.name;
  }
  EXPECT_TRUE(table_spec(TableId::LinReg, 1.0, 1).checks.empty());
  EXPECT_EQ(table_spec(TableId::NormalOutliers, 1.0, 1).entries.size(), 72u);
  EXPECT_EQ(table_spec(TableId::ExpGamma, 0.1, 1).entries.front().scenario.replications, 30u);
  EXPECT_THROW(table_spec(TableId::NormalClean, 0.0, 1), Error);
  EXPECT_THROW(table_spec(TableId::NormalClean, 1.5, 1), Error);
}

TEST(TableOutput, CsvIsDeterministicAndCarriesNoTimings) {
  auto spec = table_spec(TableId::NormalClean, 0.02, 9).checked_only();
  for (auto& e : spec.entries) e.scenario.chain.steps = 1000;
  const auto a = run_table(spec, 2), b = run_table(spec, 1);
  EXPECT_EQ(table_csv(a).str(), table_csv(b).str());
  EXPECT_EQ(check_csv(a).str(), check_csv(b).str());
  EXPECT_EQ(reference_diff_csv(a).str(), reference_diff_csv(b).str());
  const auto header = table_csv(a).str().substr(0, table_csv(a).str().find('\n'));
  EXPECT_EQ(header.find("seconds"), std::string::npos);
  EXPECT_NE(header.find("ref_bias"), std::string::npos);
  EXPECT_EQ(a.checks.size(), spec.checks.size());
}

TEST(TableOutput, CheckStatistics) {
  TableResult t;
  TableRow base, other;
  base.scenario = "a";
  other.scenario = "b";
  base.component = other.component = "mu";
  base.bias = -0.2;
  base.sd = 2.0;
  other.sd = 1.0;
  ScenarioResult ra, rb;
  ra.scenario.name = "a";
  rb.scenario.name = "b";
  ra.rows = {base};
  rb.rows = {other};
  t.results = {ra, rb};
  EXPECT_DOUBLE_EQ(check_statistic(t, {"a", "mu", "abs_bias", 0, 1, ""}), 0.2);
  EXPECT_DOUBLE_EQ(check_statistic(t, {"b", "mu", "variance_ratio", 0, 1, "a"}), 0.25);
  EXPECT_THROW(check_statistic(t, {"a", "mu", "median", 0, 1, ""}), Error);
  EXPECT_THROW(check_statistic(t, {"zz", "mu", "bias", 0, 1, ""}), Error);
}

TEST(Bench, ReportsEveryMethodRelativeToLikelihood) {
  const auto b = run_bench(1, 20, 500, 1);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b.front().method, "likelihood");
  EXPECT_DOUBLE_EQ(b.front().ratio, 1.0);
  for (const auto& e : b) EXPECT_GT(e.seconds, 0.0);
}
