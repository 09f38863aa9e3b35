#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "dpost/disparity.hpp"
#include "dpost/error.hpp"
#include "dpost/hierarchical.hpp"
#include "dpost/io.hpp"
#include "dpost/kde.hpp"
#include "dpost/models.hpp"
#include "dpost/optimize.hpp"
#include "dpost/parallel.hpp"
#include "dpost/posterior.hpp"
#include "dpost/regression.hpp"
#include "dpost/rng.hpp"
#include "dpost/sampler.hpp"

namespace dpost {

inline constexpr double kHuberCutoff80 = 0.8416212335729143;   // standard normal 0.8 quantile
inline constexpr double kHuberCutoff99 = 2.3263478740408408;   // standard normal 0.99 quantile
inline constexpr double kTukeyCutoff = 4.685;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Family { NormalMean, ExpGamma, LinearRegression, RandomEffects };
enum class Method { Likelihood, Disparity, HuberMcmc, TukeyMcmc, HuberMin };
/// Which disparity construction a Disparity method uses. Standard is the
/// i.i.d. form (or the conditional form for regression).
enum class Formulation { Standard, Homoscedastic, Marginal, Observation, Latent, Both };
enum class TableId { NormalClean, NormalOutliers, ExpGamma, LinReg, RandEffects };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::NormalMean: return "normal-mean";
    case Family::ExpGamma: return "expgamma";
    case Family::LinearRegression: return "linreg";
    case Family::RandomEffects: return "random-effects";
  }
  return "?";
}
inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Likelihood: return "likelihood";
    case Method::Disparity: return "disparity";
    case Method::HuberMcmc: return "huber-mcmc";
    case Method::TukeyMcmc: return "tukey-mcmc";
    case Method::HuberMin: return "huber-min";
  }
  return "?";
}
inline std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::Standard: return "standard";
    case Formulation::Homoscedastic: return "homoscedastic";
    case Formulation::Marginal: return "marginal";
    case Formulation::Observation: return "observation";
    case Formulation::Latent: return "latent";
    case Formulation::Both: return "both";
  }
  return "?";
}
inline std::string_view to_string(TableId t) {
  switch (t) {
    case TableId::NormalClean: return "normal-clean";
    case TableId::NormalOutliers: return "normal-outliers";
    case TableId::ExpGamma: return "expgamma";
    case TableId::LinReg: return "linreg";
    case TableId::RandEffects: return "randeffects";
  }
  return "?";
}

template <class E, std::size_t N>
E parse_enum(std::string_view s, const E (&all)[N], const char* what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw Error(ErrorCode::InvalidParam, std::string("unknown ") + what + " '" + std::string(s) + "'");
}
inline Family parse_family(std::string_view s) {
  constexpr Family all[] = {Family::NormalMean, Family::ExpGamma, Family::LinearRegression,
                            Family::RandomEffects};
  return parse_enum(s, all, "family");
}
inline Method parse_method(std::string_view s) {
  constexpr Method all[] = {Method::Likelihood, Method::Disparity, Method::HuberMcmc,
                            Method::TukeyMcmc, Method::HuberMin};
  return parse_enum(s, all, "method");
}
inline Formulation parse_formulation(std::string_view s) {
  constexpr Formulation all[] = {Formulation::Standard, Formulation::Homoscedastic,
                                 Formulation::Marginal, Formulation::Observation,
                                 Formulation::Latent, Formulation::Both};
  return parse_enum(s, all, "formulation");
}
inline TableId parse_table_id(std::string_view s) {
  constexpr TableId all[] = {TableId::NormalClean, TableId::NormalOutliers, TableId::ExpGamma,
                             TableId::LinReg, TableId::RandEffects};
  return parse_enum(s, all, "table");
}
/// Extra observations appended to each simulated data set.
///   normal-mean:     `count` points at true mean + location
///   expgamma:        `count` points at location (log scale)
///   random-effects:  `count` extra groups of 5 observations around location (sd 0.2)
struct Contamination {
  std::size_t count = 0;
  double location = 0.0;
};

struct Scenario {
  std::string name;
  Family family = Family::NormalMean;
  Method method = Method::Likelihood;
  DisparityKind kind = DisparityKind::Hellinger;
  Formulation formulation = Formulation::Standard;
  Estimator estimator = Estimator::Auto;
  std::size_t n = 20;  // observations, or groups for random effects
  Contamination contamination;
  double cutoff = 0.0;  // Huber / Tukey
  ChainConfig chain;    // per-replication seeds are derived; empty scales = automatic
  std::size_t replications = 200;
  std::uint64_t seed = 0;  // data seed; scenarios sharing it see the same data sets
  std::size_t mc_samples = 1000;
  int gh_points = 80;
  double level = 0.95;
  BandwidthSelector bandwidth = BandwidthSelector::SheatherJones;  // i.i.d. families only

  void validate() const {
    require(!name.empty(), ErrorCode::InvalidParam, "scenario needs a name");
    require(replications >= 1, ErrorCode::InvalidParam, "replications must be >= 1");
    require(contamination.count < n, ErrorCode::InvalidParam,
            "contamination count must be below n");
    require(level > 0.0 && level < 1.0, ErrorCode::InvalidLevel, "level must lie in (0, 1)");
    const bool robust = method == Method::HuberMcmc || method == Method::TukeyMcmc ||
                        method == Method::HuberMin;
    if (robust) require(cutoff > 0.0, ErrorCode::InvalidParam, "robust loss needs a cutoff > 0");
    const bool re_form = formulation == Formulation::Observation ||
                         formulation == Formulation::Latent || formulation == Formulation::Both;
    const bool reg_form =
        formulation == Formulation::Homoscedastic || formulation == Formulation::Marginal;
    switch (family) {
      case Family::NormalMean:
        require(!re_form && !reg_form, ErrorCode::InvalidParam,
                "normal-mean supports only the standard formulation");
        break;
      case Family::ExpGamma:
        require(method == Method::Likelihood || method == Method::Disparity,
                ErrorCode::InvalidParam, "expgamma supports likelihood and disparity methods");
        require(formulation == Formulation::Standard, ErrorCode::InvalidParam,
                "expgamma supports only the standard formulation");
        require(estimator != Estimator::GaussHermite, ErrorCode::InvalidParam,
                "Gauss-Hermite needs a Gaussian model; expgamma is not one");
        break;
      case Family::LinearRegression:
        require(method != Method::TukeyMcmc && !re_form, ErrorCode::InvalidParam,
                "unsupported linreg method/formulation");
        require(contamination.count == 0, ErrorCode::InvalidParam,
                "linreg scenarios carry no contamination");
        require(n > 5, ErrorCode::InsufficientData, "linreg needs n > 5");
        break;
      case Family::RandomEffects:
        require(method == Method::Likelihood || method == Method::Disparity,
                ErrorCode::InvalidParam, "random effects support likelihood and disparity methods");
        require(method == Method::Likelihood || re_form, ErrorCode::InvalidParam,
                "random-effects disparity needs formulation observation, latent or both");
        require(n >= 2, ErrorCode::InsufficientData, "random effects need >= 2 groups");
        break;
    }
    if (!(family == Family::LinearRegression && method == Method::HuberMin) &&
        !(family == Family::NormalMean && method == Method::HuberMin)) {
      require(chain.steps >= 4, ErrorCode::InvalidParam, "chain needs steps");
    }
  }
};

/// True parameter values and reported component names of a family.
struct TruthSpec {
  Vec value;
  std::vector<std::string> names;
};

inline constexpr double kNormalMeanTruth = 5.0;
inline constexpr double kExpGammaShape = 5.0, kExpGammaScale = 0.25;
inline constexpr double kRegressionCoef = 1.0, kRegressionSigma = 1.0;
inline constexpr std::size_t kRegressionCovariates = 3;
inline constexpr double kRandomEffectsSigma = 0.2;
inline constexpr std::size_t kRandomEffectsGroupSize = 5;

inline TruthSpec truth_of(Family f) {
  switch (f) {
    case Family::NormalMean: return {Vec{{kNormalMeanTruth}}, {"mu"}};
    case Family::ExpGamma: return {Vec{{kExpGammaShape, kExpGammaScale}}, {"shape", "scale"}};
    case Family::LinearRegression:
      return {Vec{{kRegressionCoef, kRegressionCoef, kRegressionCoef, kRegressionCoef,
                   kRegressionSigma}},
              {"beta0", "beta1", "beta2", "beta3", "sigma"}};
    case Family::RandomEffects:
      return {Vec{{0.0, kRandomEffectsSigma, 1.0}}, {"mu", "sigma", "tau"}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Data generators

inline std::vector<double> simulate_normal(const Scenario& s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(s.n);
  for (double& v : x) v = kNormalMeanTruth + standard_normal(rng);
  for (std::size_t k = 0; k < s.contamination.count; ++k)
    x.push_back(kNormalMeanTruth + s.contamination.location);
  return x;
}

inline std::vector<double> simulate_expgamma(const Scenario& s, std::uint64_t seed) {
  Rng rng(seed);
  std::gamma_distribution<double> gam(kExpGammaShape, kExpGammaScale);
  std::vector<double> x(s.n);
  for (double& v : x) v = std::log(gam(rng));
  for (std::size_t k = 0; k < s.contamination.count; ++k) x.push_back(s.contamination.location);
  return x;
}

/// Covariates with unit variances and pairwise correlation 0.5, drawn once
/// per master seed and held fixed across replications.
inline Eigen::MatrixXd regression_covariates(std::size_t n, std::uint64_t seed) {
  const auto p = static_cast<Eigen::Index>(kRegressionCovariates);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(p, p, 0.5);
  corr.diagonal().setOnes();
  const Eigen::MatrixXd l = corr.llt().matrixL();
  Rng rng(derive_seed(seed, 0xC0));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vec z(p);
    for (Eigen::Index j = 0; j < p; ++j) z(j) = standard_normal(rng);
    x.row(i) = (l * z).transpose();
  }
  return x;
}

inline RegressionData simulate_regression(const Scenario& s, const Eigen::MatrixXd& covariates,
                                          std::uint64_t seed) {
  Rng rng(seed);
  RegressionData d;
  d.covariates = covariates;
  d.y = Vec(covariates.rows());
  for (Eigen::Index i = 0; i < d.y.size(); ++i)
    d.y(i) = kRegressionCoef * (1.0 + covariates.row(i).sum()) + kRegressionSigma * standard_normal(rng);
  (void)s;
  return d;
}

inline std::vector<std::vector<double>> simulate_groups(const Scenario& s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> groups;
  const auto group = [&](double center) {
    std::vector<double> g(kRandomEffectsGroupSize);
    for (double& y : g) y = center + kRandomEffectsSigma * standard_normal(rng);
    groups.push_back(std::move(g));
  };
  for (std::size_t i = 0; i < s.n; ++i) group(standard_normal(rng));
  for (std::size_t k = 0; k < s.contamination.count; ++k) group(s.contamination.location);
  return groups;
}

// ---------------------------------------------------------------------------
// One replication

struct ReplicateResult {
  Vec estimate;  // reported components only
  Vec lower, upper;
  bool has_interval = true;
  double acceptance_rate = kNaN;
  double sample_seconds = 0.0;  // sampling loop (or optimizer) wall time
  double setup_seconds = 0.0;   // density estimation and precomputation
  bool excluded = false;
  std::string reason;
};

namespace detail {

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Shape k with trigamma(k) = v, by bisection on log k.
inline double expgamma_shape_from_variance(double v) {
  double lo = std::log(1e-3), hi = std::log(1e6);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::trigamma(std::exp(mid)) > v) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

inline ChainConfig chain_for(const Scenario& s, std::uint64_t rep, std::vector<double> auto_scales) {
  ChainConfig c = s.chain;
  c.seed = derive_seed(s.seed, rep, 1);
  if (c.proposal_scales.empty()) c.proposal_scales = std::move(auto_scales);
  return c;
}

inline void take_summary(ReplicateResult& r, const PosteriorSummary& sum,
                         const std::vector<Eigen::Index>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  r.estimate.resize(k);
  r.lower.resize(k);
  r.upper.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    r.estimate(j) = sum.edap(idx[static_cast<std::size_t>(j)]);
    r.lower(j) = sum.lower(idx[static_cast<std::size_t>(j)]);
    r.upper(j) = sum.upper(idx[static_cast<std::size_t>(j)]);
  }
  r.acceptance_rate = sum.acceptance_rate;
  if (sum.stuck) {
    r.excluded = true;
    r.reason = "stuck chain";
  }
}

inline std::vector<Eigen::Index> all_indices(Eigen::Index d) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

inline RobustLoss robust_loss_of(Method m) {
  return m == Method::TukeyMcmc ? RobustLoss::Tukey : RobustLoss::Huber;
}

/// Huber M-estimate of a normal mean with unit scale; interval is
/// estimate +- 2 sandwich standard errors.
inline void huber_location(const std::vector<double>& x, double c, ReplicateResult& r) {
  const auto obj = [&](const Vec& m) {
    double s = 0.0;
    for (double v : x) s += robust_rho(RobustLoss::Huber, c, v - m(0));
    return s;
  };
  NelderMeadOptions opt;
  opt.tolerance = 1e-12;
  const auto res = nelder_mead(obj, Vec{{median(x)}}, opt);
  const double mu = res.x(0);
  double num = 0.0, den = 0.0;
  for (double v : x) {
    const double u = v - mu;
    const double psi = std::clamp(u, -c, c);
    num += psi * psi;
    den += std::abs(u) <= c ? 1.0 : 0.0;
  }
  const double se = den > 0.0 ? std::sqrt(num) / den : kInf;
  r.estimate = Vec{{mu}};
  r.lower = Vec{{mu - 2.0 * se}};
  r.upper = Vec{{mu + 2.0 * se}};
}

inline std::vector<double> regression_scales(const RegressionData& d) {
  const auto f = ols(d);
  const Eigen::MatrixXd x = d.design();
  const Eigen::MatrixXd inv = (x.transpose() * x).inverse();
  const double scale = 2.38 / std::sqrt(static_cast<double>(x.cols() + 1));
  std::vector<double> s;
  for (Eigen::Index j = 0; j < x.cols(); ++j) s.push_back(scale * f.sigma * std::sqrt(inv(j, j)));
  s.push_back(scale / std::sqrt(2.0 * static_cast<double>(d.n())));
  return s;
}

}  // namespace detail

/// Simulates data set `rep` of the scenario and fits it. Library errors in
/// the fit (and stuck chains) mark the replication excluded.
inline ReplicateResult run_replicate(const Scenario& s, std::size_t rep,
                                     const Eigen::MatrixXd* covariates = nullptr) {
  using detail::Clock;
  ReplicateResult r;
  const std::uint64_t data_seed = derive_seed(s.seed, rep, 0);
  const std::uint64_t aux_seed = derive_seed(s.seed, rep, 2);
  const GFunction gfun(s.kind);
  try {
    auto t0 = Clock::now();
    switch (s.family) {
      case Family::NormalMean: {
        const auto x = simulate_normal(s, data_seed);
        if (s.method == Method::HuberMin) {
          t0 = Clock::now();
          detail::huber_location(x, s.cutoff, r);
          r.sample_seconds = detail::seconds_since(t0);
          break;
        }
        const NormalMean model(1.0);
        const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
        DisparityFn d;
        switch (s.method) {
          case Method::Likelihood: d = empirical_kl(model, x); break;
          case Method::HuberMcmc:
          case Method::TukeyMcmc:
            d = robust_loss_disparity(model, x, detail::robust_loss_of(s.method), s.cutoff);
            break;
          case Method::Disparity: {
            const KernelDensity kde(x, select_bandwidth(x, s.bandwidth));
            if (resolve_estimator(s.estimator, s.kind) == Estimator::MonteCarlo) {
              Rng rng(aux_seed);
              d = mc_disparity(model, std::make_shared<const MonteCarloDisparity>(
                                          MonteCarloDisparity::from_kde(gfun, kde, s.mc_samples, rng)));
            } else {
              d = gh_disparity(model, GaussHermiteDisparity(gfun, s.gh_points), kde);
            }
            break;
          }
          case Method::HuberMin: break;
        }
        const DPosterior<NormalMean> post(model, prior, static_cast<double>(x.size()), d);
        const auto problem = post.problem(Vec{{median(x)}});
        r.setup_seconds = detail::seconds_since(t0);
        t0 = Clock::now();
        const auto fr = fit(problem, detail::chain_for(s, rep, {std::sqrt(0.5)}), s.level);
        r.sample_seconds = detail::seconds_since(t0);
        detail::take_summary(r, fr.summary, {0});
        break;
      }
      case Family::ExpGamma: {
        const auto x = simulate_expgamma(s, data_seed);
        const ExpGamma model;
        const ProductPrior prior({UnivariatePrior::chi_square(3.0), UnivariatePrior::chi_square(0.3)});
        DisparityFn d;
        if (s.method == Method::Likelihood) {
          d = empirical_kl(model, x);
        } else {
          const KernelDensity kde(x, select_bandwidth(x, s.bandwidth));
          Rng rng(aux_seed);
          d = mc_disparity(model, std::make_shared<const MonteCarloDisparity>(
                                      MonteCarloDisparity::from_kde(gfun, kde, s.mc_samples, rng)));
        }
        const double k0 = detail::expgamma_shape_from_variance(variance(x));
        const double s0 = std::exp(mean(x) - boost::math::digamma(k0));
        const DPosterior<ExpGamma> post(model, prior, static_cast<double>(x.size()), d);
        const auto problem = post.problem(Vec{{k0, s0}});
        r.setup_seconds = detail::seconds_since(t0);
        t0 = Clock::now();
        const auto fr = fit(problem, detail::chain_for(s, rep, {0.15, 0.15}), s.level);
        r.sample_seconds = detail::seconds_since(t0);
        detail::take_summary(r, fr.summary, {0, 1});
        break;
      }
      case Family::LinearRegression: {
        require(covariates != nullptr, ErrorCode::InvalidParam, "linreg needs fixed covariates");
        const auto d = simulate_regression(s, *covariates, data_seed);
        if (s.method == Method::HuberMin) {
          t0 = Clock::now();
          r.estimate = huber_regression_minimum(d, s.cutoff);
          r.sample_seconds = detail::seconds_since(t0);
          r.has_interval = false;
          r.lower = r.upper = Vec::Constant(r.estimate.size(), kNaN);
          break;
        }
        RegressionMethod rm = RegressionMethod::Likelihood;
        if (s.method == Method::HuberMcmc) rm = RegressionMethod::Huber;
        if (s.method == Method::Disparity) {
          rm = s.formulation == Formulation::Homoscedastic ? RegressionMethod::Homoscedastic
               : s.formulation == Formulation::Marginal    ? RegressionMethod::Marginal
                                                           : RegressionMethod::Conditional;
        }
        RegressionOptions opt;
        opt.kind = s.kind;
        opt.estimator = s.estimator;
        opt.mc_samples = s.mc_samples;
        opt.gh_points = s.gh_points;
        opt.seed = aux_seed;
        if (s.method == Method::HuberMcmc) opt.huber_cutoff = s.cutoff;
        const auto cfg = detail::chain_for(s, rep, detail::regression_scales(d));
        r.setup_seconds = 0.0;
        t0 = Clock::now();
        const auto sum = fit_regression(d, rm, opt, cfg);
        r.sample_seconds = detail::seconds_since(t0);
        detail::take_summary(r, sum, detail::all_indices(sum.edap.size()));
        break;
      }
      case Family::RandomEffects: {
        const auto groups = simulate_groups(s, data_seed);
        HierarchicalSpec spec;
        spec.kind = s.kind;
        spec.observation_estimator = s.estimator;
        spec.gh_points = s.gh_points;
        spec.mc_samples = s.mc_samples;
        spec.seed = aux_seed;
        if (s.method == Method::Disparity) {
          if (s.formulation != Formulation::Latent) spec.observation = TermKind::Disparity;
          if (s.formulation != Formulation::Observation) spec.latent = TermKind::Disparity;
        }
        const RandomEffectsModel model(groups, spec);
        const auto problem = model.problem();
        r.setup_seconds = detail::seconds_since(t0);
        t0 = Clock::now();
        const auto fr = fit(problem, detail::chain_for(s, rep, model.proposal_scales()), s.level);
        r.sample_seconds = detail::seconds_since(t0);
        const auto m = static_cast<Eigen::Index>(model.groups());
        detail::take_summary(r, fr.summary, {m, m + 1, m + 2});
        break;
      }
    }
  } catch (const Error& e) {
    r.excluded = true;
    r.reason = std::string(to_string(e.code()));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Aggregation

struct TableRow {
  std::string scenario;
  std::string component;
  double truth = kNaN;
  double mean = kNaN;
  double bias = kNaN;
  double sd = kNaN;
  double coverage = kNaN;
  double interval_length = kNaN;
  double cpu_seconds = kNaN;    // mean sampling wall time per replication
  double setup_seconds = kNaN;  // mean precomputation wall time per replication
  std::size_t replications = 0;
  std::size_t excluded = 0;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<TableRow> rows;  // one per reported component
  std::vector<ReplicateResult> replicates;
  std::size_t excluded = 0;
  std::map<std::string, std::size_t> exclusion_reasons;
  double cpu_seconds = kNaN;
  double setup_seconds = kNaN;
};

/// Runs every replication (in parallel, `jobs` workers) and aggregates EDAP
/// bias, across-replication SD, interval coverage and length per component.
inline ScenarioResult run_scenario(const Scenario& s, std::size_t jobs = 1) {
  s.validate();
  ScenarioResult out;
  out.scenario = s;
  out.replicates.resize(s.replications);
  Eigen::MatrixXd cov;
  if (s.family == Family::LinearRegression) cov = regression_covariates(s.n, s.seed);
  parallel_for(s.replications, jobs, [&](std::size_t i) {
    out.replicates[i] = run_replicate(s, i, s.family == Family::LinearRegression ? &cov : nullptr);
  });

  const auto truth = truth_of(s.family);
  std::vector<const ReplicateResult*> ok;
  std::vector<double> cpu, setup;
  for (const auto& r : out.replicates) {
    if (r.excluded) {
      ++out.excluded;
      ++out.exclusion_reasons[r.reason];
      continue;
    }
    ok.push_back(&r);
    cpu.push_back(r.sample_seconds);
    setup.push_back(r.setup_seconds);
  }
  if (!ok.empty()) {
    out.cpu_seconds = mean(cpu);
    out.setup_seconds = mean(setup);
  }
  for (Eigen::Index j = 0; j < truth.value.size(); ++j) {
    TableRow row;
    row.scenario = s.name;
    row.component = truth.names[static_cast<std::size_t>(j)];
    row.truth = truth.value(j);
    row.replications = ok.size();
    row.excluded = out.excluded;
    row.cpu_seconds = out.cpu_seconds;
    row.setup_seconds = out.setup_seconds;
    if (!ok.empty()) {
      std::vector<double> est;
      double covered = 0.0, len = 0.0;
      bool intervals = true;
      for (const auto* r : ok) {
        est.push_back(r->estimate(j));
        intervals = intervals && r->has_interval;
        if (r->has_interval) {
          covered += (r->lower(j) <= row.truth && row.truth <= r->upper(j)) ? 1.0 : 0.0;
          len += r->upper(j) - r->lower(j);
        }
      }
      row.mean = mean(est);
      row.bias = row.mean - row.truth;
      row.sd = est.size() > 1 ? stddev(est) : 0.0;
      if (intervals) {
        row.coverage = covered / static_cast<double>(ok.size());
        row.interval_length = len / static_cast<double>(ok.size());
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables

/// Reference values for one (scenario, component) cell; NaN where absent.
struct Reference {
  double bias = kNaN, sd = kNaN, coverage = kNaN, length = kNaN;
};

/// Acceptance band on one statistic of a (scenario, component) row.
/// Statistics: bias, abs_bias, mean, sd, coverage, length, variance_ratio
/// (variance relative to the same component of `baseline`).
struct TableCheck {
  std::string scenario, component, statistic;
  double lo = -kInf, hi = kInf;
  std::string baseline;
};

struct TableEntry {
  Scenario scenario;
  std::map<std::string, Reference> references;  // by component
};

struct TableSpec {
  TableId id = TableId::NormalClean;
  std::vector<TableEntry> entries;
  std::vector<TableCheck> checks;

  /// Keeps only the scenarios that some check refers to.
  TableSpec checked_only() const {
    std::set<std::string> used;
    for (const auto& c : checks) {
      used.insert(c.scenario);
      if (!c.baseline.empty()) used.insert(c.baseline);
    }
    TableSpec t{id, {}, checks};
    for (const auto& e : entries)
      if (used.count(e.scenario.name)) t.entries.push_back(e);
    return t;
  }
};

namespace detail {

inline std::size_t scaled_reps(std::size_t base, double scale) {
  require(scale > 0.0 && scale <= 1.0, ErrorCode::InvalidParam, "scale must lie in (0, 1]");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(base) * scale)));
}

inline ChainConfig chain(std::size_t steps, std::size_t thin, std::vector<double> scales = {},
                         std::size_t pilot = 0) {
  ChainConfig c;
  c.steps = steps;
  c.thinning = thin;
  c.burn_in_fraction = 0.5;
  c.proposal_scales = std::move(scales);
  c.pilot_steps = pilot;
  return c;
}

struct NormalMethod {
  const char* name;
  Method method;
  DisparityKind kind;
  double cutoff;
};

inline const std::vector<NormalMethod>& normal_methods() {
  static const std::vector<NormalMethod> m = {
      {"likelihood", Method::Likelihood, DisparityKind::KullbackLeibler, 0.0},
      {"hellinger", Method::Disparity, DisparityKind::Hellinger, 0.0},
      {"negexp", Method::Disparity, DisparityKind::NegativeExponential, 0.0},
      {"tukey", Method::TukeyMcmc, DisparityKind::KullbackLeibler, kTukeyCutoff},
      {"huber80-mcmc", Method::HuberMcmc, DisparityKind::KullbackLeibler, kHuberCutoff80},
      {"huber99-mcmc", Method::HuberMcmc, DisparityKind::KullbackLeibler, kHuberCutoff99},
      {"huber80-min", Method::HuberMin, DisparityKind::KullbackLeibler, kHuberCutoff80},
      {"huber99-min", Method::HuberMin, DisparityKind::KullbackLeibler, kHuberCutoff99},
  };
  return m;
}

inline Scenario normal_scenario(const NormalMethod& m, std::string name, std::size_t reps,
                                std::uint64_t seed, Contamination cont = {}) {
  Scenario s;
  s.name = std::move(name);
  s.family = Family::NormalMean;
  s.method = m.method;
  s.kind = m.kind;
  s.cutoff = m.cutoff;
  s.n = 20;
  s.contamination = cont;
  s.chain = chain(10000, 2, {std::sqrt(0.5)});
  s.replications = reps;
  s.seed = seed;
  return s;
}

inline Reference ref(double bias, double sd, double coverage, double length = kNaN) {
  return {bias, sd, coverage, length};
}

/// Reference mean (sd) pairs are turned into bias against `truth`.
inline Reference ref_mean(double mean, double sd, double truth, double coverage = kNaN) {
  return {mean - truth, sd, coverage, kNaN};
}

}  // namespace detail

inline TableSpec table_spec(TableId id, double scale, std::uint64_t seed) {
  using namespace detail;
  TableSpec t;
  t.id = id;
  switch (id) {
    case TableId::NormalClean: {
      const std::size_t reps = scaled_reps(200, scale);
      const std::map<std::string, Reference> refs = {
          {"likelihood", ref(-0.015, 0.222, 0.956, 0.873)},
          {"hellinger", ref(-0.015, 0.225, 0.954, 0.920)},
          {"negexp", ref(-0.018, 0.229, 0.973, 1.022)},
          {"tukey", ref(-0.017, 0.228, 0.977, 1.007)},
          {"huber80-mcmc", ref(-0.017, 0.229, 0.973, 0.978)},
          {"huber99-mcmc", ref(-0.015, 0.223, 0.956, 0.877)},
          {"huber80-min", ref(-0.004, 0.229, 0.948, 0.894)},
          {"huber99-min", ref(-0.004, 0.223, 0.960, 0.894)},
      };
      for (const auto& m : normal_methods())
        t.entries.push_back({normal_scenario(m, m.name, reps, seed), {{"mu", refs.at(m.name)}}});
      t.checks = {
          {"likelihood", "mu", "bias", -0.065, 0.035, ""},
          {"likelihood", "mu", "coverage", 0.906, 1.006, ""},
          {"hellinger", "mu", "coverage", 0.894, 1.014, ""},
          {"negexp", "mu", "coverage", 0.913, 1.033, ""},
          {"hellinger", "mu", "variance_ratio", 0.85, 1.15, "likelihood"},
          {"negexp", "mu", "variance_ratio", 0.85, 1.15, "likelihood"},
      };
      break;
    }
    case TableId::NormalOutliers: {
      const std::size_t reps = scaled_reps(200, scale);
      // [method][location -3, -5, -10][count 1, 2, 5] = (bias, sd, coverage)
      const std::map<std::string, std::array<std::array<Reference, 3>, 3>> refs = {
          {"likelihood",
           {{{ref(-0.164, 0.219, 0.883), ref(-0.300, 0.206, 0.722), ref(-0.637, 0.182, 0.100)},
             {ref(-0.264, 0.219, 0.778), ref(-0.490, 0.206, 0.375), ref(-1.053, 0.182, 0.001)},
             {ref(-0.513, 0.219, 0.360), ref(-0.965, 0.207, 0.004), ref(-2.093, 0.182, 0.000)}}}},
          {"hellinger",
           {{{ref(-0.109, 0.246, 0.920), ref(-0.194, 0.275, 0.859), ref(-0.237, 0.299, 0.770)},
             {ref(-0.027, 0.238, 0.942), ref(-0.040, 0.257, 0.928), ref(-0.024, 0.305, 0.865)},
             {ref(-0.014, 0.234, 0.948), ref(-0.019, 0.249, 0.935), ref(0.018, 0.286, 0.883)}}}},
          {"negexp",
           {{{ref(-0.080, 0.256, 0.959), ref(-0.133, 0.279, 0.933), ref(-0.166, 0.308, 0.893)},
             {ref(-0.020, 0.238, 0.977), ref(-0.025, 0.243, 0.968), ref(-0.015, 0.264, 0.948)},
             {ref(-0.017, 0.237, 0.973), ref(-0.020, 0.241, 0.970), ref(-0.007, 0.260, 0.952)}}}},
          {"tukey",
           {{{ref(-0.091, 0.246, 0.954), ref(-0.175, 0.252, 0.915), ref(-0.443, 0.275, 0.645)},
             {ref(-0.018, 0.237, 0.974), ref(-0.019, 0.236, 0.972), ref(-0.022, 0.243, 0.967)},
             {ref(-0.017, 0.236, 0.977), ref(-0.018, 0.234, 0.971), ref(-0.018, 0.236, 0.969)}}}},
          {"huber80-mcmc",
           {{{ref(-0.102, 0.237, 0.948), ref(-0.188, 0.235, 0.904), ref(-0.450, 0.241, 0.584)},
             {ref(-0.101, 0.237, 0.950), ref(-0.188, 0.235, 0.907), ref(-0.451, 0.241, 0.582)},
             {ref(-0.101, 0.237, 0.946), ref(-0.188, 0.236, 0.907), ref(-0.450, 0.241, 0.574)}}}},
          {"huber99-mcmc",
           {{{ref(-0.149, 0.228, 0.894), ref(-0.282, 0.221, 0.757), ref(-0.635, 0.192, 0.153)},
             {ref(-0.151, 0.231, 0.893), ref(-0.290, 0.228, 0.754), ref(-0.704, 0.231, 0.147)},
             {ref(-0.151, 0.231, 0.887), ref(-0.290, 0.228, 0.760), ref(-0.704, 0.231, 0.148)}}}},
          {"huber80-min",
           {{{ref(-0.087, 0.238, 0.922), ref(-0.172, 0.236, 0.872), ref(-0.429, 0.242, 0.454)},
             {ref(-0.087, 0.238, 0.922), ref(-0.172, 0.236, 0.872), ref(-0.429, 0.242, 0.454)},
             {ref(-0.087, 0.238, 0.922), ref(-0.172, 0.236, 0.872), ref(-0.429, 0.242, 0.454)}}}},
          {"huber99-min",
           {{{ref(-0.140, 0.230, 0.898), ref(-0.275, 0.223, 0.753), ref(-0.633, 0.188, 0.115)},
             {ref(-0.140, 0.231, 0.897), ref(-0.279, 0.229, 0.751), ref(-0.693, 0.231, 0.115)},
             {ref(-0.140, 0.231, 0.897), ref(-0.279, 0.229, 0.751), ref(-0.693, 0.231, 0.115)}}}},
      };
      const double locs[3] = {-3.0, -5.0, -10.0};
      const std::size_t counts[3] = {1, 2, 5};
      for (const auto& m : normal_methods())
        for (int li = 0; li < 3; ++li)
          for (int ci = 0; ci < 3; ++ci) {
            const std::string name = std::string(m.name) + "/k" + std::to_string(counts[ci]) +
                                     "/loc" + std::to_string(static_cast<int>(locs[li]));
            t.entries.push_back({normal_scenario(m, name, reps, seed, {counts[ci], locs[li]}),
                                 {{"mu", refs.at(m.name)[li][ci]}}});
          }
      t.checks = {
          {"likelihood/k5/loc-10", "mu", "bias", -2.3, -1.9, ""},
          {"likelihood/k5/loc-10", "mu", "coverage", 0.0, 0.02, ""},
          {"hellinger/k5/loc-10", "mu", "abs_bias", 0.0, 0.10, ""},
          {"negexp/k5/loc-10", "mu", "abs_bias", 0.0, 0.06, ""},
          {"tukey/k5/loc-10", "mu", "abs_bias", 0.0, 0.06, ""},
          {"tukey/k5/loc-3", "mu", "bias", -0.55, -0.33, ""},
          {"hellinger/k5/loc-3", "mu", "bias", -0.35, -0.12, ""},
      };
      break;
    }
    case TableId::ExpGamma: {
      const std::size_t reps = scaled_reps(300, scale);
      struct M {
        const char* name;
        Method method;
        DisparityKind kind;
      };
      const M methods[] = {{"likelihood", Method::Likelihood, DisparityKind::KullbackLeibler},
                           {"hellinger", Method::Disparity, DisparityKind::Hellinger},
                           {"negexp", Method::Disparity, DisparityKind::NegativeExponential}};
      // Reference variances are converted to SDs.
      const std::map<std::string, std::array<Reference, 2>> clean = {
          {"likelihood", {ref(-0.088, std::sqrt(0.571), 0.9516), ref(0.004, std::sqrt(0.0005), 0.9562)}},
          {"hellinger", {ref(-0.081, std::sqrt(1.005), 0.850), ref(0.010, std::sqrt(0.0011), 0.839)}},
          {"negexp", {ref(-0.182, std::sqrt(0.739), 0.9436), ref(0.008, std::sqrt(0.0007), 0.9556)}},
      };
      const std::map<std::string, std::array<Reference, 2>> outlier = {
          {"likelihood", {ref(-3.068, std::sqrt(0.001), 0.0), ref(0.988, std::sqrt(0.00006), 0.0)}},
          {"hellinger", {ref(-0.013, std::sqrt(1.046), 0.8508), ref(0.010, std::sqrt(0.0011), 0.8440)}},
          {"negexp", {ref(-0.210, std::sqrt(0.725), 0.9496), ref(0.010, std::sqrt(0.0008), 0.9586)}},
      };
      for (int with_outlier = 0; with_outlier < 2; ++with_outlier)
        for (const auto& m : methods) {
          Scenario s;
          s.name = std::string(m.name) + (with_outlier ? "/outlier" : "/clean");
          s.family = Family::ExpGamma;
          s.method = m.method;
          s.kind = m.kind;
          s.estimator = Estimator::MonteCarlo;
          s.n = 20;
          if (with_outlier) s.contamination = {1, std::log(20.0)};
          s.chain = chain(10000, 2, {}, 1000);
          s.replications = reps;
          s.seed = seed;
          const auto& r = (with_outlier ? outlier : clean).at(m.name);
          t.entries.push_back({s, {{"shape", r[0]}, {"scale", r[1]}}});
        }
      t.checks = {
          {"likelihood/outlier", "shape", "bias", -kInf, -2.5, ""},
          {"likelihood/outlier", "shape", "coverage", 0.0, 0.02, ""},
          {"negexp/outlier", "shape", "bias", -0.35, -0.05, ""},
          {"negexp/outlier", "shape", "coverage", 0.90, 1.0, ""},
      };
      break;
    }
    case TableId::LinReg: {
      const std::size_t reps = scaled_reps(200, scale);
      struct M {
        const char* name;
        Method method;
        DisparityKind kind;
        Formulation form;
        std::array<double, 10> reference;  // sigma, beta0..3 as (mean, sd)
      };
      const M methods[] = {
          {"likelihood", Method::Likelihood, DisparityKind::KullbackLeibler, Formulation::Standard,
           {1.030, 0.137, 0.996, 0.186, 0.993, 0.194, 0.998, 0.217, 1.006, 0.301}},
          {"hellinger", Method::Disparity, DisparityKind::Hellinger, Formulation::Standard,
           {0.974, 0.154, 1.000, 0.213, 0.993, 0.204, 0.994, 0.239, 0.980, 0.301}},
          {"negexp", Method::Disparity, DisparityKind::NegativeExponential, Formulation::Standard,
           {0.926, 0.136, 0.997, 0.201, 0.994, 0.206, 1.001, 0.224, 0.964, 0.294}},
          {"hellinger-hom", Method::Disparity, DisparityKind::Hellinger, Formulation::Homoscedastic,
           {0.881, 0.181, 0.995, 0.338, 0.987, 0.198, 0.995, 0.217, 0.980, 0.296}},
          {"negexp-hom", Method::Disparity, DisparityKind::NegativeExponential,
           Formulation::Homoscedastic,
           {0.829, 0.157, 0.993, 0.235, 0.988, 0.211, 0.996, 0.228, 0.974, 0.313}},
          {"hellinger-marg", Method::Disparity, DisparityKind::Hellinger, Formulation::Marginal,
           {1.062, 0.133, 0.997, 0.193, 0.994, 0.203, 0.997, 0.225, 1.003, 0.309}},
          {"negexp-marg", Method::Disparity, DisparityKind::NegativeExponential, Formulation::Marginal,
           {1.087, 0.137, 1.000, 0.199, 0.994, 0.210, 0.998, 0.232, 1.005, 0.321}},
          {"huber-mcmc", Method::HuberMcmc, DisparityKind::KullbackLeibler, Formulation::Standard,
           {0.878, 0.123, 0.998, 0.192, 0.994, 0.198, 1.000, 0.221, 1.005, 0.306}},
          {"huber-min", Method::HuberMin, DisparityKind::KullbackLeibler, Formulation::Standard,
           {0.919, 0.207, 0.999, 0.191, 0.995, 0.198, 1.000, 0.222, 1.006, 0.307}},
      };
      for (const auto& m : methods) {
        Scenario s;
        s.name = m.name;
        s.family = Family::LinearRegression;
        s.method = m.method;
        s.kind = m.kind;
        s.formulation = m.form;
        s.cutoff = m.method == Method::HuberMcmc || m.method == Method::HuberMin ? kHuberCutoff80 : 0.0;
        s.n = 30;
        s.mc_samples = 200;
        s.chain = chain(10000, 5);
        s.replications = reps;
        s.seed = seed;
        const auto& p = m.reference;
        t.entries.push_back({s,
                             {{"sigma", ref_mean(p[0], p[1], kRegressionSigma)},
                              {"beta0", ref_mean(p[2], p[3], kRegressionCoef)},
                              {"beta1", ref_mean(p[4], p[5], kRegressionCoef)},
                              {"beta2", ref_mean(p[6], p[7], kRegressionCoef)},
                              {"beta3", ref_mean(p[8], p[9], kRegressionCoef)}}});
      }
      break;
    }
    case TableId::RandEffects: {
      const std::size_t reps = scaled_reps(200, scale);
      struct M {
        const char* name;
        Method method;
        Formulation form;
        // mu, sigma, tau as (mean, sd, coverage), clean then outlier
        std::array<double, 9> clean, outlier;
      };
      // The robust reference row (latent-term disparity) carries the label
      // "obs" in its source; rows are keyed here by construction.
      const M methods[] = {
          {"likelihood", Method::Likelihood, Formulation::Standard,
           {0.0013, 0.286, 0.947, 0.200, 0.0230, 0.940, 0.979, 0.234, 0.919},
           {0.365, 0.197, 1.000, 0.200, 0.0222, 0.930, 10.11, 0.163, 0.000}},
          {"hd-latent", Method::Disparity, Formulation::Latent,
           {0.0035, 0.285, 0.937, 0.200, 0.0231, 0.939, 1.070, 0.342, 0.900},
           {0.002, 0.288, 0.926, 0.200, 0.0223, 0.922, 1.088, 0.389, 0.887}},
          {"hd-observation", Method::Disparity, Formulation::Observation,
           {0.0021, 0.286, 0.936, 0.191, 0.0259, 0.686, 0.982, 0.231, 0.928},
           {0.353, 0.252, 1.000, 0.191, 0.0249, 0.684, 10.13, 0.196, 0.000}},
          {"hd-both", Method::Disparity, Formulation::Both,
           {0.0024, 0.291, 0.933, 0.191, 0.0258, 0.692, 1.068, 0.342, 0.899},
           {0.002, 0.295, 0.917, 0.191, 0.0249, 0.674, 1.066, 0.325, 0.885}},
      };
      const auto truth = truth_of(Family::RandomEffects).value;
      for (int with_outlier = 0; with_outlier < 2; ++with_outlier)
        for (const auto& m : methods) {
          Scenario s;
          s.name = std::string(m.name) + (with_outlier ? "/outlier" : "/clean");
          s.family = Family::RandomEffects;
          s.method = m.method;
          s.kind = DisparityKind::Hellinger;
          s.formulation = m.form;
          s.n = 10;
          if (with_outlier) s.contamination = {1, 40.0};
          s.mc_samples = 200;
          s.chain = chain(10000, 5, {}, 2000);
          s.replications = reps;
          s.seed = seed;
          const auto& p = with_outlier ? m.outlier : m.clean;
          t.entries.push_back({s,
                               {{"mu", ref_mean(p[0], p[1], truth(0), p[2])},
                                {"sigma", ref_mean(p[3], p[4], truth(1), p[5])},
                                {"tau", ref_mean(p[6], p[7], truth(2), p[8])}}});
        }
      t.checks = {
          {"hd-latent/outlier", "mu", "abs_bias", 0.0, 0.05, ""},
          {"likelihood/outlier", "mu", "bias", 0.30, 0.43, ""},
          {"likelihood/outlier", "tau", "mean", 5.0, kInf, ""},
      };
      break;
    }
  }
  return t;
}

struct CheckOutcome {
  TableCheck check;
  double observed = kNaN;
  bool pass = false;
};

struct TableResult {
  TableSpec spec;
  std::vector<ScenarioResult> results;
  std::vector<CheckOutcome> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
  const TableRow& row(const std::string& scenario, const std::string& component) const {
    for (const auto& r : results)
      if (r.scenario.name == scenario)
        for (const auto& row : r.rows)
          if (row.component == component) return row;
    throw Error(ErrorCode::InvalidParam, "no row " + scenario + "/" + component);
  }
};

inline double check_statistic(const TableResult& t, const TableCheck& c) {
  const auto& r = t.row(c.scenario, c.component);
  if (c.statistic == "bias") return r.bias;
  if (c.statistic == "abs_bias") return std::abs(r.bias);
  if (c.statistic == "mean") return r.mean;
  if (c.statistic == "sd") return r.sd;
  if (c.statistic == "coverage") return r.coverage;
  if (c.statistic == "length") return r.interval_length;
  if (c.statistic == "variance_ratio") {
    const auto& b = t.row(c.baseline, c.component);
    return (r.sd * r.sd) / (b.sd * b.sd);
  }
  throw Error(ErrorCode::InvalidParam, "unknown check statistic '" + c.statistic + "'");
}

inline void evaluate_checks(TableResult& t) {
  t.checks.clear();
  for (const auto& c : t.spec.checks) {
    CheckOutcome o{c, check_statistic(t, c), false};
    o.pass = std::isfinite(o.observed) && c.lo <= o.observed && o.observed <= c.hi;
    t.checks.push_back(o);
  }
}

inline TableResult run_table(const TableSpec& spec, std::size_t jobs = 1) {
  TableResult t;
  t.spec = spec;
  for (const auto& e : spec.entries) t.results.push_back(run_scenario(e.scenario, jobs));
  evaluate_checks(t);
  return t;
}

/// Deterministic table: statistics beside the reference values. Timing is
/// kept out so reruns are byte-identical.
inline CsvWriter table_csv(const TableResult& t) {
  CsvWriter w({"scenario", "component", "truth", "replications", "excluded", "mean", "bias", "sd",
               "coverage", "interval_length", "ref_bias", "ref_sd", "ref_coverage", "ref_length"});
  const auto num = [](double v) { return std::isnan(v) ? std::string() : format_number(v); };
  for (std::size_t i = 0; i < t.results.size(); ++i) {
    const auto& refs = t.spec.entries[i].references;
    for (const auto& r : t.results[i].rows) {
      const auto it = refs.find(r.component);
      const Reference ref = it == refs.end() ? Reference{} : it->second;
      w.row({r.scenario, r.component, num(r.truth), std::to_string(r.replications),
             std::to_string(r.excluded), num(r.mean), num(r.bias), num(r.sd), num(r.coverage),
             num(r.interval_length), num(ref.bias), num(ref.sd), num(ref.coverage),
             num(ref.length)});
    }
  }
  return w;
}

/// One line per acceptance band.
inline CsvWriter check_csv(const TableResult& t) {
  CsvWriter w({"scenario", "component", "statistic", "baseline", "observed", "lower", "upper", "pass"});
  for (const auto& c : t.checks)
    w.row({c.check.scenario, c.check.component, c.check.statistic, c.check.baseline,
           format_number(c.observed), format_number(c.check.lo), format_number(c.check.hi),
           c.pass ? "1" : "0"});
  return w;
}

/// Observed minus reference for every statistic that has a reference value.
inline CsvWriter reference_diff_csv(const TableResult& t) {
  CsvWriter w({"scenario", "component", "statistic", "observed", "reference", "difference"});
  for (std::size_t i = 0; i < t.results.size(); ++i) {
    const auto& refs = t.spec.entries[i].references;
    for (const auto& r : t.results[i].rows) {
      const auto it = refs.find(r.component);
      if (it == refs.end()) continue;
      const std::pair<const char*, std::pair<double, double>> stats[] = {
          {"bias", {r.bias, it->second.bias}},
          {"sd", {r.sd, it->second.sd}},
          {"coverage", {r.coverage, it->second.coverage}},
          {"length", {r.interval_length, it->second.length}}};
      for (const auto& [name, v] : stats) {
        if (std::isnan(v.second) || std::isnan(v.first)) continue;
        w.row({r.scenario, r.component, name, format_number(v.first), format_number(v.second),
               format_number(v.first - v.second)});
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Cost benchmark

struct BenchEntry {
  std::string method;
  double seconds = 0.0;        // wall time of one chain
  double ratio = 0.0;          // seconds / likelihood seconds
};

/// Times one normal-mean chain per method on a shared N(5, 1) sample.
/// Relative costs are the quantity of interest; absolute times are machine-bound.
inline std::vector<BenchEntry> run_bench(std::uint64_t seed, std::size_t n = 20,
                                         std::size_t steps = 10000, std::size_t repeats = 3) {
  require(n >= 2 && steps >= 4 && repeats >= 1, ErrorCode::InvalidParam, "bad bench settings");
  Scenario base;
  base.n = n;
  const auto x = simulate_normal(base, derive_seed(seed, 0, 0));
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
  const KernelDensity kde(x, select_bandwidth(x, BandwidthSelector::SheatherJones));
  Rng rng(derive_seed(seed, 0, 2));
  const auto hd_mc = std::make_shared<const MonteCarloDisparity>(
      MonteCarloDisparity::from_kde(GFunction(DisparityKind::Hellinger), kde, 1000, rng));
  const std::vector<std::pair<std::string, DisparityFn>> methods = {
      {"likelihood", empirical_kl(model, x)},
      {"hellinger-mc", mc_disparity(model, hd_mc)},
      {"hellinger-gh", gh_disparity(model, GaussHermiteDisparity(GFunction(DisparityKind::Hellinger), 80), kde)},
      {"negexp-gh", gh_disparity(model, GaussHermiteDisparity(GFunction(DisparityKind::NegativeExponential), 80), kde)},
      {"tukey", robust_loss_disparity(model, x, RobustLoss::Tukey, kTukeyCutoff)},
      {"huber80", robust_loss_disparity(model, x, RobustLoss::Huber, kHuberCutoff80)},
  };
  std::vector<BenchEntry> out;
  for (const auto& [name, d] : methods) {
    const DPosterior<NormalMean> post(model, prior, static_cast<double>(n), d);
    ChainConfig c;
    c.steps = steps;
    c.proposal_scales = {std::sqrt(0.5)};
    c.seed = derive_seed(seed, 1);
    double best = kInf;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = detail::Clock::now();
      (void)fit(post.problem(Vec{{median(x)}}), c);
      best = std::min(best, detail::seconds_since(t0));
    }
    out.push_back({name, best, 0.0});
  }
  for (auto& e : out) e.ratio = e.seconds / out.front().seconds;
  return out;
}

}  // namespace dpost
