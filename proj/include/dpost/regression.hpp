#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpost/disparity.hpp"
#include "dpost/error.hpp"
#include "dpost/kde.hpp"
#include "dpost/models.hpp"
#include "dpost/optimize.hpp"
#include "dpost/posterior.hpp"
#include "dpost/rng.hpp"
#include "dpost/sampler.hpp"
#include "dpost/stats.hpp"

namespace dpost {

/// y_i = beta_0 + beta^T x_i + sigma eps_i; `covariates` has no intercept column.
struct RegressionData {
  Vec y;
  Eigen::MatrixXd covariates;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t p() const { return static_cast<std::size_t>(covariates.cols()); }
  Eigen::MatrixXd design() const {
    Eigen::MatrixXd d(covariates.rows(), covariates.cols() + 1);
    d.col(0).setOnes();
    d.rightCols(covariates.cols()) = covariates;
    return d;
  }
  void validate() const {
    require(y.size() == covariates.rows(), ErrorCode::InvalidParam,
            "response and covariate row counts differ");
    require(y.size() > covariates.cols() + 1, ErrorCode::InsufficientData,
            "regression needs more observations than coefficients");
  }
};

struct OlsFit {
  Vec beta;        // intercept first
  Vec residuals;
  double sigma = 0.0;  // sqrt(RSS / (n - p - 1))
};

inline OlsFit ols(const RegressionData& d) {
  d.validate();
  const Eigen::MatrixXd x = d.design();
  OlsFit f;
  f.beta = x.colPivHouseholderQr().solve(d.y);
  f.residuals = d.y - x * f.beta;
  f.sigma = std::sqrt(f.residuals.squaredNorm() / static_cast<double>(x.rows() - x.cols()));
  return f;
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// beta_j ~ N(0, beta_variance) independently; sigma^2 ~ InverseGamma(shape, scale).
/// Evaluated on theta = (beta, sigma), so the density carries the d sigma^2 / d sigma factor.
struct RegressionPrior {
  double beta_variance = 100.0;
  double sigma2_shape = 2.0;
  double sigma2_scale = 1.0;

  double log_beta(const Vec& beta) const {
    const auto nb = UnivariatePrior::normal(0.0, beta_variance);
    double s = 0.0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) s += nb.log_density(beta(i));
    return s;
  }
  double log_sigma(double sigma) const {
    if (!(sigma > 0.0)) return -kInf;
    const auto ig = UnivariatePrior::inverse_gamma(sigma2_shape, sigma2_scale);
    return ig.log_density(sigma * sigma) + std::log(2.0 * sigma);
  }
  double log_density(const Vec& th) const {
    return log_beta(th.head(th.size() - 1)) + log_sigma(th(th.size() - 1));
  }
};

enum class RegressionMethod { Likelihood, Conditional, Homoscedastic, Marginal, Huber };

inline std::string_view to_string(RegressionMethod m) {
  switch (m) {
    case RegressionMethod::Likelihood: return "likelihood";
    case RegressionMethod::Conditional: return "conditional";
    case RegressionMethod::Homoscedastic: return "homoscedastic";
    case RegressionMethod::Marginal: return "marginal";
    case RegressionMethod::Huber: return "huber";
  }
  return "?";
}

enum class Estimator { Auto, MonteCarlo, GaussHermite };

/// Auto: Monte Carlo for Hellinger, Gauss-Hermite otherwise.
inline Estimator resolve_estimator(Estimator e, DisparityKind k) {
  if (e != Estimator::Auto) return e;
  return k == DisparityKind::Hellinger ? Estimator::MonteCarlo : Estimator::GaussHermite;
}

inline std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Auto: return "auto";
    case Estimator::MonteCarlo: return "mc";
    case Estimator::GaussHermite: return "gh";
  }
  return "?";
}

inline Estimator parse_estimator_name(std::string_view s) {
  if (s == "auto") return Estimator::Auto;
  if (s == "mc") return Estimator::MonteCarlo;
  if (s == "gh") return Estimator::GaussHermite;
  throw Error(ErrorCode::ParseError, "unknown estimator '" + std::string(s) + "'");
}

struct RegressionOptions {
  DisparityKind kind = DisparityKind::Hellinger;
  Estimator estimator = Estimator::Auto;
  BandwidthSelector selector = BandwidthSelector::SheatherJones;
  std::size_t mc_samples = 200;   // per covariate point (conditional) or in total
  int gh_points = 80;
  std::uint64_t seed = 0;         // Monte Carlo draws from the density estimates
  double huber_cutoff = 0.8416212335729143;  // standard normal 0.8 quantile
};

/// Loss replacing the negative log-likelihood, as a function of theta = (beta, sigma).
using RegressionLoss = std::function<double(const Vec&)>;

namespace detail {

inline Vec linear_predictor(const Eigen::MatrixXd& design, const Vec& th) {
  return design * th.head(design.cols());
}

/// theta = (beta, sigma) with u = (beta, log sigma).
inline SamplingProblem regression_sampling_problem(RegressionLoss loss, RegressionPrior prior,
                                                   Vec init_theta, std::size_t p) {
  const auto last = static_cast<Eigen::Index>(p + 1);
  auto to_c = [last](const Vec& u) {
    Vec th = u;
    th(last) = std::exp(u(last));
    return th;
  };
  auto logj = [last](const Vec& u) { return u(last); };
  Vec init = init_theta;
  init(last) = std::log(init_theta(last));
  std::vector<std::string> names{"beta0"};
  for (std::size_t j = 1; j <= p; ++j) names.push_back("beta" + std::to_string(j));
  names.push_back("sigma");
  return {[loss = std::move(loss), prior, to_c, logj](const Vec& u) {
            const Vec th = to_c(u);
            if (!(th(th.size() - 1) > 0.0) || !std::isfinite(th(th.size() - 1))) return -kInf;
            const double lp = prior.log_density(th);
            if (lp == -kInf) return -kInf;
            const double l = loss(th);
            if (!std::isfinite(l)) return -kInf;
            return -l + lp + logj(u);
          },
          to_c, logj, init, names};
}

}  // namespace detail

inline RegressionLoss gaussian_regression_loss(const RegressionData& d) {
  const Eigen::MatrixXd x = d.design();
  return [x, y = d.y](const Vec& th) {
    const double sigma = th(th.size() - 1);
    const Vec mu = detail::linear_predictor(x, th);
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s -= normal_logpdf(y(i), mu(i), sigma);
    return s;
  };
}

/// sum rho_c((y_i - eta_i)/sigma) + n log sigma.
inline RegressionLoss huber_regression_loss(const RegressionData& d, double cutoff) {
  require(cutoff > 0.0, ErrorCode::InvalidParam, "Huber cutoff must be positive");
  const Eigen::MatrixXd x = d.design();
  return [x, y = d.y, cutoff](const Vec& th) {
    const double sigma = th(th.size() - 1);
    if (!(sigma > 0.0)) return kInf;
    const Vec mu = detail::linear_predictor(x, th);
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      s += robust_rho(RobustLoss::Huber, cutoff, (y(i) - mu(i)) / sigma);
    return s + static_cast<double>(y.size()) * std::log(sigma);
  };
}

/// Sum over i of D(g(.|X_i), phi_{eta_i, sigma}) with the Nadaraya-Watson conditional
/// estimator. The response bandwidth comes from the least-squares residuals, the
/// covariate bandwidth from the covariate norms.
class ConditionalRegressionDisparity {
 public:
  ConditionalRegressionDisparity(const RegressionData& d, const RegressionOptions& opt)
      : design_(d.design()),
        gfun_(opt.kind),
        estimator_(resolve_estimator(opt.estimator, opt.kind)),
        gh_(gfun_, opt.gh_points) {
    const auto fit = ols(d);
    const double c1 = select_bandwidth(to_std(fit.residuals), opt.selector);
    const double c2 = conditional_bandwidths(to_std(d.y), d.covariates, opt.selector).second;
    const ConditionalKernelDensity ckd(to_std(d.y), d.covariates, c1, c2);
    Rng rng(opt.seed);
    for (Eigen::Index i = 0; i < d.covariates.rows(); ++i) {
      densities_.push_back(ckd.at(d.covariates.row(i).transpose()));
      if (estimator_ == Estimator::MonteCarlo)
        mc_.push_back(MonteCarloDisparity::from_kde(gfun_, densities_.back(), opt.mc_samples, rng));
    }
    bandwidths_ = {c1, c2};
  }

  std::pair<double, double> bandwidths() const { return bandwidths_; }
  const std::vector<KernelDensity>& densities() const { return densities_; }

  double operator()(const Vec& th) const {
    const double sigma = th(th.size() - 1);
    if (!(sigma > 0.0)) return kInf;
    const Vec mu = detail::linear_predictor(design_, th);
    double s = 0.0;
    for (std::size_t i = 0; i < densities_.size(); ++i) {
      const double m = mu(static_cast<Eigen::Index>(i));
      if (estimator_ == Estimator::MonteCarlo)
        s += mc_[i]([&](double x) { return normal_logpdf(x, m, sigma); });
      else
        s += gh_(densities_[i], m, sigma);
    }
    return s;
  }

 private:
  Eigen::MatrixXd design_;
  GFunction gfun_;
  Estimator estimator_;
  GaussHermiteDisparity gh_;
  std::vector<KernelDensity> densities_;
  std::vector<MonteCarloDisparity> mc_;
  std::pair<double, double> bandwidths_;
};

/// Nadaraya-Watson mean m(X_i) at every design point.
inline Vec nadaraya_watson_fitted(const RegressionData& d, double bandwidth_x) {
  require(bandwidth_x > 0.0, ErrorCode::InvalidParam, "bandwidth must be positive");
  const auto n = d.covariates.rows();
  Vec m(n);
  std::vector<double> logk(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = (d.covariates.row(i) - d.covariates.row(j)).norm() / bandwidth_x;
      logk[static_cast<std::size_t>(j)] = -0.5 * u * u;
    }
    const double lse = log_sum_exp(logk);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += std::exp(logk[static_cast<std::size_t>(j)] - lse) * d.y(j);
    m(i) = s;
  }
  return m;
}

/// Conditional-homoscedastic form: a single KDE g of r_i = y_i - m(X_i) and
///   sum_i D(g, phi_{eta_i - m(X_i), sigma}).
class HomoscedasticRegressionDisparity {
 public:
  HomoscedasticRegressionDisparity(const RegressionData& d, const RegressionOptions& opt)
      : design_(d.design()),
        gfun_(opt.kind),
        estimator_(resolve_estimator(opt.estimator, opt.kind)),
        gh_(gfun_, opt.gh_points),
        density_({0.0}, 1.0) {
    const double c2 = conditional_bandwidths(to_std(d.y), d.covariates, opt.selector).second;
    fitted_ = nadaraya_watson_fitted(d, c2);
    const Vec r = d.y - fitted_;
    density_ = KernelDensity(to_std(r), select_bandwidth(to_std(r), opt.selector));
    if (estimator_ == Estimator::MonteCarlo) {
      Rng rng(opt.seed);
      mc_ = std::make_shared<const MonteCarloDisparity>(
          MonteCarloDisparity::from_kde(gfun_, density_, opt.mc_samples, rng));
    }
  }

  const Vec& fitted() const { return fitted_; }
  const KernelDensity& residual_density() const { return density_; }

  double operator()(const Vec& th) const {
    const double sigma = th(th.size() - 1);
    if (!(sigma > 0.0)) return kInf;
    const Vec shift = detail::linear_predictor(design_, th) - fitted_;
    double s = 0.0;
    for (Eigen::Index i = 0; i < shift.size(); ++i) {
      const double m = shift(i);
      if (estimator_ == Estimator::MonteCarlo)
        s += (*mc_)([&](double x) { return normal_logpdf(x, m, sigma); });
      else
        s += gh_(density_, m, sigma);
    }
    return s;
  }

 private:
  Eigen::MatrixXd design_;
  GFunction gfun_;
  Estimator estimator_;
  GaussHermiteDisparity gh_;
  Vec fitted_;
  KernelDensity density_;
  std::shared_ptr<const MonteCarloDisparity> mc_;
};

/// Marginal form with external scale s: n D(phi_{0,1}, g_m(.; beta, s)) where g_m is
/// the KDE of standardized residuals e_i(beta)/s. Always Gauss-Hermite: g_m moves
/// with beta, so frozen draws from it are unavailable.
class MarginalRegressionDisparity {
 public:
  MarginalRegressionDisparity(const RegressionData& d, const RegressionOptions& opt)
      : design_(d.design()), y_(d.y), gh_(GFunction(opt.kind), opt.gh_points) {
    const auto fit = ols(d);
    scale_ = mad_sigma(to_std(fit.residuals));
    require(scale_ > 0.0, ErrorCode::DegenerateData, "residual MAD is zero");
    bandwidth_ = select_bandwidth(to_std(fit.residuals / scale_), opt.selector);
  }

  double plugin_scale() const { return scale_; }
  double bandwidth() const { return bandwidth_; }

  KernelDensity residual_density(const Vec& beta, double scale) const {
    return KernelDensity(to_std((y_ - design_ * beta) / scale), bandwidth_);
  }

  /// beta only; sigma is held at the plug-in scale.
  double operator()(const Vec& beta) const {
    const auto g = residual_density(beta, scale_);
    return static_cast<double>(y_.size()) * gh_.reversed(g, 0.0, 1.0);
  }

  /// Second step: n D(g_m(.; beta_hat, sigma), phi_{0,1}).
  double sigma_loss(const Vec& beta_hat, double sigma) const {
    if (!(sigma > 0.0)) return kInf;
    const auto g = residual_density(beta_hat, sigma);
    return static_cast<double>(y_.size()) * gh_(g, 0.0, 1.0);
  }

 private:
  Eigen::MatrixXd design_;
  Vec y_;
  GaussHermiteDisparity gh_;
  double scale_ = 1.0;
  double bandwidth_ = 1.0;
};

/// Sampling problem for every method except the marginal one (see marginal_beta_problem).
inline SamplingProblem regression_problem(const RegressionData& d, RegressionMethod method,
                                          const RegressionOptions& opt,
                                          const RegressionPrior& prior = {}) {
  d.validate();
  const auto fit = ols(d);
  Vec init(fit.beta.size() + 1);
  init << fit.beta, fit.sigma;
  RegressionLoss loss;
  switch (method) {
    case RegressionMethod::Likelihood: loss = gaussian_regression_loss(d); break;
    case RegressionMethod::Huber: loss = huber_regression_loss(d, opt.huber_cutoff); break;
    case RegressionMethod::Conditional:
      loss = [c = std::make_shared<const ConditionalRegressionDisparity>(d, opt)](const Vec& th) {
        return (*c)(th);
      };
      break;
    case RegressionMethod::Homoscedastic:
      loss = [c = std::make_shared<const HomoscedasticRegressionDisparity>(d, opt)](const Vec& th) {
        return (*c)(th);
      };
      break;
    case RegressionMethod::Marginal:
      throw Error(ErrorCode::InvalidParam, "marginal regression is a two-step procedure");
  }
  return detail::regression_sampling_problem(std::move(loss), prior, init, d.p());
}

/// Step one of the marginal procedure: beta with sigma fixed at the MAD plug-in.
inline SamplingProblem marginal_beta_problem(std::shared_ptr<const MarginalRegressionDisparity> m,
                                             const RegressionData& d,
                                             const RegressionPrior& prior = {}) {
  const auto fit = ols(d);
  std::vector<std::string> names{"beta0"};
  for (std::size_t j = 1; j <= d.p(); ++j) names.push_back("beta" + std::to_string(j));
  auto ident = [](const Vec& u) { return u; };
  return {[m = std::move(m), prior](const Vec& b) {
            const double l = (*m)(b);
            if (!std::isfinite(l)) return -kInf;
            return -l + prior.log_beta(b);
          },
          ident, [](const Vec&) { return 0.0; }, fit.beta, names};
}

/// Step two: sigma alone, u = log sigma, given the step-one EDAP.
inline SamplingProblem two_step_sigma_problem(std::shared_ptr<const MarginalRegressionDisparity> m,
                                              const RegressionData& d, Vec beta_hat,
                                              const RegressionPrior& prior = {}) {
  require(d.n() > 2, ErrorCode::InsufficientData, "two-step sigma needs n > 2");
  Vec init(1);
  init(0) = std::log(m->plugin_scale());
  return {[m = std::move(m), beta_hat = std::move(beta_hat), prior](const Vec& u) {
            const double sigma = std::exp(u(0));
            const double lp = prior.log_sigma(sigma);
            if (lp == -kInf) return -kInf;
            const double l = m->sigma_loss(beta_hat, sigma);
            if (!std::isfinite(l)) return -kInf;
            return -l + lp + u(0);
          },
          [](const Vec& u) { return Vec(u.array().exp()); }, [](const Vec& u) { return u(0); },
          init, {"sigma"}};
}

/// Joins the beta summary of step one with the sigma summary of step two.
inline PosteriorSummary join_summaries(const PosteriorSummary& a, const PosteriorSummary& b) {
  const auto cat = [](const Vec& x, const Vec& y) {
    Vec v(x.size() + y.size());
    v << x, y;
    return v;
  };
  PosteriorSummary s = a;
  s.edap = cat(a.edap, b.edap);
  s.mdap = cat(a.mdap, b.mdap);
  s.sd = cat(a.sd, b.sd);
  s.lower = cat(a.lower, b.lower);
  s.upper = cat(a.upper, b.upper);
  s.mc_se = cat(a.mc_se, b.mc_se);
  s.acceptance_rate = 0.5 * (a.acceptance_rate + b.acceptance_rate);
  s.stuck = a.stuck || b.stuck;
  const std::size_t k = std::min(a.draws.size(), b.draws.size());
  s.draws.resize(k);
  s.kept.resize(k);
  for (std::size_t i = 0; i < k; ++i) s.draws[i] = cat(a.draws[i], b.draws[i]);
  return s;
}

/// Fits any regression method; the marginal one runs both steps with the same chain settings
/// (the second step uses a seed derived from cfg.seed).
inline PosteriorSummary fit_regression(const RegressionData& d, RegressionMethod method,
                                       const RegressionOptions& opt, const ChainConfig& cfg,
                                       const RegressionPrior& prior = {}) {
  if (method != RegressionMethod::Marginal)
    return fit(regression_problem(d, method, opt, prior), cfg).summary;
  auto m = std::make_shared<const MarginalRegressionDisparity>(d, opt);
  ChainConfig c1 = cfg;
  if (c1.proposal_scales.size() > 1) c1.proposal_scales.resize(d.p() + 1);
  const auto step1 = fit(marginal_beta_problem(m, d, prior), c1).summary;
  ChainConfig c2 = cfg;
  c2.seed = derive_seed(cfg.seed, 2);
  c2.proposal_scales = {cfg.proposal_scales.back()};
  const auto step2 = fit(two_step_sigma_problem(m, d, step1.edap, prior), c2).summary;
  return join_summaries(step1, step2);
}

/// Huber M-estimate minimizing sum rho_c(e_i/sigma) + n log sigma over (beta, log sigma).
inline Vec huber_regression_minimum(const RegressionData& d, double cutoff) {
  const auto loss = huber_regression_loss(d, cutoff);
  const auto fit = ols(d);
  Vec u0(fit.beta.size() + 1);
  u0 << fit.beta, std::log(fit.sigma);
  const auto res = nelder_mead(
      [&](const Vec& u) {
        Vec th = u;
        th(th.size() - 1) = std::exp(u(u.size() - 1));
        return loss(th);
      },
      u0);
  Vec th = res.x;
  th(th.size() - 1) = std::exp(th(th.size() - 1));
  return th;
}

}  // namespace dpost
