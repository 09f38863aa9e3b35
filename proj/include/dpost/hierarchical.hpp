#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpost/disparity.hpp"
#include "dpost/error.hpp"
#include "dpost/kde.hpp"
#include "dpost/models.hpp"
#include "dpost/posterior.hpp"
#include "dpost/regression.hpp"
#include "dpost/rng.hpp"
#include "dpost/stats.hpp"

namespace dpost {

enum class TermKind { Likelihood, Disparity };

/// Which factors of a complete-data likelihood are replaced by disparities.
struct HierarchicalSpec {
  TermKind observation = TermKind::Likelihood;  // conditional disparity per latent unit
  TermKind latent = TermKind::Likelihood;       // disparity against the pooled latent KDE
  DisparityKind kind = DisparityKind::Hellinger;
  Estimator observation_estimator = Estimator::Auto;
  int gh_points = 80;
  std::size_t mc_samples = 200;
  std::uint64_t seed = 0;  // frozen Monte Carlo draws
  BandwidthSelector selector = BandwidthSelector::SheatherJones;
};

namespace detail {

/// log pi(s) for a scale s whose square has prior `p`.
inline double log_prior_on_scale(const UnivariatePrior& p, double s) {
  if (!(s > 0.0)) return -kInf;
  return p.log_density(s * s) + std::log(2.0 * s);
}

inline SamplingProblem make_problem(std::function<double(const Vec&)> log_density,
                                    std::function<Vec(const Vec&)> to_c,
                                    std::function<double(const Vec&)> logj, Vec init,
                                    std::vector<std::string> names) {
  auto lt = [log_density, to_c, logj](const Vec& u) {
    const Vec th = to_c(u);
    for (Eigen::Index i = 0; i < th.size(); ++i)
      if (!std::isfinite(th(i))) return -kInf;
    const double v = log_density(th);
    if (!(v > -kInf) || std::isnan(v)) return -kInf;
    return v + logj(u);
  };
  return {lt, std::move(to_c), std::move(logj), std::move(init), std::move(names)};
}

/// u -> theta with exp() applied to the trailing `k` coordinates.
inline std::function<Vec(const Vec&)> exp_tail(Eigen::Index k) {
  return [k](const Vec& u) {
    Vec th = u;
    th.tail(k) = u.tail(k).array().exp();
    return th;
  };
}

inline std::function<double(const Vec&)> exp_tail_jacobian(Eigen::Index k) {
  return [k](const Vec& u) { return u.tail(k).sum(); };
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-way random effects: Y_ij = Z_i + eps_ij, eps ~ N(0, sigma^2), Z_i ~ N(mu, tau^2).

struct RandomEffectsPrior {
  UnivariatePrior mu = UnivariatePrior::normal(0.0, 1.0);
  UnivariatePrior sigma2 = UnivariatePrior::inverse_gamma(2.0, 0.1);
  UnivariatePrior tau2 = UnivariatePrior::inverse_gamma(2.0, 1.0);
};

/// theta = (Z_1..Z_m, mu, sigma, tau); u = (Z, mu, log sigma, log tau).
class RandomEffectsModel {
 public:
  RandomEffectsModel(std::vector<std::vector<double>> groups, HierarchicalSpec spec,
                     RandomEffectsPrior prior = {})
      : groups_(std::move(groups)), spec_(spec), prior_(prior), gfun_(spec.kind),
        gh_(gfun_, spec.gh_points) {
    require(groups_.size() >= 2, ErrorCode::InsufficientData, "random effects need >= 2 groups");
    std::vector<double> resid;
    for (const auto& g : groups_) {
      require(!g.empty(), ErrorCode::InsufficientData, "empty group");
      const double m = mean(g);
      means_.push_back(m);
      for (double y : g) resid.push_back(y - m);
      total_ += g.size();
    }
    require(total_ > groups_.size(), ErrorCode::InsufficientData,
            "random effects need replicated observations");
    double ss = 0.0;
    for (double e : resid) ss += e * e;
    sigma_hat_ = std::sqrt(ss / static_cast<double>(total_ - groups_.size()));
    tau_hat_ = std::max(stddev(means_), 1e-3);
    require(sigma_hat_ > 0.0, ErrorCode::DegenerateData, "all groups are constant");

    if (spec_.latent == TermKind::Disparity)
      latent_bandwidth_ = select_bandwidth(means_, spec_.selector);
    if (spec_.observation == TermKind::Disparity) {
      obs_bandwidth_ = select_bandwidth(resid, spec_.selector);
      Rng rng(spec_.seed);
      const auto est = resolve_estimator(spec_.observation_estimator, spec_.kind);
      for (const auto& g : groups_) {
        obs_kde_.emplace_back(g, obs_bandwidth_);
        if (est == Estimator::MonteCarlo)
          obs_mc_.push_back(MonteCarloDisparity::from_kde(gfun_, obs_kde_.back(), spec_.mc_samples, rng));
      }
    }
  }

  std::size_t groups() const { return groups_.size(); }
  std::size_t dim() const { return groups_.size() + 3; }
  double latent_bandwidth() const { return latent_bandwidth_; }
  double observation_bandwidth() const { return obs_bandwidth_; }
  const std::vector<double>& group_means() const { return means_; }

  /// Observation term: sum_ij log phi(Y_ij - Z_i; sigma), or -sum_i n_i D(g_i^(c), phi_{0,sigma}).
  double observation_term(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(groups_.size());
    const double sigma = th(m + 1);
    double s = 0.0;
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      const double z = th(static_cast<Eigen::Index>(i));
      if (spec_.observation == TermKind::Likelihood) {
        for (double y : groups_[i]) s += normal_logpdf(y, z, sigma);
      } else {
        // The KDE of Y_ij - Z_i against phi_{0,sigma} equals the KDE of Y_ij against phi_{Z_i,sigma}.
        const double d = obs_mc_.empty()
                             ? gh_(obs_kde_[i], z, sigma)
                             : obs_mc_[i]([&](double x) { return normal_logpdf(x, z, sigma); });
        s -= static_cast<double>(groups_[i].size()) * d;
      }
    }
    return s;
  }

  /// Latent term: sum_i log phi(Z_i; mu, tau), or -m D(g_m(.;Z), phi_{mu,tau}).
  double latent_term(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(groups_.size());
    const double mu = th(m), tau = th(m + 2);
    if (spec_.latent == TermKind::Likelihood) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) s += normal_logpdf(th(i), mu, tau);
      return s;
    }
    const KernelDensity g(to_std(th.head(m)), latent_bandwidth_);
    return -static_cast<double>(m) * gh_(g, mu, tau);
  }

  double log_prior(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(groups_.size());
    return prior_.mu.log_density(th(m)) + detail::log_prior_on_scale(prior_.sigma2, th(m + 1)) +
           detail::log_prior_on_scale(prior_.tau2, th(m + 2));
  }

  double log_density(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(groups_.size());
    if (!(th(m + 1) > 0.0) || !(th(m + 2) > 0.0)) return -kInf;
    const double lp = log_prior(th);
    if (lp == -kInf) return lp;
    return observation_term(th) + latent_term(th) + lp;
  }

  /// Group means, their mean and spread, and the pooled residual SD.
  Vec initial() const {
    Vec th(static_cast<Eigen::Index>(dim()));
    const auto m = static_cast<Eigen::Index>(groups_.size());
    for (Eigen::Index i = 0; i < m; ++i) th(i) = means_[static_cast<std::size_t>(i)];
    th(m) = mean(means_);
    th(m + 1) = sigma_hat_;
    th(m + 2) = tau_hat_;
    return th;
  }

  /// Unconstrained proposal scales from approximate posterior SDs.
  std::vector<double> proposal_scales() const {
    const auto m = groups_.size();
    std::vector<double> s;
    for (const auto& g : groups_) s.push_back(sigma_hat_ / std::sqrt(static_cast<double>(g.size())));
    s.push_back(tau_hat_ / std::sqrt(static_cast<double>(m)));
    s.push_back(1.0 / std::sqrt(2.0 * static_cast<double>(total_ - m)));
    s.push_back(1.0 / std::sqrt(2.0 * static_cast<double>(m)));
    const double f = 2.38 / std::sqrt(static_cast<double>(dim()));
    for (double& v : s) v *= f;
    return s;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < groups_.size(); ++i) n.push_back("Z" + std::to_string(i + 1));
    n.insert(n.end(), {"mu", "sigma", "tau"});
    return n;
  }

  SamplingProblem problem() const {
    auto self = std::make_shared<const RandomEffectsModel>(*this);
    Vec init = initial();
    init.tail(2) = init.tail(2).array().log();
    return detail::make_problem([self](const Vec& th) { return self->log_density(th); },
                                detail::exp_tail(2), detail::exp_tail_jacobian(2), init, names());
  }

 private:
  std::vector<std::vector<double>> groups_;
  HierarchicalSpec spec_;
  RandomEffectsPrior prior_;
  GFunction gfun_;
  GaussHermiteDisparity gh_;
  std::vector<double> means_;
  std::size_t total_ = 0;
  double sigma_hat_ = 1.0, tau_hat_ = 1.0;
  double latent_bandwidth_ = 0.0, obs_bandwidth_ = 0.0;
  std::vector<KernelDensity> obs_kde_;
  std::vector<MonteCarloDisparity> obs_mc_;
};

// ---------------------------------------------------------------------------
// Binomial logit-normal: k_i ~ Bin(N_i, p_i), logit p_i ~ N(mu, sigma^2).

struct BinomialPrior {
  UnivariatePrior mu = UnivariatePrior::normal(0.0, 5.0);
  UnivariatePrior sigma2 = UnivariatePrior::inverse_gamma(3.0, 0.5);
};

/// theta = (lambda_1..lambda_n, mu, sigma) with lambda = logit p; u = (lambda, mu, log sigma).
/// Only the latent term can be replaced (one observation per unit).
class BinomialLogitNormalModel {
 public:
  BinomialLogitNormalModel(std::vector<double> successes, std::vector<double> trials,
                           HierarchicalSpec spec, BinomialPrior prior = {})
      : k_(std::move(successes)), n_(std::move(trials)), spec_(spec), prior_(prior),
        gh_(GFunction(spec.kind), spec.gh_points) {
    require(k_.size() == n_.size(), ErrorCode::InvalidParam, "count vectors differ in length");
    require(k_.size() >= 2, ErrorCode::InsufficientData,
            "binomial logit-normal model needs at least two units");
    require(spec_.observation == TermKind::Likelihood, ErrorCode::InvalidParam,
            "binomial observation term cannot be replaced by a disparity");
    for (std::size_t i = 0; i < k_.size(); ++i) {
      require(n_[i] > 0.0 && k_[i] >= 0.0 && k_[i] <= n_[i], ErrorCode::InvalidParam,
              "need 0 <= k_i <= N_i and N_i > 0");
      logits_.push_back(logit((k_[i] + 0.5) / (n_[i] + 1.0)));
    }
    if (spec_.latent == TermKind::Disparity) bandwidth_ = select_bandwidth(logits_, spec_.selector);
  }

  std::size_t units() const { return k_.size(); }
  std::size_t dim() const { return k_.size() + 2; }
  double bandwidth() const { return bandwidth_; }
  const std::vector<double>& empirical_logits() const { return logits_; }

  double observation_term(const Vec& th) const {
    double s = 0.0;
    for (std::size_t i = 0; i < k_.size(); ++i) {
      const double lam = th(static_cast<Eigen::Index>(i));
      // log p = -log(1+e^{-lam}), log(1-p) = -log(1+e^{lam})
      s -= k_[i] * std::log1p(std::exp(-lam)) + (n_[i] - k_[i]) * std::log1p(std::exp(lam));
    }
    return s;
  }

  double latent_term(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(k_.size());
    const double mu = th(m), sigma = th(m + 1);
    if (spec_.latent == TermKind::Likelihood) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) s += normal_logpdf(th(i), mu, sigma);
      return s;
    }
    const KernelDensity g(to_std(th.head(m)), bandwidth_);
    return -static_cast<double>(m) * gh_(g, mu, sigma);
  }

  double log_density(const Vec& th) const {
    const auto m = static_cast<Eigen::Index>(k_.size());
    for (Eigen::Index i = 0; i < m; ++i)
      require(std::isfinite(th(i)), ErrorCode::InvalidParam, "p_i must lie in (0, 1)");
    if (!(th(m + 1) > 0.0)) return -kInf;
    const double lp = prior_.mu.log_density(th(m)) + detail::log_prior_on_scale(prior_.sigma2, th(m + 1));
    return observation_term(th) + latent_term(th) + lp;
  }

  Vec initial() const {
    Vec th(static_cast<Eigen::Index>(dim()));
    const auto m = static_cast<Eigen::Index>(k_.size());
    for (Eigen::Index i = 0; i < m; ++i) th(i) = logits_[static_cast<std::size_t>(i)];
    th(m) = mean(logits_);
    th(m + 1) = std::max(stddev(logits_), 0.05);
    return th;
  }

  std::vector<double> proposal_scales() const {
    std::vector<double> s;
    for (std::size_t i = 0; i < k_.size(); ++i) {
      const double p = expit(logits_[i]);
      s.push_back(1.0 / std::sqrt(n_[i] * p * (1.0 - p)));
    }
    const double sd = initial()(static_cast<Eigen::Index>(k_.size()) + 1);
    s.push_back(sd / std::sqrt(static_cast<double>(k_.size())));
    s.push_back(1.0 / std::sqrt(2.0 * static_cast<double>(k_.size())));
    const double f = 2.38 / std::sqrt(static_cast<double>(dim()));
    for (double& v : s) v *= f;
    return s;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < k_.size(); ++i) n.push_back("lambda" + std::to_string(i + 1));
    n.insert(n.end(), {"mu", "sigma"});
    return n;
  }

  SamplingProblem problem() const {
    auto self = std::make_shared<const BinomialLogitNormalModel>(*this);
    Vec init = initial();
    init.tail(1) = init.tail(1).array().log();
    return detail::make_problem([self](const Vec& th) { return self->log_density(th); },
                                detail::exp_tail(1), detail::exp_tail_jacobian(1), init, names());
  }

 private:
  std::vector<double> k_, n_;
  HierarchicalSpec spec_;
  BinomialPrior prior_;
  GaussHermiteDisparity gh_;
  std::vector<double> logits_;
  double bandwidth_ = 0.0;
};

// ---------------------------------------------------------------------------
// Random intercept longitudinal model:
//   Y_ijk = b_0ij + beta_1j t_k + eps,  b_0ij ~ N(beta_0j, tau0^2),  eps ~ N(0, sigma^2).

struct SurveyData {
  std::vector<int> group;                    // 0 or 1 per subject
  std::vector<std::array<double, 4>> y;      // responses at the four times
  std::array<double, 4> times{-15.0, -5.0, 5.0, 15.0};  // ages 35..65 centered at 50
};

struct RandomInterceptPrior {
  UnivariatePrior beta0 = UnivariatePrior::normal(0.0, 150.0 * 150.0);
  UnivariatePrior beta1 = UnivariatePrior::normal(0.0, 0.5 * 0.5);
  UnivariatePrior tau2 = UnivariatePrior::gamma(3.0, 0.5);
  UnivariatePrior sigma2 = UnivariatePrior::gamma(3.0, 0.05);
};

/// theta = (b_1..b_n, beta0_0, beta0_1, beta1_0, beta1_1, sigma2, tau2);
/// u = (b, beta, log sigma2, log tau2). Terms include their Gaussian normalizers.
class RandomInterceptModel {
 public:
  RandomInterceptModel(SurveyData data, HierarchicalSpec spec, RandomInterceptPrior prior = {})
      : d_(std::move(data)), spec_(spec), prior_(prior), gh_(GFunction(spec.kind), spec.gh_points) {
    const std::size_t n = d_.y.size();
    require(n == d_.group.size(), ErrorCode::InvalidParam, "group labels and rows differ");
    require(n >= 2, ErrorCode::InsufficientData, "random intercept model needs subjects");
    for (int g : d_.group)
      require(g == 0 || g == 1, ErrorCode::InvalidParam, "group must be 0 or 1");
    least_squares();
    require(sigma2_hat_ > 0.0, ErrorCode::DegenerateData, "responses have no residual variation");

    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = b_hat_[i] - beta0_hat_[d_.group[i]];
    if (spec_.latent == TermKind::Disparity) latent_bandwidth_ = select_bandwidth(centered, spec_.selector);
    if (spec_.observation == TermKind::Disparity) {
      double s = 0.0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(4);
        for (std::size_t k = 0; k < 4; ++k)
          e[k] = d_.y[i][k] - b_hat_[i] - beta1_hat_[d_.group[i]] * d_.times[k];
        try {
          s += select_bandwidth(e, spec_.selector);
          ++used;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::DegenerateData) throw;
        }
      }
      require(used > 0, ErrorCode::DegenerateData, "every subject has constant residuals");
      obs_bandwidth_ = s / static_cast<double>(used);
    }
  }

  std::size_t subjects() const { return d_.y.size(); }
  std::size_t dim() const { return d_.y.size() + 6; }
  double latent_bandwidth() const { return latent_bandwidth_; }
  double observation_bandwidth() const { return obs_bandwidth_; }

  double observation_term(const Vec& th) const {
    const auto n = static_cast<Eigen::Index>(d_.y.size());
    const double sigma = std::sqrt(th(n + 4));
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double slope = th(n + 2 + d_.group[ii]);
      if (spec_.observation == TermKind::Likelihood) {
        for (std::size_t k = 0; k < 4; ++k)
          s += normal_logpdf(d_.y[ii][k] - th(i) - slope * d_.times[k], 0.0, sigma);
      } else {
        std::vector<double> e(4);
        for (std::size_t k = 0; k < 4; ++k) e[k] = d_.y[ii][k] - th(i) - slope * d_.times[k];
        s -= 4.0 * gh_(KernelDensity(std::move(e), obs_bandwidth_), 0.0, sigma);
      }
    }
    return s;
  }

  /// Latent term; the disparity form pools both groups and is scaled by the subject count.
  double latent_term(const Vec& th) const {
    const auto n = static_cast<Eigen::Index>(d_.y.size());
    const double tau = std::sqrt(th(n + 5));
    std::vector<double> c(d_.y.size());
    for (Eigen::Index i = 0; i < n; ++i)
      c[static_cast<std::size_t>(i)] = th(i) - th(n + d_.group[static_cast<std::size_t>(i)]);
    if (spec_.latent == TermKind::Likelihood) {
      double s = 0.0;
      for (double v : c) s += normal_logpdf(v, 0.0, tau);
      return s;
    }
    return -static_cast<double>(n) * gh_(KernelDensity(std::move(c), latent_bandwidth_), 0.0, tau);
  }

  double log_prior(const Vec& th) const {
    const auto n = static_cast<Eigen::Index>(d_.y.size());
    return prior_.beta0.log_density(th(n)) + prior_.beta0.log_density(th(n + 1)) +
           prior_.beta1.log_density(th(n + 2)) + prior_.beta1.log_density(th(n + 3)) +
           prior_.sigma2.log_density(th(n + 4)) + prior_.tau2.log_density(th(n + 5));
  }

  double log_density(const Vec& th) const {
    const auto n = static_cast<Eigen::Index>(d_.y.size());
    if (!(th(n + 4) > 0.0) || !(th(n + 5) > 0.0)) return -kInf;
    return observation_term(th) + latent_term(th) + log_prior(th);
  }

  Vec initial() const {
    const auto n = static_cast<Eigen::Index>(d_.y.size());
    Vec th(static_cast<Eigen::Index>(dim()));
    for (Eigen::Index i = 0; i < n; ++i) th(i) = b_hat_[static_cast<std::size_t>(i)];
    th(n) = beta0_hat_[0];
    th(n + 1) = beta0_hat_[1];
    th(n + 2) = beta1_hat_[0];
    th(n + 3) = beta1_hat_[1];
    th(n + 4) = sigma2_hat_;
    th(n + 5) = tau2_hat_;
    return th;
  }

  std::vector<double> proposal_scales() const {
    const std::size_t n = d_.y.size();
    const double sig = std::sqrt(sigma2_hat_), tau = std::sqrt(tau2_hat_);
    double tt = 0.0;
    for (double t : d_.times) tt += t * t;
    std::vector<double> s(n, sig / 2.0);
    s.push_back(tau / std::sqrt(n / 2.0));
    s.push_back(tau / std::sqrt(n / 2.0));
    s.push_back(sig / std::sqrt(tt * n / 2.0));
    s.push_back(sig / std::sqrt(tt * n / 2.0));
    s.push_back(std::sqrt(2.0 / (4.0 * n)));
    s.push_back(std::sqrt(2.0 / n));
    const double f = 2.38 / std::sqrt(static_cast<double>(dim()));
    for (double& v : s) v *= f;
    return s;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> nm;
    for (std::size_t i = 0; i < d_.y.size(); ++i) nm.push_back("b" + std::to_string(i + 1));
    nm.insert(nm.end(), {"beta0_a", "beta0_f", "beta1_a", "beta1_f", "sigma2", "tau2"});
    return nm;
  }

  SamplingProblem problem() const {
    auto self = std::make_shared<const RandomInterceptModel>(*this);
    Vec init = initial();
    init.tail(2) = init.tail(2).array().log();
    return detail::make_problem([self](const Vec& th) { return self->log_density(th); },
                                detail::exp_tail(2), detail::exp_tail_jacobian(2), init, names());
  }

 private:
  /// Per-subject intercepts with a per-group common slope, by least squares.
  void least_squares() {
    const std::size_t n = d_.y.size();
    double tbar = 0.0;
    for (double t : d_.times) tbar += t / 4.0;
    double num[2] = {0, 0}, den[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const double ybar = (d_.y[i][0] + d_.y[i][1] + d_.y[i][2] + d_.y[i][3]) / 4.0;
      for (std::size_t k = 0; k < 4; ++k) {
        num[d_.group[i]] += (d_.times[k] - tbar) * (d_.y[i][k] - ybar);
        den[d_.group[i]] += (d_.times[k] - tbar) * (d_.times[k] - tbar);
      }
      ++count[d_.group[i]];
    }
    require(count[0] > 0 && count[1] > 0, ErrorCode::InsufficientData, "both groups need subjects");
    for (int j = 0; j < 2; ++j) beta1_hat_[j] = num[j] / den[j];
    b_hat_.resize(n);
    double sum_b[2] = {0, 0}, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += d_.y[i][k] - beta1_hat_[d_.group[i]] * d_.times[k];
      b_hat_[i] = s / 4.0;
      sum_b[d_.group[i]] += b_hat_[i];
      for (std::size_t k = 0; k < 4; ++k) {
        const double e = d_.y[i][k] - b_hat_[i] - beta1_hat_[d_.group[i]] * d_.times[k];
        ss += e * e;
      }
    }
    for (int j = 0; j < 2; ++j) beta0_hat_[j] = sum_b[j] / static_cast<double>(count[j]);
    sigma2_hat_ = ss / static_cast<double>(4 * n - 1);
    double st = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = b_hat_[i] - beta0_hat_[d_.group[i]];
      st += c * c;
    }
    tau2_hat_ = st / static_cast<double>(n - 1);
  }

  SurveyData d_;
  HierarchicalSpec spec_;
  RandomInterceptPrior prior_;
  GaussHermiteDisparity gh_;
  std::vector<double> b_hat_;
  double beta0_hat_[2] = {0, 0}, beta1_hat_[2] = {0, 0};
  double sigma2_hat_ = 0.0, tau2_hat_ = 0.0;
  double latent_bandwidth_ = 0.0, obs_bandwidth_ = 0.0;
};

}  // namespace dpost
