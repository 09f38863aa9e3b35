#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpost/disparity.hpp"
#include "dpost/kde.hpp"
#include "dpost/models.hpp"
#include "dpost/sampler.hpp"

namespace dpost {

/// theta (constrained) -> D(g, f_theta).
using DisparityFn = std::function<double(const Vec&)>;

/// Everything a Metropolis run and its summary need, independent of model type.
struct SamplingProblem {
  std::function<double(const Vec&)> log_target;      // unconstrained, includes log-Jacobian
  std::function<Vec(const Vec&)> to_constrained;
  std::function<double(const Vec&)> log_jacobian;
  Vec init;                                          // unconstrained start
  std::vector<std::string> names;
};

template <ParametricModel M>
DisparityFn mc_disparity(M model, std::shared_ptr<const MonteCarloDisparity> est) {
  return [model = std::move(model), est = std::move(est)](const Vec& th) {
    return (*est)([&](double x) { return model.log_density(th, x); });
  };
}

/// Gauss-Hermite disparity; requires a Gaussian location-scale family.
template <ParametricModel M, class Density>
DisparityFn gh_disparity(M model, GaussHermiteDisparity est, Density g) {
  require(model.gaussian(model.to_constrained(Vec::Zero(static_cast<Eigen::Index>(model.dim()))))
              .has_value(),
          ErrorCode::InvalidParam, "Gauss-Hermite disparity needs a Gaussian model");
  return [model = std::move(model), est = std::move(est), g = std::move(g)](const Vec& th) {
    const auto gs = model.gaussian(th);
    if (!(gs->sd > 0.0)) return kInf;
    return est(g, gs->mean, gs->sd);
  };
}

/// Quadrature-backed disparity against an arbitrary density g whose mass lies
/// in `g_windows`; `cuts` lists discontinuities of g.
template <ParametricModel M>
DisparityFn quadrature_disparity(M model, GFunction gfun, std::function<double(double)> g,
                                 std::vector<Window> g_windows,
                                 std::vector<double> cuts = {}, QuadratureOptions opt = {}) {
  return [=](const Vec& th) {
    auto w = g_windows;
    w.push_back(model.window(th));
    const auto windows = IntegrationWindows::merge(w, cuts);
    return disparity_exact_quadrature(
        gfun, g, [&](double x) { return model.log_density(th, x); }, windows, opt);
  };
}

/// Empirical KL form -(1/n) sum log f_theta(X_i); n times it is the negative
/// log-likelihood, so the D-posterior built on it is the ordinary posterior.
template <ParametricModel M>
DisparityFn empirical_kl(M model, std::vector<double> data) {
  require(!data.empty(), ErrorCode::InsufficientData, "empirical KL needs data");
  return [model = std::move(model), data = std::move(data)](const Vec& th) {
    double s = 0.0;
    for (double x : data) s += model.log_density(th, x);
    const double d = -s / static_cast<double>(data.size());
    return std::isnan(d) ? kInf : d;
  };
}

// ---------------------------------------------------------------------------
// Huber and Tukey pseudo-likelihoods

enum class RobustLoss { Huber, Tukey };

inline double robust_rho(RobustLoss loss, double c, double u) {
  const double a = std::abs(u);
  if (loss == RobustLoss::Huber) return a <= c ? 0.5 * u * u : c * a - 0.5 * c * c;
  if (a >= c) return c * c / 6.0;
  const double t = 1.0 - (u / c) * (u / c);
  return c * c / 6.0 * (1.0 - t * t * t);
}

/// (1/n)[sum rho((x_i - mu)/sigma) + n log sigma]; n times it replaces the
/// negative log-likelihood of a location-scale model.
template <ParametricModel M>
DisparityFn robust_loss_disparity(M model, std::vector<double> data, RobustLoss loss, double c) {
  require(!data.empty(), ErrorCode::InsufficientData, "robust loss needs data");
  require(c > 0.0, ErrorCode::InvalidParam, "robust loss cutoff must be positive");
  return [model = std::move(model), data = std::move(data), loss, c](const Vec& th) {
    const auto gs = model.gaussian(th);
    require(gs.has_value(), ErrorCode::InvalidParam, "robust loss needs a location-scale model");
    double s = 0.0;
    for (double x : data) s += robust_rho(loss, c, (x - gs->mean) / gs->sd);
    return s / static_cast<double>(data.size()) + std::log(gs->sd);
  };
}

/// Unnormalized D-posterior  exp(-n D(g, f_theta)) pi(theta).
template <ParametricModel M>
class DPosterior {
 public:
  DPosterior(M model, ProductPrior prior, double n, DisparityFn disparity)
      : model_(std::move(model)), prior_(std::move(prior)), n_(n), disparity_(std::move(disparity)) {
    require(prior_.dim() == model_.dim(), ErrorCode::InvalidParam, "prior/model dimension mismatch");
    require(n_ >= 0.0, ErrorCode::InvalidParam, "sample size must be nonnegative");
  }

  const M& model() const { return model_; }
  const ProductPrior& prior() const { return prior_; }
  double n() const { return n_; }

  double disparity(const Vec& th) const { return disparity_(th); }

  /// -n D + log pi at constrained theta.
  double log_density(const Vec& th) const {
    const double lp = prior_.log_density(th);
    if (lp == -kInf) return -kInf;
    const double d = disparity_(th);
    if (!std::isfinite(d)) return -kInf;
    const double v = -n_ * d + lp;
    return std::isnan(v) ? -kInf : v;
  }

  /// Log target in the unconstrained space (includes the log-Jacobian).
  double log_target(const Vec& u) const {
    const Vec th = model_.to_constrained(u);
    for (Eigen::Index i = 0; i < th.size(); ++i)
      if (!std::isfinite(th(i))) return -kInf;
    const double v = log_density(th);
    if (v == -kInf) return v;
    return v + model_.log_jacobian(u);
  }

  /// Bundles this posterior for sampling from constrained `init`. The returned
  /// problem shares state with a copy of *this.
  SamplingProblem problem(const Vec& init) const {
    auto self = std::make_shared<const DPosterior>(*this);
    return {[self](const Vec& u) { return self->log_target(u); },
            [self](const Vec& u) { return self->model_.to_constrained(u); },
            [self](const Vec& u) { return self->model_.log_jacobian(u); },
            model_.to_unconstrained(init), model_.names()};
  }

 private:
  M model_;
  ProductPrior prior_;
  double n_;
  DisparityFn disparity_;
};

struct FitResult {
  Chain chain;
  PosteriorSummary summary;
};

inline FitResult fit(const SamplingProblem& p, const ChainConfig& cfg, double level = 0.95) {
  FitResult r;
  r.chain = run_metropolis(p.log_target, p.init, cfg);
  r.summary = summarize(r.chain, cfg, p.to_constrained, p.log_jacobian, level);
  return r;
}

}  // namespace dpost
