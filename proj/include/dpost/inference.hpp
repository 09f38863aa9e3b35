#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpost/disparity.hpp"
#include "dpost/error.hpp"
#include "dpost/models.hpp"
#include "dpost/optimize.hpp"
#include "dpost/posterior.hpp"
#include "dpost/quadrature.hpp"
#include "dpost/rng.hpp"
#include "dpost/sampler.hpp"

namespace dpost {

/// A density known in closed form, with the windows that hold its mass and
/// the points where it is discontinuous. `draw` may be empty when the
/// density cannot be sampled (e.g. the zero density).
struct AnalyticDensity {
  std::function<double(double)> pdf;
  std::vector<Window> windows;
  std::vector<double> cuts;
  std::function<double(Rng&)> draw;
  double mass = 1.0;

  double operator()(double x) const { return pdf(x); }
};

inline AnalyticDensity normal_density(double mean, double sd) {
  require(sd > 0.0, ErrorCode::InvalidParam, "normal density needs sd > 0");
  return {[=](double x) { return normal_pdf(x, mean, sd); },
          {gaussian_window(mean, sd)},
          {},
          [=](Rng& rng) { return mean + sd * standard_normal(rng); },
          1.0};
}

/// c * g for c in [0, 1]; c = 0 gives the zero density.
inline AnalyticDensity scaled_density(AnalyticDensity g, double c) {
  require(c >= 0.0 && c <= 1.0, ErrorCode::InvalidLevel, "density scale must lie in [0, 1]");
  auto base = std::move(g.pdf);
  g.pdf = [base = std::move(base), c](double x) { return c * base(x); };
  g.mass *= c;
  if (c == 0.0) g.draw = nullptr;
  return g;
}

inline AnalyticDensity zero_density(Window support = gaussian_window(0.0, 1.0)) {
  return {[](double) { return 0.0; }, {support}, {}, nullptr, 0.0};
}

/// h(x) = (1 - alpha) g(x) + alpha t_z(x), t_z uniform on [z - w/2, z + w/2].
struct ContaminatedDensity {
  AnalyticDensity base;
  double center = 0.0;
  double width = 0.1;
  double level = 0.0;

  ContaminatedDensity(AnalyticDensity g, double z, double alpha, double w = 0.1)
      : base(std::move(g)), center(z), width(w), level(alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::InvalidLevel,
            "contamination level must lie in [0, 1]");
    require(w > 0.0 && std::isfinite(z), ErrorCode::InvalidParam,
            "contaminant needs a finite center and positive width");
  }

  double operator()(double x) const {
    const double t = std::abs(x - center) <= 0.5 * width ? 1.0 / width : 0.0;
    return (1.0 - level) * base(x) + level * t;
  }

  AnalyticDensity density() const {
    AnalyticDensity h;
    h.pdf = [self = *this](double x) { return self(x); };
    h.windows = base.windows;
    const double a = center - 0.5 * width, b = center + 0.5 * width;
    h.windows.push_back({a, b, a, b, width});
    h.cuts = base.cuts;
    h.cuts.push_back(a);
    h.cuts.push_back(b);
    h.mass = (1.0 - level) * base.mass + level;
    if (base.draw || level == 1.0) {
      h.draw = [self = *this](Rng& rng) {
        if (uniform01(rng) < self.level)
          return self.center + self.width * (uniform01(rng) - 0.5);
        return self.base.draw(rng);
      };
    }
    return h;
  }
};

enum class FunctionalEstimator { Quadrature, MonteCarlo };

/// theta -> D(g, f_theta) for an analytic g. Monte Carlo freezes `mc_samples`
/// draws from g (seeded) and requires g.draw.
template <ParametricModel M>
DisparityFn analytic_disparity(M model, GFunction gfun, const AnalyticDensity& g,
                               FunctionalEstimator est = FunctionalEstimator::Quadrature,
                               std::size_t mc_samples = 10000, std::uint64_t seed = 0,
                               QuadratureOptions qopt = {}) {
  if (est == FunctionalEstimator::Quadrature)
    return quadrature_disparity(std::move(model), gfun, g.pdf, g.windows, g.cuts, qopt);
  require(static_cast<bool>(g.draw), ErrorCode::InvalidParam,
          "Monte Carlo disparity needs a density that can be sampled");
  Rng rng(seed);
  std::vector<double> z(mc_samples), lg(mc_samples);
  for (std::size_t i = 0; i < mc_samples; ++i) {
    z[i] = g.draw(rng);
    lg[i] = std::log(g.pdf(z[i]));
  }
  auto mc = std::make_shared<const MonteCarloDisparity>(gfun, std::move(z), std::move(lg));
  return mc_disparity(std::move(model), std::move(mc));
}

// ---------------------------------------------------------------------------
// Minimum disparity estimation

struct MdeOptions {
  NelderMeadOptions nelder_mead{};
  bool newton_polish = true;
  std::size_t polish_iterations = 30;
  double fd_step = 1e-4;
};

struct MdeResult {
  Vec theta;
  double value = kInf;
  std::size_t iterations = 0;
  bool polished = false;
};

namespace detail {

inline double fd_step(double x, double rel) { return rel * (1.0 + std::abs(x)); }

/// Central-difference gradient and Hessian of f at x.
inline void fd_derivatives(const std::function<double(const Vec&)>& f, const Vec& x, double rel,
                           Vec& grad, Eigen::MatrixXd& hess) {
  const auto d = x.size();
  grad.resize(d);
  hess.resize(d, d);
  const double f0 = f(x);
  Vec h(d);
  for (Eigen::Index i = 0; i < d; ++i) h(i) = fd_step(x(i), rel);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp(i) += h(i);
    xm(i) -= h(i);
    const double fp = f(xp), fm = f(xm);
    grad(i) = (fp - fm) / (2.0 * h(i));
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Vec a = x, b = x, c = x, e = x;
      a(i) += h(i), a(j) += h(j);
      b(i) += h(i), b(j) -= h(j);
      c(i) -= h(i), c(j) += h(j);
      e(i) -= h(i), e(j) -= h(j);
      hess(i, j) = hess(j, i) = (f(a) - f(b) - f(c) + f(e)) / (4.0 * h(i) * h(j));
    }
  }
}

}  // namespace detail

/// argmin_theta D(g, f_theta): Nelder-Mead in the unconstrained space, then
/// damped Newton steps on finite-difference derivatives. A Newton step is
/// kept only if it lowers the objective.
template <ParametricModel M>
MdeResult mde(const M& model, const DisparityFn& disparity, const Vec& theta_init,
              const MdeOptions& opt = {}) {
  const std::function<double(const Vec&)> obj = [&](const Vec& u) {
    const Vec th = model.to_constrained(u);
    for (Eigen::Index i = 0; i < th.size(); ++i)
      if (!std::isfinite(th(i))) return kInf;
    return disparity(th);
  };
  auto nm = nelder_mead(obj, model.to_unconstrained(theta_init), opt.nelder_mead);
  MdeResult r;
  Vec u = nm.x;
  r.value = nm.value;
  r.iterations = nm.iterations;
  if (opt.newton_polish) {
    Vec g;
    Eigen::MatrixXd H;
    for (std::size_t it = 0; it < opt.polish_iterations; ++it) {
      detail::fd_derivatives(obj, u, opt.fd_step, g, H);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
      Vec step = ldlt.solve(g);
      bool moved = false;
      for (double t = 1.0; t > 1e-4; t *= 0.5) {
        const Vec cand = u - t * step;
        const double v = obj(cand);
        if (v <= r.value) {
          const double delta = (cand - u).cwiseAbs().maxCoeff();
          u = cand;
          r.value = v;
          moved = delta > 0.0;
          r.polished = true;
          break;
        }
      }
      if (!moved || step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
  }
  r.theta = model.to_constrained(u);
  return r;
}

// ---------------------------------------------------------------------------
// Disparity information

struct DisparityInformation {
  Eigen::MatrixXd matrix;
  Vec eigenvalues;
  bool positive_definite = false;
};

/// Central finite-difference Hessian of theta -> D(g, f_theta) (constrained
/// coordinates), step 1e-4 (1 + |theta_i|), symmetrized.
inline DisparityInformation disparity_information(const DisparityFn& disparity, const Vec& theta,
                                                  double rel_step = 1e-4) {
  Vec g;
  Eigen::MatrixXd H;
  detail::fd_derivatives(disparity, theta, rel_step, g, H);
  DisparityInformation info;
  info.matrix = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.matrix, Eigen::EigenvaluesOnly);
  info.eigenvalues = es.eigenvalues();
  info.positive_definite = info.eigenvalues.minCoeff() > 0.0;
  return info;
}

// ---------------------------------------------------------------------------
// Posterior functionals T_n

struct FunctionalEstimate {
  Vec edap;
  Vec mc_se;
  double acceptance_rate = 0.0;
  bool stuck = false;
};

template <ParametricModel M>
FunctionalEstimate posterior_functional(const M& model, const ProductPrior& prior, double n,
                                        DisparityFn disparity, const Vec& theta_init,
                                        const ChainConfig& cfg) {
  const DPosterior<M> post(model, prior, n, std::move(disparity));
  const auto res = fit(post.problem(theta_init), cfg);
  return {res.summary.edap, res.summary.mc_se, res.summary.acceptance_rate, res.summary.stuck};
}

/// Zero-variance control-variate estimate of E[theta] from the kept draws of
/// a chain. Control variates are Stein terms  Delta P + grad P . grad log pi
/// for polynomials P of degree <= `degree` (1 or 2) in the sampler
/// coordinates; gradients are central differences of the log target.
inline Vec zero_variance_mean(const SamplingProblem& p, const Chain& chain,
                              const PosteriorSummary& s, int degree = 2, double rel_step = 1e-5) {
  require(degree == 1 || degree == 2, ErrorCode::InvalidParam, "control-variate degree must be 1 or 2");
  const std::size_t m = s.kept.size();
  const auto d = chain.states.front().size();
  const Eigen::Index q = degree == 1 ? d : d + d * (d + 1) / 2;
  require(m > static_cast<std::size_t>(q) + 2, ErrorCode::EmptyChain,
          "too few draws for control variates");
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(m), q);
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s.dim()));
  for (std::size_t k = 0; k < m; ++k) {
    const Vec& u = chain.states[s.kept[k]];
    Vec psi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h = detail::fd_step(u(i), rel_step);
      Vec up = u, um = u;
      up(i) += h;
      um(i) -= h;
      psi(i) = (p.log_target(up) - p.log_target(um)) / (2.0 * h);
    }
    const auto row = static_cast<Eigen::Index>(k);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < d; ++i) phi(row, c++) = psi(i);
    if (degree == 2) {
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j)
          phi(row, c++) = i == j ? 2.0 * u(i) * psi(i) + 2.0 : u(j) * psi(i) + u(i) * psi(j);
    }
    theta.row(row) = s.draws[k].transpose();
  }
  const Eigen::RowVectorXd phi_mean = phi.colwise().mean();
  const Eigen::MatrixXd pc = phi.rowwise() - phi_mean;
  const Eigen::MatrixXd tc = theta.rowwise() - theta.colwise().mean();
  const Eigen::MatrixXd a = pc.colPivHouseholderQr().solve(tc);
  return (theta - phi * a).colwise().mean().transpose();
}

// ---------------------------------------------------------------------------
// Influence and breakdown

struct InfluenceOptions {
  FunctionalEstimator estimator = FunctionalEstimator::Quadrature;
  std::size_t mc_samples = 10000;
  double width = 0.1;
  ChainConfig chain{};
};

struct InfluenceResult {
  Vec displacement;  // alpha^{-1} [T_n(h_{z,alpha}) - T_n(g)]
  Vec mc_se;
  Vec clean;
  Vec contaminated;
};

/// alpha-level influence function at z. Both chains share the seed (common
/// random numbers); `mc_se` adds the two batch-means errors in quadrature.
template <ParametricModel M>
InfluenceResult influence_alpha(const M& model, const ProductPrior& prior, double n,
                                const AnalyticDensity& g, GFunction gfun, double z, double alpha,
                                const Vec& theta_init, const InfluenceOptions& opt) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidLevel,
          "influence needs a contamination level in (0, 1)");
  const auto h = ContaminatedDensity(g, z, alpha, opt.width).density();
  const std::uint64_t mc_seed = derive_seed(opt.chain.seed, 0x1F);
  const auto clean = posterior_functional(
      model, prior, n, analytic_disparity(model, gfun, g, opt.estimator, opt.mc_samples, mc_seed),
      theta_init, opt.chain);
  const auto cont = posterior_functional(
      model, prior, n, analytic_disparity(model, gfun, h, opt.estimator, opt.mc_samples, mc_seed),
      theta_init, opt.chain);
  InfluenceResult r;
  r.clean = clean.edap;
  r.contaminated = cont.edap;
  r.displacement = (cont.edap - clean.edap) / alpha;
  r.mc_se = (clean.mc_se.array().square() + cont.mc_se.array().square()).sqrt().matrix() / alpha;
  return r;
}

struct BreakdownReport {
  double alpha = 0.0;
  std::vector<double> z;
  std::vector<Vec> difference;  // T_n(h_{alpha,z}) - T_n((1 - alpha) g)
  std::vector<Vec> se;          // combined chain standard errors
  Vec limit;                    // T_n((1 - alpha) g)
  Vec limit_se;
  std::size_t scaled_n = 0;     // ceil(n sqrt(1 - alpha))
  Vec scaled;                   // T_{scaled_n}(g)
  Vec scaled_se;

  /// Largest |difference| / se over components at the last z.
  double terminal_ratio() const {
    require(!difference.empty(), ErrorCode::InvalidParam, "empty breakdown report");
    return (difference.back().array().abs() / se.back().array()).maxCoeff();
  }
  double scaling_ratio() const {
    return ((limit - scaled).array().abs() /
            (limit_se.array().square() + scaled_se.array().square()).sqrt())
        .maxCoeff();
  }
};

/// Runs T_n at each z of an increasing sequence and at the limit (1 - alpha) g,
/// every chain on its own seed, plus T_{ceil(n sqrt(1 - alpha))}(g).
template <ParametricModel M>
BreakdownReport breakdown_limit_check(const M& model, const ProductPrior& prior, double n,
                                      const AnalyticDensity& g, GFunction gfun, double alpha,
                                      const std::vector<double>& z_sequence, const Vec& theta_init,
                                      const InfluenceOptions& opt) {
  require(alpha >= 0.0 && alpha < 1.0, ErrorCode::InvalidLevel, "breakdown level must lie in [0, 1)");
  require(!z_sequence.empty() && std::is_sorted(z_sequence.begin(), z_sequence.end()),
          ErrorCode::InvalidParam, "z sequence must be nonempty and increasing");
  const auto run = [&](const AnalyticDensity& dens, double size, std::uint64_t idx) {
    ChainConfig cfg = opt.chain;
    cfg.seed = derive_seed(opt.chain.seed, idx);
    return posterior_functional(
        model, prior, size,
        analytic_disparity(model, gfun, dens, opt.estimator, opt.mc_samples,
                           derive_seed(opt.chain.seed, idx, 1)),
        theta_init, cfg);
  };
  BreakdownReport rep;
  rep.alpha = alpha;
  const auto lim = run(scaled_density(g, 1.0 - alpha), n, 0);
  rep.limit = lim.edap;
  rep.limit_se = lim.mc_se;
  for (std::size_t k = 0; k < z_sequence.size(); ++k) {
    const auto t = run(ContaminatedDensity(g, z_sequence[k], alpha, opt.width).density(), n, k + 1);
    rep.z.push_back(z_sequence[k]);
    rep.difference.push_back(t.edap - lim.edap);
    rep.se.push_back((t.mc_se.array().square() + lim.mc_se.array().square()).sqrt().matrix());
  }
  rep.scaled_n = static_cast<std::size_t>(std::ceil(n * std::sqrt(1.0 - alpha)));
  const auto sc = run(g, static_cast<double>(rep.scaled_n), z_sequence.size() + 1);
  rep.scaled = sc.edap;
  rep.scaled_se = sc.mc_se;
  return rep;
}

// ---------------------------------------------------------------------------
// EDAP versus MDE

struct GapPoint {
  std::size_t n = 0;
  Vec mde;
  Vec edap;        // control-variate estimate
  Vec edap_plain;  // raw chain average
  double gap = 0.0;  // max_i |edap_i - mde_i|
};

/// For each n: the MDE of D(g, f_theta) and the D-posterior mean at sample
/// size n (chain seeded from cfg.seed and n, proposal scaled by 1/sqrt(n)).
template <ParametricModel M>
std::vector<GapPoint> edap_mde_gap(const M& model, const ProductPrior& prior,
                                   const DisparityFn& disparity, const std::vector<std::size_t>& ns,
                                   const Vec& theta_init, const ChainConfig& cfg,
                                   const MdeOptions& mopt = {}) {
  const auto m = mde(model, disparity, theta_init, mopt);
  std::vector<GapPoint> out;
  for (std::size_t n : ns) {
    require(n > 0, ErrorCode::InvalidParam, "sample sizes must be positive");
    ChainConfig c = cfg;
    c.seed = derive_seed(cfg.seed, n);
    for (double& s : c.proposal_scales) s /= std::sqrt(static_cast<double>(n));
    const DPosterior<M> post(model, prior, static_cast<double>(n), disparity);
    const auto problem = post.problem(m.theta);
    const auto res = fit(problem, c);
    GapPoint p;
    p.n = n;
    p.mde = m.theta;
    p.edap_plain = res.summary.edap;
    p.edap = zero_variance_mean(problem, res.chain, res.summary);
    p.gap = (p.edap - p.mde).cwiseAbs().maxCoeff();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dpost
