#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpost/error.hpp"
#include "dpost/kde.hpp"
#include "dpost/quadrature.hpp"
#include "dpost/rng.hpp"
#include "dpost/stats.hpp"

namespace dpost {

enum class DisparityKind { KullbackLeibler, Hellinger, NegativeExponential };

inline std::string_view to_string(DisparityKind k) {
  switch (k) {
    case DisparityKind::KullbackLeibler: return "kl";
    case DisparityKind::Hellinger: return "hd";
    case DisparityKind::NegativeExponential: return "ned";
  }
  return "?";
}

inline DisparityKind parse_disparity_kind(std::string_view s) {
  if (s == "kl") return DisparityKind::KullbackLeibler;
  if (s == "hd") return DisparityKind::Hellinger;
  if (s == "ned") return DisparityKind::NegativeExponential;
  throw Error(ErrorCode::ParseError, "unknown disparity kind '" + std::string(s) + "'");
}

/// Convex G defining a disparity D(g, f) = int G(delta) f, delta = g/f - 1.
///
/// Centered forms (default) satisfy G(0) = G'(0) = 0, G''(0) = 1:
///   KL   (d+1) log(d+1) - d
///   HD   2 (sqrt(d+1) - 1)^2           (twice the squared Hellinger distance)
///   NED  exp(-d) - 1 + d
/// The uncentered forms differ by a multiple of d plus a constant:
///   (d+1) log(d+1),  2[(sqrt(d+1) - 1)^2 - 1],  exp(-d) - 1.
/// Arguments are clamped to [-1 + 1e-12, 1e12].
class GFunction {
 public:
  static constexpr double kDeltaMin = -1.0 + 1e-12;
  static constexpr double kDeltaMax = 1e12;

  explicit GFunction(DisparityKind kind, bool centered = true) : kind_(kind), centered_(centered) {}

  DisparityKind kind() const { return kind_; }
  bool centered() const { return centered_; }

  static double clamp(double delta) {
    if (std::isnan(delta)) return kDeltaMax;
    return std::clamp(delta, kDeltaMin, kDeltaMax);
  }

  double operator()(double delta) const {
    const double d = clamp(delta);
    switch (kind_) {
      case DisparityKind::KullbackLeibler: {
        const double v = (d + 1.0) * std::log1p(d);
        return centered_ ? v - d : v;
      }
      case DisparityKind::Hellinger: {
        const double s = std::sqrt(d + 1.0) - 1.0;
        return centered_ ? 2.0 * s * s : 2.0 * (s * s - 1.0);
      }
      case DisparityKind::NegativeExponential: {
        const double v = std::expm1(-d);
        return centered_ ? v + d : v;
      }
    }
    return 0.0;
  }

  double deriv1(double delta) const {
    const double d = clamp(delta);
    switch (kind_) {
      case DisparityKind::KullbackLeibler:
        return centered_ ? std::log1p(d) : std::log1p(d) + 1.0;
      case DisparityKind::Hellinger:
        return 2.0 * (1.0 - 1.0 / std::sqrt(d + 1.0));
      case DisparityKind::NegativeExponential:
        return centered_ ? -std::expm1(-d) : -std::exp(-d);
    }
    return 0.0;
  }

  double deriv2(double delta) const {
    const double d = clamp(delta);
    switch (kind_) {
      case DisparityKind::KullbackLeibler: return 1.0 / (d + 1.0);
      case DisparityKind::Hellinger: return std::pow(d + 1.0, -1.5);
      case DisparityKind::NegativeExponential: return std::exp(-d);
    }
    return 0.0;
  }

  /// G(delta) * f/g expressed through r = f/g, i.e. r G(1/r - 1). Stable as
  /// r -> 0 (f vanishing where g has mass). r is floored at the smallest
  /// normal double rather than at the delta clamp, so the KL term -log r keeps
  /// growing for far outliers.
  double weighted(double ratio) const {
    if (ratio >= 1.0) return ratio * (*this)(1.0 / ratio - 1.0);
    const double r = std::max(std::isnan(ratio) ? 0.0 : ratio, std::numeric_limits<double>::min());
    double centered_term = 0.0;
    switch (kind_) {
      case DisparityKind::KullbackLeibler:
        centered_term = -std::log(r) - 1.0 + r;
        return centered_ ? centered_term : centered_term + (1.0 - r);
      case DisparityKind::Hellinger: {
        const double s = 1.0 - std::sqrt(r);
        centered_term = 2.0 * s * s;
        return centered_ ? centered_term : centered_term - 2.0 * r;
      }
      case DisparityKind::NegativeExponential:
        centered_term = r * std::exp(1.0 - 1.0 / r) + 1.0 - 2.0 * r;
        return centered_ ? centered_term : centered_term - (1.0 - r);
    }
    return 0.0;
  }

  /// D(0, f) = G(-1) for every f.
  double at_minus_one() const { return (*this)(-1.0); }

 private:
  DisparityKind kind_;
  bool centered_;
};

/// A(delta) = G(delta) - (1 + delta) G'(delta), the residual adjustment
/// function of the estimating equation int A(delta) grad f = 0.
inline double curvature_weight(const GFunction& g, double delta) {
  const double d = GFunction::clamp(delta);
  return g(d) - (1.0 + d) * g.deriv1(d);
}

// ---------------------------------------------------------------------------

/// Importance-sampling estimate (1/N) sum G(delta(z_i)) f(z_i)/g(z_i) with
/// z_i drawn once from g and frozen. For centered Hellinger the specialised
/// form 4 - (4/N) sum sqrt(f/g) is used.
class MonteCarloDisparity {
 public:
  MonteCarloDisparity(GFunction g, std::vector<double> samples, std::vector<double> log_g)
      : g_(g), samples_(std::move(samples)), log_g_(std::move(log_g)) {
    require(!samples_.empty(), ErrorCode::InvalidParam, "Monte Carlo disparity needs samples");
    require(samples_.size() == log_g_.size(), ErrorCode::InvalidParam,
            "samples and log densities differ in length");
  }

  static MonteCarloDisparity from_kde(GFunction g, const KernelDensity& kde, std::size_t count,
                                      Rng& rng) {
    auto z = kde.sample(count, rng);
    std::vector<double> lg(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) lg[i] = kde.log_density(z[i]);
    return MonteCarloDisparity(g, std::move(z), std::move(lg));
  }

  const GFunction& gfunction() const { return g_; }
  std::span<const double> samples() const { return samples_; }
  std::span<const double> log_g() const { return log_g_; }

  /// `log_f(x)` is the model log-density. Returns +inf when f/g overflows.
  template <class LogF>
  double operator()(LogF&& log_f) const {
    const auto n = static_cast<Eigen::Index>(samples_.size());
    Eigen::ArrayXd lr(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      lr(i) = log_f(samples_[k]) - log_g_[k];
      if (std::isnan(lr(i)) || lr(i) > 700.0) return kInf;
    }
    if (g_.kind() == DisparityKind::Hellinger && g_.centered())
      return 4.0 - 4.0 * (0.5 * lr).exp().mean();
    const Eigen::ArrayXd r = lr.exp();
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += g_.weighted(r(i));
    return s / static_cast<double>(n);
  }

 private:
  GFunction g_;
  std::vector<double> samples_;
  std::vector<double> log_g_;
};

/// Gauss-Hermite estimate of D(g, phi_{mu,sigma}):
///   sum_i w_i G(g(xi_i)/f(xi_i) - 1),  xi_i = mu + sqrt(2) sigma x_i,  w_i = w_i^GH / sqrt(pi).
class GaussHermiteDisparity {
 public:
  explicit GaussHermiteDisparity(GFunction g, int points = 80) : g_(g), rule_(points) {
    require(points >= 10, ErrorCode::InvalidParam, "Gauss-Hermite disparity needs M >= 10");
  }

  const GFunction& gfunction() const { return g_; }
  const GaussHermiteRule& rule() const { return rule_; }

  /// D(g, N(mu, sigma^2)); `g` returns a density value.
  template <class Density>
  double operator()(const Density& g, double mu, double sigma) const {
    require(sigma > 0.0, ErrorCode::InvalidParam, "Gauss-Hermite disparity needs sigma > 0");
    const auto w = rule_.weights();
    std::vector<double> xi, q, gx;
    nodes(mu, sigma, xi, q);
    evaluate(g, xi, gx);
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += w[i] * g_(gx[i] / q[i] - 1.0);
    return s / std::sqrt(std::numbers::pi);
  }

  /// D(phi_{mu,sigma}, b) = int G(phi/b - 1) b, with the Gaussian in the data slot.
  template <class Density>
  double reversed(const Density& b, double mu, double sigma) const {
    require(sigma > 0.0, ErrorCode::InvalidParam, "Gauss-Hermite disparity needs sigma > 0");
    const auto w = rule_.weights();
    std::vector<double> xi, q, bx;
    nodes(mu, sigma, xi, q);
    evaluate(b, xi, bx);
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += w[i] * g_.weighted(bx[i] / q[i]);
    return s / std::sqrt(std::numbers::pi);
  }

 private:
  /// Nodes xi_i = mu + sqrt(2) sigma x_i and the normal density there.
  void nodes(double mu, double sigma, std::vector<double>& xi, std::vector<double>& q) const {
    const auto x = rule_.nodes();
    xi.resize(x.size());
    q.resize(x.size());
    const double norm = kInvSqrt2Pi / sigma;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xi[i] = mu + std::numbers::sqrt2 * sigma * x[i];
      q[i] = norm * std::exp(-x[i] * x[i]);
    }
  }

  template <class Density>
  static void evaluate(const Density& g, const std::vector<double>& xi, std::vector<double>& out) {
    out.resize(xi.size());
    if constexpr (requires { g.evaluate_many(std::span<const double>(xi), std::span<double>(out)); }) {
      g.evaluate_many(xi, out);
    } else {
      for (std::size_t i = 0; i < xi.size(); ++i) out[i] = g(xi[i]);
    }
  }

  GFunction g_;
  GaussHermiteRule rule_;
};

// ---------------------------------------------------------------------------

/// Adaptive-quadrature value of D(g, f) = int G(delta) f over the windows.
/// Throws NoConvergence when refinement exceeds the depth limit (40).
template <class Density, class LogF>
double disparity_exact_quadrature(const GFunction& gfun, const Density& g, const LogF& log_f,
                                  const IntegrationWindows& windows,
                                  const QuadratureOptions& opt = {}) {
  const auto integrand = [&](double x) {
    const double gx = g(x);
    const double fx = std::exp(log_f(x));
    if (fx >= gx) return fx > 0.0 ? fx * gfun(gx / fx - 1.0) : 0.0;
    return gx * gfun.weighted(fx / gx);
  };
  double total = 0.0;
  for (const auto& [a, b] : windows.pieces) total += integrate(integrand, a, b, opt).value;
  return total;
}

}  // namespace dpost
