#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "dpost/error.hpp"
#include "dpost/quadrature.hpp"
#include "dpost/rng.hpp"
#include "dpost/stats.hpp"

namespace dpost {

using Vec = Eigen::VectorXd;

struct GaussianStructure {
  double mean = 0.0;
  double sd = 1.0;
};

/// A parametric family f_theta with a bijection between the unconstrained
/// sampler space (u) and the constrained parameter space (theta).
template <class M>
concept ParametricModel = requires(const M& m, const Vec& v, double x) {
  { m.dim() } -> std::convertible_to<std::size_t>;
  { m.log_density(v, x) } -> std::convertible_to<double>;
  { m.to_constrained(v) } -> std::convertible_to<Vec>;
  { m.to_unconstrained(v) } -> std::convertible_to<Vec>;
  { m.log_jacobian(v) } -> std::convertible_to<double>;
  { m.gaussian(v) } -> std::convertible_to<std::optional<GaussianStructure>>;
  { m.window(v) } -> std::convertible_to<Window>;
  { m.names() } -> std::convertible_to<std::vector<std::string>>;
};

/// N(mu, sigma^2) with sigma known; theta = (mu).
class NormalMean {
 public:
  explicit NormalMean(double sigma = 1.0) : sigma_(sigma), log_norm_(kLogSqrt2Pi + std::log(sigma)) {
    require(sigma > 0.0, ErrorCode::InvalidParam, "NormalMean sigma must be positive");
  }
  double sigma() const { return sigma_; }
  std::size_t dim() const { return 1; }
  std::vector<std::string> names() const { return {"mu"}; }

  double log_density(const Vec& th, double x) const {
    const double u = (x - th(0)) / sigma_;
    return -0.5 * u * u - log_norm_;
  }
  Vec to_constrained(const Vec& u) const { return u; }
  Vec to_unconstrained(const Vec& th) const { return th; }
  double log_jacobian(const Vec&) const { return 0.0; }
  std::optional<GaussianStructure> gaussian(const Vec& th) const {
    return GaussianStructure{th(0), sigma_};
  }
  Window window(const Vec& th) const { return gaussian_window(th(0), sigma_); }

 private:
  double sigma_;
  double log_norm_;
};

/// N(mu, sigma^2); theta = (mu, sigma), u = (mu, log sigma).
class NormalLocationScale {
 public:
  std::size_t dim() const { return 2; }
  std::vector<std::string> names() const { return {"mu", "sigma"}; }

  double log_density(const Vec& th, double x) const {
    require(th(1) > 0.0, ErrorCode::InvalidParam, "sigma must be positive");
    return normal_logpdf(x, th(0), th(1));
  }
  Vec to_constrained(const Vec& u) const { return Vec{{u(0), std::exp(u(1))}}; }
  Vec to_unconstrained(const Vec& th) const {
    require(th(1) > 0.0, ErrorCode::InvalidParam, "sigma must be positive");
    return Vec{{th(0), std::log(th(1))}};
  }
  double log_jacobian(const Vec& u) const { return u(1); }
  std::optional<GaussianStructure> gaussian(const Vec& th) const {
    return GaussianStructure{th(0), th(1)};
  }
  Window window(const Vec& th) const { return gaussian_window(th(0), th(1)); }
};

/// X = log W with W ~ Gamma(shape k, scale s):
///   log f(x) = k x - e^x / s - lgamma(k) - k log s.
/// theta = (k, s), u = (log k, log s).
class ExpGamma {
 public:
  std::size_t dim() const { return 2; }
  std::vector<std::string> names() const { return {"shape", "scale"}; }

  double log_density(const Vec& th, double x) const {
    require(th(0) > 0.0 && th(1) > 0.0, ErrorCode::InvalidParam,
            "exp-Gamma shape and scale must be positive");
    return th(0) * x - std::exp(x) / th(1) - std::lgamma(th(0)) - th(0) * std::log(th(1));
  }
  Vec to_constrained(const Vec& u) const { return u.array().exp().matrix(); }
  Vec to_unconstrained(const Vec& th) const {
    require(th(0) > 0.0 && th(1) > 0.0, ErrorCode::InvalidParam,
            "exp-Gamma shape and scale must be positive");
    return th.array().log().matrix();
  }
  double log_jacobian(const Vec& u) const { return u(0) + u(1); }
  std::optional<GaussianStructure> gaussian(const Vec&) const { return std::nullopt; }
  Window window(const Vec& th) const {
    const double m = boost::math::digamma(th(0)) + std::log(th(1));
    const double sd = std::sqrt(boost::math::trigamma(th(0)));
    // Right tail decays doubly exponentially; the left one like e^{k x}.
    return {m - std::max(40.0 * sd, 750.0 / th(0)), m + 12.0 * sd + 5.0, m - 10.0 * sd,
            m + 6.0 * sd, sd};
  }

  Vec moments(const Vec& th) const {
    return Vec{{boost::math::digamma(th(0)) + std::log(th(1)),
                boost::math::trigamma(th(0))}};
  }
};

// ---------------------------------------------------------------------------
// Priors

/// Proper univariate prior with a finite first moment.
class UnivariatePrior {
 public:
  enum class Kind { Normal, Gamma, InverseGamma };

  /// N(mean, variance).
  static UnivariatePrior normal(double mean, double variance) {
    require(variance > 0.0, ErrorCode::InvalidParam, "normal prior variance must be positive");
    return {Kind::Normal, mean, variance};
  }
  /// Gamma(shape, scale), density x^{a-1} e^{-x/b} / (Gamma(a) b^a).
  static UnivariatePrior gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, ErrorCode::InvalidParam, "gamma prior needs a, b > 0");
    return {Kind::Gamma, shape, scale};
  }
  static UnivariatePrior chi_square(double df) { return gamma(0.5 * df, 2.0); }
  /// Inverse-Gamma(shape, scale), density b^a / Gamma(a) x^{-a-1} e^{-b/x}.
  static UnivariatePrior inverse_gamma(double shape, double scale) {
    require(shape > 1.0 && scale > 0.0, ErrorCode::InvalidParam,
            "inverse-gamma prior needs shape > 1 (finite mean) and scale > 0");
    return {Kind::InverseGamma, shape, scale};
  }

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double log_density(double x) const {
    switch (kind_) {
      case Kind::Normal: return normal_logpdf(x, a_, std::sqrt(b_));
      case Kind::Gamma:
        if (!(x > 0.0)) return -kInf;
        return (a_ - 1.0) * std::log(x) - x / b_ - std::lgamma(a_) - a_ * std::log(b_);
      case Kind::InverseGamma:
        if (!(x > 0.0)) return -kInf;
        return a_ * std::log(b_) - std::lgamma(a_) - (a_ + 1.0) * std::log(x) - b_ / x;
    }
    return -kInf;
  }

  double mean() const {
    switch (kind_) {
      case Kind::Normal: return a_;
      case Kind::Gamma: return a_ * b_;
      case Kind::InverseGamma: return b_ / (a_ - 1.0);
    }
    return 0.0;
  }

  double sample(Rng& rng) const {
    switch (kind_) {
      case Kind::Normal: return a_ + std::sqrt(b_) * standard_normal(rng);
      case Kind::Gamma: return std::gamma_distribution<double>(a_, b_)(rng);
      case Kind::InverseGamma: return 1.0 / std::gamma_distribution<double>(a_, 1.0 / b_)(rng);
    }
    return 0.0;
  }

 private:
  UnivariatePrior(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}
  Kind kind_;
  double a_, b_;
};

/// Independent product of univariate priors on the constrained components.
class ProductPrior {
 public:
  ProductPrior() = default;
  explicit ProductPrior(std::vector<UnivariatePrior> parts) : parts_(std::move(parts)) {}

  std::size_t dim() const { return parts_.size(); }
  const UnivariatePrior& operator[](std::size_t i) const { return parts_[i]; }

  double log_density(const Vec& th) const {
    require(static_cast<std::size_t>(th.size()) == parts_.size(), ErrorCode::InvalidParam,
            "prior dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i)
      s += parts_[i].log_density(th(static_cast<Eigen::Index>(i)));
    return s;
  }

  Vec mean() const {
    Vec m(static_cast<Eigen::Index>(parts_.size()));
    for (std::size_t i = 0; i < parts_.size(); ++i)
      m(static_cast<Eigen::Index>(i)) = parts_[i].mean();
    return m;
  }

  Vec sample(Rng& rng) const {
    Vec v(static_cast<Eigen::Index>(parts_.size()));
    for (std::size_t i = 0; i < parts_.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = parts_[i].sample(rng);
    return v;
  }

 private:
  std::vector<UnivariatePrior> parts_;
};

}  // namespace dpost
