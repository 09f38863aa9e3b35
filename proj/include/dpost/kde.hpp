#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpost/error.hpp"
#include "dpost/quadrature.hpp"
#include "dpost/rng.hpp"
#include "dpost/stats.hpp"

namespace dpost {

/// Weighted Gaussian-kernel density estimate
///   g(x) = sum_i w_i K((x - X_i) / c) / c.
/// Immutable after construction.
class KernelDensity {
 public:
  KernelDensity(std::vector<double> points, double bandwidth)
      : points_(std::move(points)), bandwidth_(bandwidth) {
    validate();
  }

  KernelDensity(std::vector<double> points, std::vector<double> weights, double bandwidth)
      : points_(std::move(points)), weights_(std::move(weights)), bandwidth_(bandwidth) {
    require(weights_.size() == points_.size(), ErrorCode::InvalidParam,
            "KDE weights must match points");
    double total = 0.0;
    for (double w : weights_) {
      require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidParam, "KDE weights must be >= 0");
      total += w;
    }
    require(total > 0.0, ErrorCode::InvalidParam, "KDE weights sum to zero");
    for (double& w : weights_) w /= total;
    validate();
  }

  double bandwidth() const { return bandwidth_; }
  std::size_t size() const { return points_.size(); }
  std::span<const double> points() const { return points_; }
  bool uniform() const { return weights_.empty(); }
  double weight(std::size_t i) const {
    return weights_.empty() ? 1.0 / static_cast<double>(points_.size()) : weights_[i];
  }

  double operator()(double x) const { return evaluate(x); }

  double evaluate(double x) const {
    const double inv_c = 1.0 / bandwidth_;
    double s = 0.0;
    if (weights_.empty()) {
      for (double p : points_) {
        const double u = (x - p) * inv_c;
        s += std::exp(-0.5 * u * u);
      }
      s /= static_cast<double>(points_.size());
    } else {
      for (std::size_t i = 0; i < points_.size(); ++i) {
        const double u = (x - points_[i]) * inv_c;
        s += weights_[i] * std::exp(-0.5 * u * u);
      }
    }
    return s * kInvSqrt2Pi * inv_c;
  }

  /// evaluate() at many points; kernel exponentials are vectorized across `xs`.
  void evaluate_many(std::span<const double> xs, std::span<double> out) const {
    require(out.size() == xs.size(), ErrorCode::InvalidParam, "output size mismatch");
    const auto m = static_cast<Eigen::Index>(xs.size());
    const Eigen::Map<const Eigen::ArrayXd> x(xs.data(), m);
    Eigen::Map<Eigen::ArrayXd> acc(out.data(), m);
    acc.setZero();
    const double inv_c = 1.0 / bandwidth_;
    Eigen::ArrayXd arg(m);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double w = weights_.empty() ? 1.0 : weights_[i];
      if (w == 0.0) continue;
      // Terms below e^-700 are dropped: denormal exponentials are very slow.
      arg = -0.5 * ((x - points_[i]) * inv_c).square() + std::log(w);
      acc += (arg < -700.0).select(0.0, arg.max(-700.0).exp());
    }
    acc *= (weights_.empty() ? 1.0 / static_cast<double>(points_.size()) : 1.0) * kInvSqrt2Pi * inv_c;
  }

  /// log g(x), accurate far into the tails where evaluate() underflows.
  double log_density(double x) const {
    const double direct = evaluate(x);
    if (direct > 1e-280) return std::log(direct);
    const double inv_c = 1.0 / bandwidth_;
    double m = -kInf;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double u = (x - points_[i]) * inv_c;
      m = std::max(m, -0.5 * u * u + std::log(weight(i)));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double u = (x - points_[i]) * inv_c;
      s += std::exp(-0.5 * u * u + std::log(weight(i)) - m);
    }
    return m + std::log(s) - kLogSqrt2Pi - std::log(bandwidth_);
  }

  /// Draws z = c W + X_N with W ~ N(0,1) and N drawn from the kernel weights.
  std::vector<double> sample(std::size_t count, Rng& rng) const {
    std::vector<double> out(count);
    std::normal_distribution<double> n01(0.0, 1.0);
    if (weights_.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
      for (auto& z : out) {
        const std::size_t i = pick(rng);
        z = bandwidth_ * n01(rng) + points_[i];
      }
    } else {
      std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
      for (auto& z : out) {
        const std::size_t i = pick(rng);
        z = bandwidth_ * n01(rng) + points_[i];
      }
    }
    return out;
  }

  std::vector<double> sample(std::size_t count, std::uint64_t seed) const {
    Rng rng(seed);
    return sample(count, rng);
  }

  /// Integration window: mass within `sds` bandwidths of the outermost points.
  Window window(double sds = 40.0) const {
    const auto [lo, hi] = std::minmax_element(points_.begin(), points_.end());
    return {*lo - sds * bandwidth_, *hi + sds * bandwidth_, *lo - 10.0 * bandwidth_,
            *hi + 10.0 * bandwidth_, bandwidth_};
  }

 private:
  void validate() const {
    require(!points_.empty(), ErrorCode::InsufficientData, "KDE needs at least one point");
    require(bandwidth_ > 0.0 && std::isfinite(bandwidth_), ErrorCode::InvalidParam,
            "KDE bandwidth must be positive");
  }

  std::vector<double> points_;
  std::vector<double> weights_;  // empty means uniform 1/n
  double bandwidth_;
};

// ---------------------------------------------------------------------------
// Bandwidth selection

enum class BandwidthSelector { SheatherJones, Silverman };

struct BandwidthResult {
  double value = 0.0;
  bool fell_back = false;  // Sheather-Jones found no root; Silverman used instead
};

namespace detail {

inline void check_not_constant(std::span<const double> data) {
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  require(*hi > *lo, ErrorCode::DegenerateData, "all data points are equal");
}

inline double robust_scale(std::span<const double> data) {
  const double sd = stddev(data);
  const double q = iqr(data) / 1.349;
  return q > 0.0 ? std::min(sd, q) : sd;
}

// Kernel estimates of the density functionals int f''^2 (phi4) and
// int f'''^2 (phi6, returned with the sign of -int f''' f''') used by the
// Sheather-Jones plug-in. Exact pairwise sums.
inline double sj_phi4(std::span<const double> x, double h) {
  const std::size_t n = x.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (x[i] - x[j]) / h;
      const double d2 = d * d;
      if (d2 > 1000.0) continue;
      sum += std::exp(-0.5 * d2) * (d2 * d2 - 6.0 * d2 + 3.0);
    }
  }
  const double nn = static_cast<double>(n);
  sum = 2.0 * sum + 3.0 * nn;
  return sum / (nn * (nn - 1.0) * std::pow(h, 5) * std::sqrt(2.0 * std::numbers::pi));
}

inline double sj_phi6(std::span<const double> x, double h) {
  const std::size_t n = x.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (x[i] - x[j]) / h;
      const double d2 = d * d;
      if (d2 > 1000.0) continue;
      sum += std::exp(-0.5 * d2) * (d2 * d2 * d2 - 15.0 * d2 * d2 + 45.0 * d2 - 15.0);
    }
  }
  const double nn = static_cast<double>(n);
  sum = 2.0 * sum - 15.0 * nn;
  return sum / (nn * (nn - 1.0) * std::pow(h, 7) * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace detail

/// Silverman's rule of thumb: 0.9 min(SD, IQR/1.34) n^{-1/5}.
inline double bandwidth_silverman(std::span<const double> data) {
  require(data.size() >= 2, ErrorCode::InsufficientData, "Silverman bandwidth needs n >= 2");
  detail::check_not_constant(data);
  const double sd = stddev(data);
  const double q = iqr(data) / 1.34;
  const double scale = q > 0.0 ? std::min(sd, q) : sd;
  return 0.9 * scale * std::pow(static_cast<double>(data.size()), -0.2);
}

/// Sheather-Jones solve-the-equation bandwidth. The fixed-point relation
///   h = (R(K) / (n phi4(alpha2(h))))^{1/5},  alpha2(h) = 1.357 (phi4(a)/phi6(b))^{1/7} h^{5/7}
/// is solved by bisection on [1e-4 range, range]. Falls back to Silverman
/// (flagged) when the pilot functional is non-positive or there is no sign change.
inline BandwidthResult bandwidth_sheather_jones(std::span<const double> data) {
  require(data.size() >= 5, ErrorCode::InsufficientData, "Sheather-Jones needs n >= 5");
  detail::check_not_constant(data);
  const double n = static_cast<double>(data.size());
  const auto fallback = [&] { return BandwidthResult{bandwidth_silverman(data), true}; };

  const double scale = detail::robust_scale(data);
  const double a = 1.24 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(n, -1.0 / 9.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * n);
  const double td = -detail::sj_phi6(data, b);
  if (!std::isfinite(td) || td <= 0.0) return fallback();
  const double alpha2 = 1.357 * std::pow(detail::sj_phi4(data, a) / td, 1.0 / 7.0);
  if (!std::isfinite(alpha2)) return fallback();

  const auto fixed_point = [&](double h) {
    const double sd = detail::sj_phi4(data, alpha2 * std::pow(h, 5.0 / 7.0));
    if (!(sd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(c1 / sd, 0.2) - h;
  };

  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  const double range = *mx - *mn;
  double lo = 1e-4 * range, hi = range;
  double flo = fixed_point(lo), fhi = fixed_point(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0) return fallback();
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fixed_point(mid);
    if (!std::isfinite(fm)) return fallback();
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), false};
}

inline double select_bandwidth(std::span<const double> data, BandwidthSelector selector) {
  if (selector == BandwidthSelector::Silverman || data.size() < 5) return bandwidth_silverman(data);
  return bandwidth_sheather_jones(data).value;
}

// ---------------------------------------------------------------------------
// Conditional and residual estimators

/// Nadaraya-Watson weighted KDE in y:
///   g(y|x) = sum_i K((y-Y_i)/c1) K(|x-X_i|/c2) / (c1 sum_i K(|x-X_i|/c2)).
/// Covariate distance is Euclidean.
class ConditionalKernelDensity {
 public:
  ConditionalKernelDensity(std::vector<double> responses, Eigen::MatrixXd covariates,
                           double bandwidth_y, double bandwidth_x)
      : responses_(std::move(responses)),
        covariates_(std::move(covariates)),
        bandwidth_y_(bandwidth_y),
        bandwidth_x_(bandwidth_x) {
    require(!responses_.empty(), ErrorCode::InsufficientData, "conditional KDE needs data");
    require(static_cast<Eigen::Index>(responses_.size()) == covariates_.rows(),
            ErrorCode::InvalidParam, "responses and covariate rows differ");
    require(bandwidth_y_ > 0.0 && bandwidth_x_ > 0.0, ErrorCode::InvalidParam,
            "conditional KDE bandwidths must be positive");
  }

  double bandwidth_y() const { return bandwidth_y_; }
  double bandwidth_x() const { return bandwidth_x_; }
  std::size_t size() const { return responses_.size(); }
  std::span<const double> responses() const { return responses_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }

  /// The conditional law at x as a weighted KDE. Kernel products are formed
  /// in log space; weights below exp(-700) relative to the largest are floored.
  KernelDensity at(const Eigen::VectorXd& x) const {
    const std::size_t n = responses_.size();
    std::vector<double> logk(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (x - covariates_.row(static_cast<Eigen::Index>(i)).transpose()).norm() /
                       bandwidth_x_;
      logk[i] = -0.5 * u * u;
    }
    const double lse = log_sum_exp(logk);
    // Denominator (1/(n c2)) sum_i K(.) in log form.
    const double log_den = lse - kLogSqrt2Pi - std::log(static_cast<double>(n) * bandwidth_x_);
    if (!(log_den > std::log(1e-300))) {
      throw Error(ErrorCode::DegenerateConditioning,
                  "kernel denominator below 1e-300: query outside covariate support");
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lw = logk[i] - lse;
      w[i] = lw < -700.0 ? 0.0 : std::exp(lw);
    }
    return KernelDensity(responses_, std::move(w), bandwidth_y_);
  }

  double evaluate(double y, const Eigen::VectorXd& x) const { return at(x)(y); }

 private:
  std::vector<double> responses_;
  Eigen::MatrixXd covariates_;
  double bandwidth_y_;
  double bandwidth_x_;
};

/// Bandwidths for the conditional estimator: the 1-D selector applied to the
/// responses (c1) and to the covariate norms (c2).
inline std::pair<double, double> conditional_bandwidths(std::span<const double> responses,
                                                        const Eigen::MatrixXd& covariates,
                                                        BandwidthSelector selector) {
  std::vector<double> norms(static_cast<std::size_t>(covariates.rows()));
  for (Eigen::Index i = 0; i < covariates.rows(); ++i)
    norms[static_cast<std::size_t>(i)] = covariates.row(i).norm();
  return {select_bandwidth(responses, selector), select_bandwidth(norms, selector)};
}

/// KDE of standardized residuals e_i(theta)/scale; rebuilt for every theta.
class ResidualDensity {
 public:
  using ResidualFn = std::function<double(const Eigen::VectorXd&, std::size_t)>;

  ResidualDensity(ResidualFn residual, std::size_t count, double scale, double bandwidth)
      : residual_(std::move(residual)), count_(count), scale_(scale), bandwidth_(bandwidth) {
    require(count_ >= 1, ErrorCode::InsufficientData, "residual density needs data");
    require(scale_ > 0.0, ErrorCode::InvalidParam, "residual scale must be positive");
    require(bandwidth_ > 0.0, ErrorCode::InvalidParam, "residual bandwidth must be positive");
  }

  KernelDensity at(const Eigen::VectorXd& theta) const { return at(theta, scale_); }

  KernelDensity at(const Eigen::VectorXd& theta, double scale) const {
    std::vector<double> pts(count_);
    for (std::size_t i = 0; i < count_; ++i) pts[i] = residual_(theta, i) / scale;
    return KernelDensity(std::move(pts), bandwidth_);
  }

  std::size_t size() const { return count_; }
  double scale() const { return scale_; }
  double bandwidth() const { return bandwidth_; }

 private:
  ResidualFn residual_;
  std::size_t count_;
  double scale_;
  double bandwidth_;
};

}  // namespace dpost
