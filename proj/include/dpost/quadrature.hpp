#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <utility>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dpost/error.hpp"

namespace dpost {

/// Gauss-Hermite rule for the weight exp(-x^2).
///
/// Nodes come from the Golub-Welsch eigenproblem on the symmetric Jacobi
/// matrix (zero diagonal, off-diagonal sqrt(k/2)). Each node is then polished
/// by Newton steps on the orthonormal Hermite recurrence, and the weight is
/// taken from the Christoffel formula 2 / p_M'(x)^2. The eigenvector route
/// only resolves weights to absolute precision (~1e-16), which loses the tail
/// weights (down to ~1e-60 at M = 80) that matter when the integrand grows
/// like exp(a x^2).
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int points) {
    require(points >= 1, ErrorCode::InvalidParam, "Gauss-Hermite rule needs at least one point");
    const auto m = static_cast<Eigen::Index>(points);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index k = 1; k < m; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k) / 2.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    nodes_.resize(static_cast<std::size_t>(points));
    weights_.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      double x = solver.eigenvalues()(i);
      double p = 0.0, dp = 0.0;
      for (int it = 0; it < 4; ++it) {
        orthonormal(points, x, p, dp);
        x -= p / dp;
      }
      orthonormal(points, x, p, dp);
      nodes_[static_cast<std::size_t>(i)] = x;
      weights_[static_cast<std::size_t>(i)] = 2.0 / (dp * dp);
    }
    // Symmetrize to remove the last bit of asymmetry from the eigensolver.
    for (int i = 0, j = points - 1; i < j; ++i, --j) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      const double x = 0.5 * (nodes_[b] - nodes_[a]);
      const double w = 0.5 * (weights_[a] + weights_[b]);
      nodes_[a] = -x;
      nodes_[b] = x;
      weights_[a] = weights_[b] = w;
    }
    if (points % 2 == 1) nodes_[static_cast<std::size_t>(points / 2)] = 0.0;
  }

  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

 private:
  // p = p_M(x), dp = p_M'(x) for the orthonormal Hermite polynomials.
  static void orthonormal(int m, double x, double& p, double& dp) {
    double p1 = std::pow(std::numbers::pi, -0.25);
    double p2 = 0.0;
    for (int j = 1; j <= m; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
    }
    p = p1;
    dp = std::sqrt(2.0 * m) * p2;
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_depth = 40;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& gauss) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  kronrod = fc * kWgk[7];
  gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[static_cast<std::size_t>(j)];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[static_cast<std::size_t>(j)] * s;
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * s;
  }
  kronrod *= h;
  gauss *= h;
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth, const QuadratureOptions& opt,
             QuadratureResult& acc) {
  double k = 0.0, g = 0.0;
  gk15(f, a, b, k, g);
  acc.evaluations += 15;
  const double err = std::abs(k - g);
  if (err <= std::max(tol, opt.rel_tol * std::abs(k)) || err <= 1e-15 * std::abs(k)) {
    acc.error += err;
    return k;
  }
  if (depth >= opt.max_depth) {
    throw Error(ErrorCode::NoConvergence, "adaptive quadrature exceeded depth " +
                                              std::to_string(opt.max_depth));
  }
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, tol / std::numbers::sqrt2, depth + 1, opt, acc) +
         adapt(f, m, b, tol / std::numbers::sqrt2, depth + 1, opt, acc);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7-15) integration over consecutive breakpoints.
/// `breakpoints` must be sorted; pass known discontinuities as breakpoints.
template <class F>
QuadratureResult integrate(const F& f, std::span<const double> breakpoints,
                           const QuadratureOptions& opt = {}) {
  require(breakpoints.size() >= 2, ErrorCode::InvalidParam, "integrate needs an interval");
  QuadratureResult acc;
  const auto pieces = static_cast<double>(breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b > a)) continue;
    acc.value += detail::adapt(f, a, b, opt.abs_tol / pieces, 0, opt, acc);
  }
  return acc;
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  const std::array<double, 2> bp{a, b};
  return integrate(f, std::span<const double>(bp), opt);
}

/// Integration range of one density: [lo, hi] bounds its mass, and the core
/// [core_lo, core_hi] gets forced breakpoints every `step`. The forced grid
/// keeps the first Gauss-Kronrod pass from stepping over a narrow bump
/// inside a wide window.
struct Window {
  double lo, hi;
  double core_lo, core_hi;
  double step;
};

inline Window gaussian_window(double mu, double sigma, double sds = 40.0) {
  return {mu - sds * sigma, mu + sds * sigma, mu - 10.0 * sigma, mu + 10.0 * sigma, sigma};
}

/// Union of windows as disjoint sorted pieces; gaps between disjoint windows
/// are skipped (all densities are negligible there).
struct IntegrationWindows {
  std::vector<std::pair<double, double>> pieces;

  static IntegrationWindows merge(std::vector<Window> windows, std::span<const double> cuts = {}) {
    require(!windows.empty(), ErrorCode::InvalidParam, "no integration windows");
    std::sort(windows.begin(), windows.end(),
              [](const Window& a, const Window& b) { return a.lo < b.lo; });
    std::vector<std::pair<double, double>> spans;
    for (const auto& w : windows) {
      require(w.hi > w.lo && w.step > 0.0, ErrorCode::InvalidParam, "empty integration window");
      if (!spans.empty() && w.lo <= spans.back().second)
        spans.back().second = std::max(spans.back().second, w.hi);
      else
        spans.emplace_back(w.lo, w.hi);
    }
    std::vector<double> pts(cuts.begin(), cuts.end());
    for (const auto& w : windows) {
      const double width = w.core_hi - w.core_lo;
      const double step = std::max(w.step, width / 4000.0);
      for (double x = w.core_lo; x <= w.core_hi; x += step) pts.push_back(x);
    }
    std::sort(pts.begin(), pts.end());
    IntegrationWindows out;
    for (const auto& [a, b] : spans) {
      double left = a;
      for (double c : pts) {
        if (c <= left || c >= b) continue;
        out.pieces.emplace_back(left, c);
        left = c;
      }
      out.pieces.emplace_back(left, b);
    }
    return out;
  }
};

}  // namespace dpost
