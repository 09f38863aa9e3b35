#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dpost/error.hpp"
#include "dpost/stats.hpp"

namespace dpost {

struct NelderMeadOptions {
  double tolerance = 1e-8;   // spread of simplex objective values
  std::size_t max_iterations = 2000;
  double initial_step = 0.1;  // per-coordinate, relative to max(1, |x_i|)
  std::size_t restarts = 1;   // re-seed the simplex at the optimum to dodge premature collapse
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = kInf;
  std::size_t iterations = 0;
};

/// Derivative-free minimization. Non-finite objective values are treated as +inf.
/// Throws NoConvergence when the iteration cap is hit before the simplex values
/// agree to `tolerance`.
inline OptimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                  Eigen::VectorXd x0, const NelderMeadOptions& opt = {}) {
  const auto d = x0.size();
  require(d >= 1, ErrorCode::InvalidParam, "Nelder-Mead needs at least one coordinate");
  const auto eval = [&](const Eigen::VectorXd& x) {
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };

  OptimizeResult res;
  res.x = std::move(x0);
  for (std::size_t round = 0; round <= opt.restarts; ++round) {
    std::vector<Eigen::VectorXd> s(static_cast<std::size_t>(d) + 1, res.x);
    std::vector<double> fv(s.size());
    for (Eigen::Index i = 0; i < d; ++i)
      s[static_cast<std::size_t>(i) + 1](i) += opt.initial_step * std::max(1.0, std::abs(res.x(i)));
    for (std::size_t i = 0; i < s.size(); ++i) fv[i] = eval(s[i]);
    require(std::isfinite(*std::min_element(fv.begin(), fv.end())), ErrorCode::InvalidParam,
            "Nelder-Mead: objective is not finite on the initial simplex");

    std::vector<std::size_t> order(s.size());
    bool converged = false;
    for (std::size_t it = 0; it < opt.max_iterations; ++it, ++res.iterations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
      if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= opt.tolerance) {
        converged = true;
        break;
      }
      Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (i != worst) c += s[i];
      c /= static_cast<double>(d);

      const Eigen::VectorXd xr = c + (c - s[worst]);
      const double fr = eval(xr);
      if (fr < fv[best]) {
        const Eigen::VectorXd xe = c + 2.0 * (c - s[worst]);
        const double fe = eval(xe);
        if (fe < fr) s[worst] = xe, fv[worst] = fe;
        else s[worst] = xr, fv[worst] = fr;
        continue;
      }
      if (fr < fv[second]) {
        s[worst] = xr, fv[worst] = fr;
        continue;
      }
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c))
                                         : Eigen::VectorXd(c + 0.5 * (s[worst] - c));
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        s[worst] = xc, fv[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == best) continue;
        s[i] = s[best] + 0.5 * (s[i] - s[best]);
        fv[i] = eval(s[i]);
      }
    }
    const auto b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = s[b];
    res.value = fv[b];
    if (!converged)
      throw Error(ErrorCode::NoConvergence, "Nelder-Mead did not converge within the iteration cap");
  }
  return res;
}

}  // namespace dpost
