#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpost/error.hpp"
#include "dpost/models.hpp"
#include "dpost/rng.hpp"
#include "dpost/stats.hpp"

namespace dpost {

using LogTarget = std::function<double(const Vec&)>;

struct ChainConfig {
  std::size_t steps = 10000;
  std::vector<double> proposal_scales;  // one per coordinate, or a single shared value
  std::uint64_t seed = 0;
  double burn_in_fraction = 0.5;
  std::size_t thinning = 1;
  std::size_t pilot_steps = 0;  // >0 enables the pre-run scale tuning phase

  void validate(std::size_t dim) const {
    require(burn_in_fraction > 0.0 && burn_in_fraction < 1.0, ErrorCode::InvalidParam,
            "burn-in fraction must lie in (0, 1)");
    require(static_cast<double>(steps) >= 2.0 / burn_in_fraction, ErrorCode::InvalidParam,
            "too few steps for the burn-in fraction");
    require(thinning >= 1, ErrorCode::InvalidParam, "thinning must be >= 1");
    require(proposal_scales.size() == dim || proposal_scales.size() == 1, ErrorCode::InvalidParam,
            "proposal scale count must match dimension");
    for (double s : proposal_scales)
      require(s > 0.0 && std::isfinite(s), ErrorCode::InvalidParam,
              "proposal scales must be finite and positive");
  }

  Vec scales(std::size_t dim) const {
    Vec s(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
      s(static_cast<Eigen::Index>(i)) = proposal_scales.size() == 1 ? proposal_scales[0]
                                                                      : proposal_scales[i];
    return s;
  }
};

struct Chain {
  std::vector<Vec> states;  // unconstrained, one per step
  std::vector<double> log_targets;
  std::vector<std::uint8_t> accepted;
  std::size_t accepted_count = 0;
  double acceptance_rate = 0.0;
  bool stuck = false;  // acceptance below 0.01
  Vec scales;          // proposal scales actually used (after any pilot tuning)

  std::size_t size() const { return states.size(); }
};

namespace detail {

inline void metropolis_steps(const LogTarget& target, Vec& x, double& lx, const Vec& scales,
                             std::size_t steps, Rng& rng, Chain* out, std::size_t& accepted) {
  const auto dim = x.size();
  Vec y(dim);
  for (std::size_t t = 0; t < steps; ++t) {
    for (Eigen::Index i = 0; i < dim; ++i) y(i) = x(i) + scales(i) * standard_normal(rng);
    const double ly = target(y);
    const double log_u = std::log(uniform01(rng));
    const bool acc = std::isfinite(ly) && log_u < ly - lx;
    if (acc) {
      x = y;
      lx = ly;
      ++accepted;
    }
    if (out) {
      out->states.push_back(x);
      out->log_targets.push_back(lx);
      out->accepted.push_back(acc ? 1 : 0);
    }
  }
}

}  // namespace detail

/// Random-walk Metropolis with independent Gaussian proposals.
/// With `pilot_steps > 0`, scales are first tuned in blocks of 100 steps
/// toward acceptance in [0.2, 0.5] and then frozen; the measured chain
/// starts where the pilot ended.
inline Chain run_metropolis(const LogTarget& target, Vec init, const ChainConfig& cfg) {
  const auto dim = static_cast<std::size_t>(init.size());
  cfg.validate(dim);
  double lx = target(init);
  if (!(lx > -kInf) || std::isnan(lx))
    throw Error(ErrorCode::InitInvalid, "log target at the initial state is not finite");

  Vec scales = cfg.scales(dim);
  if (cfg.pilot_steps > 0) {
    Rng pilot_rng(derive_seed(cfg.seed, 0x9110));
    constexpr std::size_t block = 100;
    for (std::size_t done = 0; done < cfg.pilot_steps; done += block) {
      std::size_t acc = 0;
      detail::metropolis_steps(target, init, lx, scales, block, pilot_rng, nullptr, acc);
      const double rate = static_cast<double>(acc) / block;
      if (rate < 0.2) scales *= rate < 0.05 ? 0.5 : 0.75;
      else if (rate > 0.5) scales *= rate > 0.8 ? 2.0 : 1.35;
    }
  }

  Chain chain;
  chain.scales = scales;
  chain.states.reserve(cfg.steps);
  chain.log_targets.reserve(cfg.steps);
  chain.accepted.reserve(cfg.steps);
  Rng rng(cfg.seed);
  detail::metropolis_steps(target, init, lx, scales, cfg.steps, rng, &chain, chain.accepted_count);
  chain.acceptance_rate = static_cast<double>(chain.accepted_count) / static_cast<double>(cfg.steps);
  chain.stuck = chain.acceptance_rate < 0.01;
  return chain;
}

// ---------------------------------------------------------------------------

struct PosteriorSummary {
  Vec edap;    // posterior mean of constrained draws
  Vec mdap;    // constrained state with the largest constrained-space density
  Vec sd;
  Vec lower;   // central interval bounds
  Vec upper;
  Vec mc_se;   // batch-means standard error of edap
  double level = 0.95;
  double acceptance_rate = 0.0;
  bool stuck = false;
  std::vector<Vec> draws;            // kept constrained draws
  std::vector<std::size_t> kept;     // chain indices of the kept draws

  std::size_t dim() const { return static_cast<std::size_t>(edap.size()); }
  bool covers(std::size_t i, double value) const {
    const auto k = static_cast<Eigen::Index>(i);
    return lower(k) <= value && value <= upper(k);
  }
  double length(std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(i);
    return upper(k) - lower(k);
  }
};

/// Batch-means Monte Carlo standard error of the mean of `xs`.
inline double batch_means_se(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return kInf;
  const auto b = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  const std::size_t len = n / b;
  std::vector<double> means(b);
  for (std::size_t k = 0; k < b; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += xs[k * len + j];
    means[k] = s / static_cast<double>(len);
  }
  return std::sqrt(variance(means) / static_cast<double>(b));
}

/// EDAP, MDAP and central credible intervals from the thinned post-burn-in
/// part of a chain. `to_constrained(u)` maps sampler states; `log_jacobian(u)`
/// is removed from the stored log target when locating the MDAP.
template <class ToConstrained, class LogJacobian>
PosteriorSummary summarize(const Chain& chain, const ChainConfig& cfg,
                           ToConstrained&& to_constrained, LogJacobian&& log_jacobian,
                           double level = 0.95) {
  require(level > 0.0 && level < 1.0, ErrorCode::InvalidLevel, "credible level must be in (0,1)");
  const std::size_t total = chain.size();
  const auto start = static_cast<std::size_t>(std::floor(cfg.burn_in_fraction * static_cast<double>(total)));
  const std::size_t thin = std::max<std::size_t>(cfg.thinning, 1);
  PosteriorSummary s;
  s.level = level;
  s.acceptance_rate = chain.acceptance_rate;
  s.stuck = chain.stuck;
  for (std::size_t t = start + thin - 1; t < total; t += thin) {
    s.kept.push_back(t);
    s.draws.push_back(to_constrained(chain.states[t]));
  }
  if (s.draws.empty()) throw Error(ErrorCode::EmptyChain, "no draws after burn-in and thinning");

  const auto dim = s.draws.front().size();
  s.edap = Vec::Zero(dim);
  s.sd = s.lower = s.upper = s.mc_se = Vec::Zero(dim);
  std::vector<double> col(s.draws.size());
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < s.draws.size(); ++k) col[k] = s.draws[k](i);
    s.edap(i) = mean(col);
    s.sd(i) = col.size() > 1 ? stddev(col) : 0.0;
    s.mc_se(i) = batch_means_se(col);
    std::sort(col.begin(), col.end());
    s.lower(i) = quantile_sorted(col, 0.5 * (1.0 - level));
    s.upper(i) = quantile_sorted(col, 0.5 * (1.0 + level));
  }

  double best = -kInf;
  std::size_t arg = start;
  for (std::size_t t = start; t < total; ++t) {
    const double v = chain.log_targets[t] - log_jacobian(chain.states[t]);
    if (v > best) {
      best = v;
      arg = t;
    }
  }
  s.mdap = to_constrained(chain.states[arg]);
  return s;
}

inline PosteriorSummary summarize(const Chain& chain, const ChainConfig& cfg, double level = 0.95) {
  return summarize(
      chain, cfg, [](const Vec& u) { return u; }, [](const Vec&) { return 0.0; }, level);
}

}  // namespace dpost
