// Command-line front end: fit, table, influence, breakdown, bench.
//
// Exit codes: 0 ok, 1 internal error, 2 parse or argument error,
// 3 model/kind or table-id mismatch, 4 sampler failure, 5 check exceeded.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpost/dpost.hpp"

namespace fs = std::filesystem;
using namespace dpost;

namespace {

enum Exit { kOk = 0, kInternal = 1, kParse = 2, kMismatch = 3, kSampler = 4, kCheck = 5 };

/// Errors raised by the front end itself, carrying their exit code.
struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InitInvalid:
    case ErrorCode::EmptyChain:
    case ErrorCode::NoConvergence:
    case ErrorCode::NoRoot: return kSampler;
    default: return kParse;
  }
}

std::vector<double> parse_list(const std::string& s) {
  // "a,b,c" or "from:to:step"
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::string t = s;
    std::replace(t.begin(), t.end(), ':', ',');
    const auto f = split_csv_line(t);
    if (f.size() != 3) throw CliError(kParse, "range must be from:to:step, got '" + s + "'");
    const double a = parse_double(f[0]), b = parse_double(f[1]), h = parse_double(f[2]);
    if (!(h > 0.0) || b < a) throw CliError(kParse, "bad range '" + s + "'");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * h);
    return out;
  }
  for (const auto& f : split_csv_line(s)) out.push_back(parse_double(f));
  if (out.empty()) throw CliError(kParse, "empty list");
  return out;
}

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kParse, "cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---------------------------------------------------------------------------
// fit

/// "kl" | "hd" | "ned" optionally followed by "-latent", "-observation", "-both",
/// "-homoscedastic", "-marginal"; plus "huber" and "tukey".
struct KindSpec {
  std::string base;  // kl, hd, ned, huber, tukey
  std::string term;  // "" or one of the suffixes
  DisparityKind kind = DisparityKind::KullbackLeibler;
};

KindSpec parse_kind(const std::string& s) {
  KindSpec k;
  const auto dash = s.find('-');
  k.base = s.substr(0, dash);
  k.term = dash == std::string::npos ? "" : s.substr(dash + 1);
  if (k.base == "huber" || k.base == "tukey") {
    if (!k.term.empty()) throw CliError(kMismatch, "kind '" + s + "' takes no suffix");
    return k;
  }
  try {
    k.kind = parse_disparity_kind(k.base);
  } catch (const Error&) {
    throw CliError(kMismatch, "unknown kind '" + s + "'");
  }
  if (k.base == "kl" && !k.term.empty())
    throw CliError(kMismatch, "kl is the full likelihood and takes no suffix");
  return k;
}

[[noreturn]] void mismatch(const std::string& model, const std::string& kind) {
  throw CliError(kMismatch, "model '" + model + "' does not support kind '" + kind + "'");
}

struct FitOutput {
  PosteriorSummary summary;
  std::vector<std::string> names;
  Json extra = Json::object();
};

ChainConfig chain_with(const FitConfig& cfg, std::uint64_t seed, std::vector<double> scales) {
  ChainConfig c = cfg.chain;
  c.seed = derive_seed(seed, 1);
  if (c.proposal_scales.empty()) c.proposal_scales = std::move(scales);
  return c;
}

void check_fit(const PosteriorSummary& s) {
  if (s.stuck)
    throw CliError(kSampler, "chain is stuck (acceptance rate " +
                                 format_number(s.acceptance_rate) + ")");
}

FitOutput fit_iid(const std::string& model_name, const std::vector<double>& x, const KindSpec& k,
                  const std::string& kind_str, const FitConfig& cfg, std::uint64_t seed) {
  if (!k.term.empty()) mismatch(model_name, kind_str);
  const std::size_t mc = cfg.mc_samples.value_or(1000);
  const auto kde_for = [&] { return KernelDensity(x, select_bandwidth(x, cfg.bandwidth)); };
  FitOutput out;
  if (model_name == "normal-mean") {
    const NormalMean model(cfg.normal_sd);
    const ProductPrior prior({UnivariatePrior::normal(cfg.prior_mean, cfg.prior_variance)});
    DisparityFn d;
    if (k.base == "kl") d = empirical_kl(model, x);
    else if (k.base == "huber") d = robust_loss_disparity(model, x, RobustLoss::Huber, cfg.huber_cutoff);
    else if (k.base == "tukey") d = robust_loss_disparity(model, x, RobustLoss::Tukey, kTukeyCutoff);
    else {
      const auto kde = kde_for();
      if (resolve_estimator(cfg.estimator, k.kind) == Estimator::MonteCarlo) {
        Rng rng(derive_seed(seed, 2));
        d = mc_disparity(model, std::make_shared<const MonteCarloDisparity>(
                                    MonteCarloDisparity::from_kde(GFunction(k.kind), kde, mc, rng)));
      } else {
        d = gh_disparity(model, GaussHermiteDisparity(GFunction(k.kind), cfg.gh_points), kde);
      }
    }
    const DPosterior<NormalMean> post(model, prior, static_cast<double>(x.size()), d);
    const double scale = 2.4 * cfg.normal_sd / std::sqrt(static_cast<double>(x.size()));
    out.summary = fit(post.problem(Vec{{median(x)}}), chain_with(cfg, seed, {scale}), cfg.level).summary;
    out.names = model.names();
  } else {  // expgamma
    if (k.base == "huber" || k.base == "tukey") mismatch(model_name, kind_str);
    if (cfg.estimator == Estimator::GaussHermite)
      throw CliError(kMismatch, "Gauss-Hermite needs a Gaussian model; expgamma is not one");
    const ExpGamma model;
    const ProductPrior prior({UnivariatePrior::chi_square(3.0), UnivariatePrior::chi_square(0.3)});
    DisparityFn d;
    if (k.base == "kl") {
      d = empirical_kl(model, x);
    } else {
      Rng rng(derive_seed(seed, 2));
      d = mc_disparity(model, std::make_shared<const MonteCarloDisparity>(
                                  MonteCarloDisparity::from_kde(GFunction(k.kind), kde_for(), mc, rng)));
    }
    const double k0 = detail::expgamma_shape_from_variance(variance(x));
    const double s0 = std::exp(mean(x) - boost::math::digamma(k0));
    const DPosterior<ExpGamma> post(model, prior, static_cast<double>(x.size()), d);
    out.summary = fit(post.problem(Vec{{k0, s0}}), chain_with(cfg, seed, {0.15, 0.15}), cfg.level).summary;
    out.names = model.names();
  }
  return out;
}

HierarchicalSpec hierarchical_spec(const KindSpec& k, const FitConfig& cfg, std::uint64_t seed,
                                   bool allow_observation, const std::string& model,
                                   const std::string& kind_str) {
  if (k.base == "huber" || k.base == "tukey") mismatch(model, kind_str);
  HierarchicalSpec spec;
  spec.kind = k.base == "kl" ? DisparityKind::Hellinger : k.kind;
  spec.observation_estimator = cfg.estimator;
  spec.gh_points = cfg.gh_points;
  spec.mc_samples = cfg.mc_samples.value_or(200);
  spec.seed = derive_seed(seed, 2);
  spec.selector = cfg.bandwidth;
  if (k.base == "kl") return spec;
  const std::string term = k.term.empty() ? "latent" : k.term;
  if (term == "latent" || term == "both") spec.latent = TermKind::Disparity;
  if (term == "observation" || term == "both") spec.observation = TermKind::Disparity;
  if (spec.latent == TermKind::Likelihood && spec.observation == TermKind::Likelihood)
    mismatch(model, kind_str);
  if (!allow_observation && spec.observation == TermKind::Disparity) mismatch(model, kind_str);
  return spec;
}

std::vector<std::vector<double>> read_groups(const std::string& path) {
  const auto t = read_csv(path);
  const auto gc = t.column("group"), yc = t.column("y");
  std::vector<std::string> labels;
  std::vector<std::vector<double>> groups;
  for (const auto& r : t.rows) {
    const auto it = std::find(labels.begin(), labels.end(), r[gc]);
    const auto idx = static_cast<std::size_t>(it - labels.begin());
    if (it == labels.end()) {
      labels.push_back(r[gc]);
      groups.emplace_back();
    }
    groups[idx].push_back(parse_double(r[yc]));
  }
  if (groups.empty()) throw Error(ErrorCode::ParseError, "no rows in " + path);
  return groups;
}

RegressionData read_regression(const std::string& path) {
  const auto t = read_csv(path);
  const auto yc = t.column("y");
  RegressionData d;
  d.y = Vec(static_cast<Eigen::Index>(t.rows.size()));
  d.covariates = Eigen::MatrixXd(static_cast<Eigen::Index>(t.rows.size()),
                                 static_cast<Eigen::Index>(t.header.size() - 1));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      const double v = parse_double(t.rows[i][j]);
      if (j == yc) d.y(static_cast<Eigen::Index>(i)) = v;
      else d.covariates(static_cast<Eigen::Index>(i), c++) = v;
    }
  }
  if (d.y.size() == 0) throw Error(ErrorCode::ParseError, "no rows in " + path);
  if (d.covariates.cols() == 0) throw Error(ErrorCode::ParseError, "no covariate columns in " + path);
  return d;
}

/// Loads the data first so a bad path fails before anything is written.
std::function<FitOutput()> prepare_fit(const std::string& data, const std::string& model,
                                       const std::string& kind_str, const FitConfig& cfg,
                                       std::uint64_t seed) {
  const auto k = parse_kind(kind_str);
  if (model == "normal-mean" || model == "expgamma") {
    auto x = read_numeric_column(data, "x");
    return [=] { return fit_iid(model, x, k, kind_str, cfg, seed); };
  }
  if (model == "binomial-logitnormal") {
    const auto counts = read_parasite_csv(data);
    const auto spec = hierarchical_spec(k, cfg, seed, false, model, kind_str);
    return [=] {
      const BinomialLogitNormalModel m(counts.successes, counts.trials, spec);
      FitOutput out;
      out.summary = fit(m.problem(), chain_with(cfg, seed, m.proposal_scales()), cfg.level).summary;
      out.names = m.names();
      return out;
    };
  }
  if (model == "random-intercept") {
    const auto survey = read_survey_csv(data);
    const auto spec = hierarchical_spec(k, cfg, seed, true, model, kind_str);
    return [=] {
      const RandomInterceptModel m(survey, spec);
      FitOutput out;
      out.summary = fit(m.problem(), chain_with(cfg, seed, m.proposal_scales()), cfg.level).summary;
      out.names = m.names();
      // Slopes sit at positions n+2 (group a) and n+3 (group f).
      const auto n = static_cast<Eigen::Index>(m.subjects());
      double below = 0.0;
      for (const auto& draw : out.summary.draws) below += draw(n + 3) < draw(n + 2) ? 1.0 : 0.0;
      const double p = below / static_cast<double>(out.summary.draws.size());
      out.extra["prob_beta1_f_below_beta1_a"] = p;
      out.extra["prob_beta1_f_above_beta1_a"] = 1.0 - p;
      return out;
    };
  }
  if (model == "random-effects") {
    const auto groups = read_groups(data);
    const auto spec = hierarchical_spec(k, cfg, seed, true, model, kind_str);
    return [=] {
      const RandomEffectsModel m(groups, spec);
      FitOutput out;
      out.summary = fit(m.problem(), chain_with(cfg, seed, m.proposal_scales()), cfg.level).summary;
      out.names = m.names();
      return out;
    };
  }
  if (model == "linear-regression") {
    const auto d = read_regression(data);
    RegressionMethod method = RegressionMethod::Likelihood;
    if (k.base == "huber") method = RegressionMethod::Huber;
    else if (k.base == "tukey") mismatch(model, kind_str);
    else if (k.base != "kl") {
      if (k.term.empty()) method = RegressionMethod::Conditional;
      else if (k.term == "homoscedastic") method = RegressionMethod::Homoscedastic;
      else if (k.term == "marginal") method = RegressionMethod::Marginal;
      else mismatch(model, kind_str);
    }
    RegressionOptions opt;
    opt.kind = k.base == "kl" || k.base == "huber" ? DisparityKind::Hellinger : k.kind;
    opt.estimator = cfg.estimator;
    opt.selector = cfg.bandwidth;
    opt.mc_samples = cfg.mc_samples.value_or(200);
    opt.gh_points = cfg.gh_points;
    opt.seed = derive_seed(seed, 2);
    opt.huber_cutoff = cfg.huber_cutoff;
    return [=] {
      FitOutput out;
      out.summary = fit_regression(d, method, opt, chain_with(cfg, seed, detail::regression_scales(d)));
      for (std::size_t j = 0; j <= d.p(); ++j) out.names.push_back("beta" + std::to_string(j));
      out.names.push_back("sigma");
      return out;
    };
  }
  throw CliError(kMismatch, "unknown model '" + model + "'");
}

int cmd_fit(const std::string& data, const std::string& model, const std::string& kind,
            const FitConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
  RunManifest manifest;
  manifest.command = "fit";
  manifest.seed = seed;
  manifest.settings = {{"data", data}, {"model", model}, {"kind", kind}, {"config", to_json(cfg)}};
  auto run = prepare_fit(data, model, kind, cfg, seed);

  const auto t0 = detail::Clock::now();
  const FitOutput res = run();
  manifest.timings["fit_seconds"] = detail::seconds_since(t0);
  check_fit(res.summary);

  prepare_out(out_dir);
  std::vector<std::string> header{"step"};
  header.insert(header.end(), res.names.begin(), res.names.end());
  CsvWriter chain(header);
  for (std::size_t i = 0; i < res.summary.draws.size(); ++i) {
    std::vector<std::string> row{std::to_string(res.summary.kept[i])};
    for (Eigen::Index j = 0; j < res.summary.draws[i].size(); ++j)
      row.push_back(format_number(res.summary.draws[i](j)));
    chain.row(row);
  }
  const auto chain_path = join(out_dir, "chain.csv");
  chain.save(chain_path);

  const Json summary = {{"model", model},
                        {"kind", kind},
                        {"names", res.names},
                        {"edap", vec_json(res.summary.edap)},
                        {"mdap", vec_json(res.summary.mdap)},
                        {"sd", vec_json(res.summary.sd)},
                        {"lower", vec_json(res.summary.lower)},
                        {"upper", vec_json(res.summary.upper)},
                        {"mc_se", vec_json(res.summary.mc_se)},
                        {"level", res.summary.level},
                        {"acceptance_rate", res.summary.acceptance_rate},
                        {"draws", res.summary.draws.size()},
                        {"extra", res.extra}};
  const auto summary_path = join(out_dir, "summary.json");
  {
    std::ofstream o(summary_path, std::ios::binary);
    o << summary.dump(2) << '\n';
  }
  manifest.outputs = {chain_path, summary_path};
  manifest.save(join(out_dir, "manifest.json"));
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// table

int cmd_table(const std::string& id_str, double scale, bool check, std::uint64_t seed,
              std::size_t jobs, const std::string& out_dir) {
  TableId id;
  try {
    id = parse_table_id(id_str);
  } catch (const Error&) {
    throw CliError(kMismatch, "unknown table id '" + id_str + "'");
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw CliError(kParse, "--scale must lie in (0, 1]");
  RunManifest manifest;
  manifest.command = "table";
  manifest.seed = seed;
  manifest.settings = {{"table", id_str}, {"scale", scale}, {"check", check}};
  const auto t0 = detail::Clock::now();
  const auto result = run_table(table_spec(id, scale, seed), jobs);
  manifest.timings["total_seconds"] = detail::seconds_since(t0);
  manifest.timings["jobs"] = jobs;

  prepare_out(out_dir);
  const std::string stem = std::string(to_string(id));
  const auto table_path = join(out_dir, stem + ".csv");
  const auto diff_path = join(out_dir, stem + "_diff.csv");
  const auto check_path = join(out_dir, stem + "_checks.csv");
  table_csv(result).save(table_path);
  reference_diff_csv(result).save(diff_path);
  check_csv(result).save(check_path);

  // Per-scenario cost, relative to the likelihood scenario sharing its contamination.
  Json cost = Json::object();
  for (const auto& r : result.results) {
    Json e = {{"cpu_seconds", r.cpu_seconds},
              {"setup_seconds", r.setup_seconds},
              {"excluded", r.excluded},
              {"exclusion_reasons", r.exclusion_reasons}};
    const auto slash = r.scenario.name.find('/');
    const std::string suffix = slash == std::string::npos ? "" : r.scenario.name.substr(slash);
    for (const auto& b : result.results)
      if (b.scenario.name == "likelihood" + suffix && b.cpu_seconds > 0.0)
        e["relative_cost"] = r.cpu_seconds / b.cpu_seconds;
    cost[r.scenario.name] = e;
  }
  manifest.timings["scenarios"] = cost;
  manifest.outputs = {table_path, diff_path, check_path};
  const bool pass = result.all_pass();
  if (check && !pass) manifest.status = "check-failed";
  manifest.save(join(out_dir, "manifest.json"));

  for (const auto& c : result.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.check.scenario << ' ' << c.check.component << ' '
              << c.check.statistic << " = " << format_number(c.observed) << " in ["
              << format_number(c.check.lo) << ", " << format_number(c.check.hi) << "]\n";
  return check && !pass ? kCheck : kOk;
}

// ---------------------------------------------------------------------------
// influence and breakdown (normal-mean, analytic data density)

struct AnalyticSettings {
  std::string model, kind;
  double n = 20, data_mean = 1.0, prior_variance = 1.0;
  std::string estimator = "quadrature";
  std::size_t steps = 20000;
  double proposal = 0.0;  // 0: 2.4 / sqrt(n)
  double width = 0.1;
};

InfluenceOptions influence_options(const AnalyticSettings& a, std::uint64_t seed) {
  InfluenceOptions opt;
  if (a.estimator == "quadrature") opt.estimator = FunctionalEstimator::Quadrature;
  else if (a.estimator == "mc") opt.estimator = FunctionalEstimator::MonteCarlo;
  else throw CliError(kParse, "--estimator must be quadrature or mc");
  opt.width = a.width;
  opt.chain.steps = a.steps;
  opt.chain.thinning = 1;
  opt.chain.seed = seed;
  opt.chain.proposal_scales = {a.proposal > 0.0 ? a.proposal : 2.4 / std::sqrt(a.n)};
  return opt;
}

DisparityKind analytic_kind(const AnalyticSettings& a) {
  if (a.model != "normal-mean") throw CliError(kMismatch, "only normal-mean is supported here");
  const auto k = parse_kind(a.kind);
  if (!k.term.empty() || k.base == "huber" || k.base == "tukey") mismatch(a.model, a.kind);
  if (!(a.n > 0.0)) throw CliError(kParse, "--n must be positive");
  return k.kind;
}

int cmd_influence(const AnalyticSettings& a, const std::vector<double>& alphas,
                  const std::vector<double>& zs, const std::vector<double>& prior_means,
                  std::uint64_t seed, const std::string& out_dir) {
  const auto kind = analytic_kind(a);
  RunManifest manifest;
  manifest.command = "influence";
  manifest.seed = seed;
  manifest.settings = {{"model", a.model},         {"kind", a.kind},
                       {"n", a.n},                 {"data_mean", a.data_mean},
                       {"prior_variance", a.prior_variance}, {"estimator", a.estimator},
                       {"steps", a.steps},         {"proposal", a.proposal},
                       {"width", a.width},         {"alpha", alphas},          {"z", zs},
                       {"prior_mean", prior_means}};
  const auto opt = influence_options(a, seed);
  const NormalMean model(1.0);
  const auto g = normal_density(a.data_mean, 1.0);
  CsvWriter w({"kind", "n", "alpha", "z", "prior_mean", "component", "clean", "contaminated",
               "displacement", "mc_se"});
  const auto t0 = detail::Clock::now();
  for (double pm : prior_means) {
    const ProductPrior prior({UnivariatePrior::normal(pm, a.prior_variance)});
    for (double alpha : alphas)
      for (double z : zs) {
        const auto r = influence_alpha(model, prior, a.n, g, GFunction(kind), z, alpha,
                                       Vec{{a.data_mean}}, opt);
        w.row({a.kind, format_number(a.n), format_number(alpha), format_number(z), format_number(pm),
               "mu", format_number(r.clean(0)), format_number(r.contaminated(0)),
               format_number(r.displacement(0)), format_number(r.mc_se(0))});
      }
  }
  manifest.timings["total_seconds"] = detail::seconds_since(t0);
  prepare_out(out_dir);
  const auto path = join(out_dir, "influence.csv");
  w.save(path);
  manifest.outputs = {path};
  manifest.save(join(out_dir, "manifest.json"));
  std::cout << w.str();
  return kOk;
}

int cmd_breakdown(const AnalyticSettings& a, double alpha, const std::vector<double>& zs,
                  std::uint64_t seed, const std::string& out_dir) {
  const auto kind = analytic_kind(a);
  RunManifest manifest;
  manifest.command = "breakdown";
  manifest.seed = seed;
  manifest.settings = {{"model", a.model}, {"kind", a.kind},   {"n", a.n},
                       {"data_mean", a.data_mean}, {"prior_variance", a.prior_variance},
                       {"estimator", a.estimator}, {"steps", a.steps}, {"proposal", a.proposal},
                       {"width", a.width}, {"alpha", alpha}, {"z", zs}};
  const auto opt = influence_options(a, seed);
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, a.prior_variance)});
  const auto t0 = detail::Clock::now();
  const auto rep = breakdown_limit_check(model, prior, a.n, normal_density(a.data_mean, 1.0),
                                         GFunction(kind), alpha, zs, Vec{{a.data_mean}}, opt);
  manifest.timings["total_seconds"] = detail::seconds_since(t0);
  CsvWriter w({"row", "alpha", "z", "n", "component", "value", "se", "ratio"});
  const auto f = format_number;
  w.row({"limit", f(alpha), "", f(a.n), "mu", f(rep.limit(0)), f(rep.limit_se(0)), ""});
  for (std::size_t k = 0; k < rep.z.size(); ++k)
    w.row({"difference", f(alpha), f(rep.z[k]), f(a.n), "mu", f(rep.difference[k](0)),
           f(rep.se[k](0)), f(std::abs(rep.difference[k](0)) / rep.se[k](0))});
  w.row({"scaled", f(alpha), "", std::to_string(rep.scaled_n), "mu", f(rep.scaled(0)),
         f(rep.scaled_se(0)), f(rep.scaling_ratio())});
  prepare_out(out_dir);
  const auto path = join(out_dir, "breakdown.csv");
  w.save(path);
  manifest.outputs = {path};
  manifest.save(join(out_dir, "manifest.json"));
  std::cout << w.str();
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(std::uint64_t seed, std::size_t n, std::size_t steps, const std::string& out_dir) {
  RunManifest manifest;
  manifest.command = "bench";
  manifest.seed = seed;
  manifest.settings = {{"n", n}, {"steps", steps}};
  const auto entries = run_bench(seed, n, steps);
  Json rows = Json::array();
  for (const auto& e : entries) {
    rows.push_back({{"method", e.method},
                    {"seconds", e.seconds},
                    {"relative_cost", e.ratio},
                    {"within_1.5_to_12", e.ratio >= 1.5 && e.ratio <= 12.0}});
    std::printf("%-14s %10.4f s  x%.1f\n", e.method.c_str(), e.seconds, e.ratio);
  }
  manifest.timings["bench"] = rows;
  prepare_out(out_dir);
  const auto path = join(out_dir, "bench.json");
  {
    std::ofstream o(path, std::ios::binary);
    o << rows.dump(2) << '\n';
  }
  manifest.outputs = {path};
  manifest.save(join(out_dir, "manifest.json"));
  return kOk;
}

// ---------------------------------------------------------------------------
// rerun: replays a command from its manifest

template <class T>
T setting(const Json& s, const char* key) {
  const auto it = s.find(key);
  if (it == s.end()) throw CliError(kParse, std::string("manifest settings lack '") + key + "'");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw CliError(kParse, std::string("bad manifest value for '") + key + "'");
  }
}

AnalyticSettings analytic_from(const Json& s) {
  AnalyticSettings a;
  a.model = setting<std::string>(s, "model");
  a.kind = setting<std::string>(s, "kind");
  a.n = setting<double>(s, "n");
  a.data_mean = setting<double>(s, "data_mean");
  a.prior_variance = setting<double>(s, "prior_variance");
  a.estimator = setting<std::string>(s, "estimator");
  a.steps = setting<std::size_t>(s, "steps");
  a.proposal = setting<double>(s, "proposal");
  a.width = setting<double>(s, "width");
  return a;
}

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir) {
  const Json m = read_json_file(manifest_path);
  const auto command = setting<std::string>(m, "command");
  const auto seed = setting<std::uint64_t>(m, "seed");
  const Json s = setting<Json>(m, "settings");
  if (command == "fit")
    return cmd_fit(setting<std::string>(s, "data"), setting<std::string>(s, "model"),
                   setting<std::string>(s, "kind"), parse_fit_config(setting<Json>(s, "config")), seed,
                   out_dir);
  if (command == "table")
    return cmd_table(setting<std::string>(s, "table"), setting<double>(s, "scale"),
                     setting<bool>(s, "check"), seed, 1, out_dir);
  if (command == "influence")
    return cmd_influence(analytic_from(s), setting<std::vector<double>>(s, "alpha"),
                         setting<std::vector<double>>(s, "z"),
                         setting<std::vector<double>>(s, "prior_mean"), seed, out_dir);
  if (command == "breakdown")
    return cmd_breakdown(analytic_from(s), setting<double>(s, "alpha"),
                         setting<std::vector<double>>(s, "z"), seed, out_dir);
  if (command == "bench")
    return cmd_bench(seed, setting<std::size_t>(s, "n"), setting<std::size_t>(s, "steps"), out_dir);
  throw CliError(kParse, "manifest names unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disparity-based posterior sampling and simulation tables"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string out = "out";
  std::size_t jobs = 1;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed (required; the only source of randomness)")->required();
    sub->add_option("--out", out, "output directory");
  };

  std::string data, model, kind, config;
  auto* fit_cmd = app.add_subcommand("fit", "sample a D-posterior for a data file");
  fit_cmd->add_option("data", data, "data CSV")->required();
  fit_cmd->add_option("model", model,
                      "normal-mean | expgamma | binomial-logitnormal | random-intercept | "
                      "random-effects | linear-regression")
      ->required();
  fit_cmd->add_option("kind", kind, "kl | hd | ned [-latent|-observation|-both|-homoscedastic|-marginal] | huber | tukey")
      ->required();
  fit_cmd->add_option("--config", config, "JSON settings file");
  common(fit_cmd);

  std::string table_id;
  double scale = 1.0;
  bool check = false;
  auto* table_cmd = app.add_subcommand("table", "run a simulation table");
  table_cmd->add_option("id", table_id, "normal-clean | normal-outliers | expgamma | linreg | randeffects")
      ->required();
  table_cmd->add_option("--scale", scale, "fraction of the default replication count");
  table_cmd->add_flag("--check", check, "exit 5 if any acceptance band is exceeded");
  table_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");
  common(table_cmd);

  AnalyticSettings an;
  std::string alpha_list = "0.05", z_list = "0:20:1", prior_list = "0";
  const auto analytic = [&](CLI::App* sub) {
    sub->add_option("model", an.model, "normal-mean")->required();
    sub->add_option("kind", an.kind, "kl | hd | ned")->required();
    sub->add_option("--n", an.n, "sample size");
    sub->add_option("--data-mean", an.data_mean, "mean of the N(m, 1) data density");
    sub->add_option("--prior-variance", an.prior_variance, "variance of the normal prior");
    sub->add_option("--estimator", an.estimator, "quadrature | mc");
    sub->add_option("--steps", an.steps, "chain length");
    sub->add_option("--proposal", an.proposal, "random-walk scale (default 2.4/sqrt(n))");
    sub->add_option("--width", an.width, "width of the contaminating uniform bump");
    common(sub);
  };
  auto* infl_cmd = app.add_subcommand("influence", "alpha-level influence surface");
  analytic(infl_cmd);
  infl_cmd->add_option("--alpha", alpha_list, "contamination levels, list or from:to:step");
  infl_cmd->add_option("--z", z_list, "contamination locations, list or from:to:step");
  infl_cmd->add_option("--prior-mean", prior_list, "prior means, list or from:to:step");

  double bd_alpha = 0.2;
  std::string bd_z = "10,50,250,1250";
  auto* bd_cmd = app.add_subcommand("breakdown", "EDAP displacement as z grows");
  analytic(bd_cmd);
  bd_cmd->add_option("--alpha", bd_alpha, "contamination level");
  bd_cmd->add_option("--z", bd_z, "increasing contamination locations");

  std::size_t bench_n = 20, bench_steps = 10000;
  auto* bench_cmd = app.add_subcommand("bench", "relative cost of disparity chains");
  bench_cmd->add_option("--n", bench_n, "sample size");
  bench_cmd->add_option("--steps", bench_steps, "chain length");
  common(bench_cmd);

  std::string manifest_path;
  auto* rerun_cmd = app.add_subcommand("rerun", "replay a command from its manifest.json");
  rerun_cmd->add_option("manifest", manifest_path, "manifest written by an earlier run")->required();
  rerun_cmd->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*fit_cmd)
      return cmd_fit(data, model, kind, config.empty() ? FitConfig{} : load_fit_config(config), seed, out);
    if (*table_cmd) return cmd_table(table_id, scale, check, seed, jobs, out);
    if (*infl_cmd)
      return cmd_influence(an, parse_list(alpha_list), parse_list(z_list), parse_list(prior_list), seed, out);
    if (*bd_cmd) return cmd_breakdown(an, bd_alpha, parse_list(bd_z), seed, out);
    if (*bench_cmd) return cmd_bench(seed, bench_n, bench_steps, out);
    if (*rerun_cmd) return cmd_rerun(manifest_path, out);
  } catch (const CliError& e) {
    std::cerr << "dpost: " << e.what() << '\n';
    return e.code;
  } catch (const Error& e) {
    std::cerr << "dpost: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "dpost: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
