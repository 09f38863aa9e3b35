// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "dpost/dpost.hpp"

using namespace dpost;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double gauss_pdf(double x, double m, double s) { return normal_pdf(x, m, s); }

// ---------------------------------------------------------------------------
// 1. MC and GH estimators against adaptive quadrature on random Gaussian pairs.
// Pairs are drawn with means in [-m, m] and sds in [s_lo, s_hi].

struct PairErrors {
  double mc_median = 0.0, gh_max = 0.0;
};

PairErrors pair_errors(double m, double s_lo, double s_hi, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> mc_err;
  double gh_worst = 0.0;
  for (auto kind : {DisparityKind::Hellinger, DisparityKind::NegativeExponential}) {
    const GFunction gf(kind);
    const GaussHermiteDisparity gh(gf, 80);
    for (int i = 0; i < 20; ++i) {
      const double mg = m * (2.0 * uniform01(rng) - 1.0), sg = s_lo + (s_hi - s_lo) * uniform01(rng);
      const double mf = m * (2.0 * uniform01(rng) - 1.0), sf = s_lo + (s_hi - s_lo) * uniform01(rng);
      const auto g = [=](double x) { return gauss_pdf(x, mg, sg); };
      const auto lf = [=](double x) { return normal_logpdf(x, mf, sf); };
      const double exact = disparity_exact_quadrature(
          gf, g, lf, IntegrationWindows::merge({gaussian_window(mg, sg), gaussian_window(mf, sf)}));
      std::vector<double> z(10000), lg(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) {
        z[k] = mg + sg * standard_normal(rng);
        lg[k] = normal_logpdf(z[k], mg, sg);
      }
      mc_err.push_back(std::abs(MonteCarloDisparity(gf, z, lg)(lf) - exact));
      gh_worst = std::max(gh_worst, std::abs(gh(g, mf, sf) - exact));
    }
  }
  return {median(mc_err), gh_worst};
}

Outcome criterion1() {
  const auto e = pair_errors(1.0, 0.8, 1.25, 20240101);
  return {e.mc_median < 0.01 && e.gh_max < 1e-5,
          "median |mc - quad| " + fmt("%.2e", e.mc_median) + ", max |gh - quad| " + fmt("%.2e", e.gh_max)};
}

// 2. 2HD^2(N(0,1), N(1,1)) = 4(1 - e^{-1/8}).

Outcome criterion2() {
  const double exact = 4.0 * (1.0 - std::exp(-0.125));
  const GFunction hd(DisparityKind::Hellinger);
  const auto g = [](double x) { return gauss_pdf(x, 0.0, 1.0); };
  const double quad = disparity_exact_quadrature(
      hd, g, [](double x) { return normal_logpdf(x, 1.0, 1.0); },
      IntegrationWindows::merge({gaussian_window(0.0, 1.0), gaussian_window(1.0, 1.0)}));
  const double gh = GaussHermiteDisparity(hd, 80)(g, 1.0, 1.0);
  const double eq = std::abs(quad - exact), eg = std::abs(gh - exact);
  return {eq < 1e-8 && eg < 1e-5, "value " + fmt("%.8f", exact) + ", quad err " + fmt("%.1e", eq) +
                                      ", gh err " + fmt("%.1e", eg)};
}

// 3. Empirical-KL D-posterior differences equal log-posterior differences.

Outcome criterion3() {
  Rng rng(3);
  std::vector<double> x(20);
  for (double& v : x) v = 5.0 + standard_normal(rng);
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
  const DPosterior<NormalMean> post(model, prior, 20.0, empirical_kl(model, x));
  const auto direct = [&](double mu) {
    double s = normal_logpdf(mu, 0.0, 5.0);
    for (double v : x) s += normal_logpdf(v, mu, 1.0);
    return s;
  };
  double worst = 0.0;
  const double ref = 5.0;
  for (double mu = 2.0; mu <= 8.0; mu += 0.05) {
    const double a = post.log_density(Vec{{mu}}) - post.log_density(Vec{{ref}});
    worst = std::max(worst, std::abs(a - (direct(mu) - direct(ref))));
  }
  return {worst < 1e-6, "max grid difference " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------
// Table runs. Each table is computed once and shared between criteria.

std::map<TableId, TableResult> g_tables;

const TableResult& table(TableId id) {
  auto it = g_tables.find(id);
  if (it == g_tables.end()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_table(table_spec(id, 1.0, 1).checked_only(), workers());
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  [%s: %.0f s on %zu workers]\n", std::string(to_string(id)).c_str(), sec, workers());
    it = g_tables.emplace(id, std::move(r)).first;
  }
  return it->second;
}

Outcome table_checks(TableId id, const std::function<bool(const TableCheck&)>& keep) {
  const auto& t = table(id);
  Outcome o{true, ""};
  std::size_t n = 0;
  for (const auto& c : t.checks) {
    if (!keep(c.check)) continue;
    ++n;
    o.pass = o.pass && c.pass;
    std::printf("    %-4s %s %s %s = %.4f in [%g, %g]\n", c.pass ? "ok" : "MISS", c.check.scenario.c_str(),
                c.check.component.c_str(), c.check.statistic.c_str(), c.observed, c.check.lo, c.check.hi);
  }
  if (n == 0) return {false, "no checks selected"};
  o.detail = std::to_string(n) + " checks";
  return o;
}

bool is_variance(const TableCheck& c) { return c.statistic == "variance_ratio"; }

Outcome criterion4() {
  return table_checks(TableId::NormalClean, [](const TableCheck& c) { return !is_variance(c); });
}
Outcome criterion5() {
  return table_checks(TableId::NormalOutliers, [](const TableCheck&) { return true; });
}
Outcome criterion6() { return table_checks(TableId::ExpGamma, [](const TableCheck&) { return true; }); }
Outcome criterion7() {
  return table_checks(TableId::RandEffects, [](const TableCheck&) { return true; });
}
Outcome criterion11() { return table_checks(TableId::NormalClean, is_variance); }

// ---------------------------------------------------------------------------
// 8-10. Analytic-density properties on the normal-mean model.

Outcome criterion8() {
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
  InfluenceOptions opt;
  opt.chain.steps = 20000;
  opt.chain.proposal_scales = {0.6};
  opt.chain.seed = 8;
  const auto rep = breakdown_limit_check(model, prior, 20, normal_density(5.0, 1.0),
                                         GFunction(DisparityKind::Hellinger), 0.2, {10, 50, 250, 1250},
                                         Vec{{5.0}}, opt);
  const double r = rep.terminal_ratio();
  return {r < 3.0, "z=1250 difference " + fmt("%.4f", rep.difference.back()(0)) + " = " + fmt("%.2f", r) +
                       " combined SEs"};
}

Outcome criterion9() {
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
  const GaussHermiteDisparity gh(GFunction(DisparityKind::Hellinger), 80);
  const DisparityFn d = gh_disparity(model, gh, [](double x) { return gauss_pdf(x, 5.0, 1.0); });
  std::vector<std::vector<double>> ng(3);
  for (std::uint64_t s = 0; s < 30; ++s) {
    ChainConfig cfg;
    cfg.steps = 20000;
    cfg.proposal_scales = {2.4};
    cfg.seed = derive_seed(9, s);
    const auto pts = edap_mde_gap(model, prior, d, {50, 200, 800}, Vec{{4.0}}, cfg);
    for (std::size_t k = 0; k < 3; ++k) ng[k].push_back(static_cast<double>(pts[k].n) * pts[k].gap);
  }
  const double m0 = median(ng[0]), m1 = median(ng[1]), m2 = median(ng[2]);
  return {m1 <= m0 && m2 <= m1,
          "median n*gap " + fmt("%.5f", m0) + ", " + fmt("%.5f", m1) + ", " + fmt("%.5f", m2)};
}

Outcome criterion10() {
  const NormalMean model(1.0);
  const ProductPrior prior({UnivariatePrior::normal(0.0, 25.0)});
  ChainConfig cfg;
  cfg.steps = 40000;
  cfg.proposal_scales = {12.0};
  cfg.seed = 10;
  const auto z = posterior_functional(
      model, prior, 20,
      analytic_disparity(model, GFunction(DisparityKind::Hellinger), zero_density(gaussian_window(5.0, 1.0))),
      Vec{{5.0}}, cfg);
  const double dev = std::abs(z.edap(0) - 0.0);
  return {dev < 3.0 * z.mc_se(0),
          "EDAP " + fmt("%.4f", z.edap(0)) + ", prior mean 0, chain SE " + fmt("%.4f", z.mc_se(0))};
}

// ---------------------------------------------------------------------------
// 12. Every command replayed from its manifest gives byte-identical CSVs.

int shell(const std::string& cmd) {
  const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion12() {
  const std::string cli = DPOST_CLI_PATH;
  const std::string data = std::string(DPOST_SOURCE_DIR) + "/data";
  const fs::path root = fs::temp_directory_path() / "dpost_acceptance_12";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "cfg.json") << R"({"chain": {"steps": 4000}})";
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"fit", "fit " + data + "/parasite.csv binomial-logitnormal hd-latent --config " +
                  (root / "cfg.json").string() + " --seed 5"},
      {"table", "table normal-clean --scale 0.02 --seed 5"},
      {"influence", "influence normal-mean hd --z -4:8:4 --alpha 0.05 --steps 2000 --seed 5"},
      {"breakdown", "breakdown normal-mean hd --z 10,100 --steps 2000 --seed 5"},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : runs) {
    const auto a = root / (name + "_a"), b = root / (name + "_b");
    if (shell(cli + " " + args + " --out " + a.string()) != 0) return {false, name + " failed"};
    if (shell(cli + " rerun " + (a / "manifest.json").string() + " --out " + b.string()) != 0)
      return {false, name + " rerun failed"};
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(b / e.path().filename()))
        return {false, name + ": " + e.path().filename().string() + " differs"};
    }
  }
  fs::remove_all(root);
  return {files > 0, std::to_string(runs.size()) + " commands, " + std::to_string(files) + " CSVs identical"};
}

// ---------------------------------------------------------------------------
// Report-only lines.

void report_bandwidth() {
  auto spec = table_spec(TableId::NormalOutliers, 1.0, 1);
  for (const auto& e : spec.entries) {
    if (e.scenario.name != "hellinger/k5/loc-3") continue;
    auto sj = e.scenario, silverman = e.scenario;
    silverman.bandwidth = BandwidthSelector::Silverman;
    const auto a = run_scenario(sj, workers()).rows[0], b = run_scenario(silverman, workers()).rows[0];
    std::printf("report: bandwidth %s bias sheather-jones %.4f silverman %.4f, coverage %.3f / %.3f\n",
                e.scenario.name.c_str(), a.bias, b.bias, a.coverage, b.coverage);
  }
}

void report_wide_pairs() {
  const auto e = pair_errors(2.0, 0.6, 1.5, 20240102);
  std::printf("report: wide pairs (means in [-2, 2], sds in [0.6, 1.5]) median |mc - quad| %.2e, "
              "max |gh - quad| %.2e\n", e.mc_median, e.gh_max);
}

void report_cost() {
  for (const auto& b : run_bench(1)) {
    const bool disparity = b.method.rfind("hellinger", 0) == 0 || b.method.rfind("negexp", 0) == 0;
    const bool inside = b.ratio >= 1.5 && b.ratio <= 12.0;
    std::printf("report: relative cost %-14s x%.1f%s\n", b.method.c_str(), b.ratio,
                disparity ? (inside ? " (inside 1.5-12)" : " (outside 1.5-12)") : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},   {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& [id, fn] : all) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  if (wanted.empty()) {
    report_wide_pairs();
    report_bandwidth();
    report_cost();
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
