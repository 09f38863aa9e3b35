#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dpost/error.hpp"
#include "dpost/kde.hpp"
#include "dpost/regression.hpp"
#include "dpost/sampler.hpp"

namespace dpost {

inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// FNV-1a, 64 bit. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_key(const Json& j, const char* key, T& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("bad value for '") + key + "' in " + where);
  }
}

}  // namespace detail

/// Settings of the `fit` command. Every key is optional; unknown keys are errors.
///
///   {
///     "chain": {"steps": 20000, "thinning": 5, "burn_in_fraction": 0.5,
///               "pilot_steps": 2000, "proposal_scales": []},
///     "estimator": "auto" | "mc" | "gh",
///     "gh_points": 80,
///     "mc_samples": 1000,                     // default 1000 i.i.d., 200 otherwise
///     "bandwidth": "sheather-jones" | "silverman",
///     "level": 0.95,
///     "normal_sd": 1.0,                       // normal-mean: known sd
///     "prior_mean": 0.0, "prior_variance": 25.0,  // normal-mean prior
///     "huber_cutoff": 0.8416212335729143     // linear-regression huber
///   }
struct FitConfig {
  ChainConfig chain = [] {
    ChainConfig c;
    c.steps = 20000;
    c.thinning = 5;
    c.pilot_steps = 2000;
    return c;
  }();
  Estimator estimator = Estimator::Auto;
  int gh_points = 80;
  std::optional<std::size_t> mc_samples;
  BandwidthSelector bandwidth = BandwidthSelector::SheatherJones;
  double level = 0.95;
  double normal_sd = 1.0;
  double prior_mean = 0.0;
  double prior_variance = 25.0;
  double huber_cutoff = 0.8416212335729143;

  void validate() const {
    require(chain.steps >= 4, ErrorCode::InvalidParam, "chain.steps must be >= 4");
    require(chain.thinning >= 1, ErrorCode::InvalidParam, "chain.thinning must be >= 1");
    require(chain.burn_in_fraction > 0.0 && chain.burn_in_fraction < 1.0, ErrorCode::InvalidParam,
            "chain.burn_in_fraction must lie in (0, 1)");
    require(gh_points >= 2, ErrorCode::InvalidParam, "gh_points must be >= 2");
    require(!mc_samples || *mc_samples >= 1, ErrorCode::InvalidParam, "mc_samples must be >= 1");
    require(level > 0.0 && level < 1.0, ErrorCode::InvalidLevel, "level must lie in (0, 1)");
    require(normal_sd > 0.0 && prior_variance > 0.0 && huber_cutoff > 0.0, ErrorCode::InvalidParam,
            "normal_sd, prior_variance and huber_cutoff must be positive");
  }
};

inline std::string_view to_string(BandwidthSelector s) {
  return s == BandwidthSelector::Silverman ? "silverman" : "sheather-jones";
}

inline BandwidthSelector parse_bandwidth_selector(std::string_view s) {
  if (s == "sheather-jones") return BandwidthSelector::SheatherJones;
  if (s == "silverman") return BandwidthSelector::Silverman;
  throw Error(ErrorCode::ParseError, "unknown bandwidth selector '" + std::string(s) + "'");
}

inline FitConfig parse_fit_config(const Json& j) {
  using detail::read_key;
  detail::reject_unknown_keys(j,
                              {"chain", "estimator", "gh_points", "mc_samples", "bandwidth",
                               "level", "normal_sd", "prior_mean", "prior_variance",
                               "huber_cutoff"},
                              "config");
  FitConfig c;
  if (const auto it = j.find("chain"); it != j.end()) {
    detail::reject_unknown_keys(
        *it, {"steps", "thinning", "burn_in_fraction", "pilot_steps", "proposal_scales"}, "chain");
    read_key(*it, "steps", c.chain.steps, "chain");
    read_key(*it, "thinning", c.chain.thinning, "chain");
    read_key(*it, "burn_in_fraction", c.chain.burn_in_fraction, "chain");
    read_key(*it, "pilot_steps", c.chain.pilot_steps, "chain");
    read_key(*it, "proposal_scales", c.chain.proposal_scales, "chain");
  }
  std::string est, bw;
  read_key(j, "estimator", est, "config");
  read_key(j, "bandwidth", bw, "config");
  if (!est.empty()) c.estimator = parse_estimator_name(est);
  if (!bw.empty()) c.bandwidth = parse_bandwidth_selector(bw);
  read_key(j, "gh_points", c.gh_points, "config");
  if (j.contains("mc_samples") && !j.at("mc_samples").is_null()) {
    std::size_t m = 0;
    read_key(j, "mc_samples", m, "config");
    c.mc_samples = m;
  }
  read_key(j, "level", c.level, "config");
  read_key(j, "normal_sd", c.normal_sd, "config");
  read_key(j, "prior_mean", c.prior_mean, "config");
  read_key(j, "prior_variance", c.prior_variance, "config");
  read_key(j, "huber_cutoff", c.huber_cutoff, "config");
  c.validate();
  return c;
}

/// Canonical form: every field, fixed key order. Its hash identifies a run.
inline Json to_json(const FitConfig& c) {
  Json chain = {{"steps", c.chain.steps},
                {"thinning", c.chain.thinning},
                {"burn_in_fraction", c.chain.burn_in_fraction},
                {"pilot_steps", c.chain.pilot_steps},
                {"proposal_scales", c.chain.proposal_scales}};
  return {{"chain", chain},
          {"estimator", std::string(estimator_name(c.estimator))},
          {"gh_points", c.gh_points},
          {"mc_samples", c.mc_samples ? Json(*c.mc_samples) : Json(nullptr)},
          {"bandwidth", std::string(to_string(c.bandwidth))},
          {"level", c.level},
          {"normal_sd", c.normal_sd},
          {"prior_mean", c.prior_mean},
          {"prior_variance", c.prior_variance},
          {"huber_cutoff", c.huber_cutoff}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline FitConfig load_fit_config(const std::string& path) { return parse_fit_config(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Run manifest

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Written next to the outputs of every command. `settings` holds everything
/// needed to rerun; `config_hash` is the FNV-1a hash of its dump. Timings and
/// timestamps live here and never in CSV outputs.
struct RunManifest {
  std::string command;
  Json settings = Json::object();
  std::uint64_t seed = 0;
  std::string started = utc_timestamp();
  std::string finished;
  std::vector<std::string> outputs;
  Json timings = Json::object();
  std::string status = "ok";

  std::string config_hash() const { return hex64(fnv1a64(settings.dump())); }

  Json to_json() const {
    return {{"command", command},    {"version", std::string(kVersion)},
            {"seed", seed},          {"config_hash", config_hash()},
            {"settings", settings},  {"started", started},
            {"finished", finished},  {"outputs", outputs},
            {"timings", timings},    {"status", status}};
  }

  void save(const std::string& path) {
    if (finished.empty()) finished = utc_timestamp();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    out << to_json().dump(2) << '\n';
  }
};

}  // namespace dpost
