#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coolwalk/cooling.hpp"
#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"

namespace coolwalk {

using Json = nlohmann::ordered_json;

struct HorizonSpec {
  enum class Kind { kList, kTauOf, kOscillation } kind = Kind::kList;
  std::vector<std::int64_t> values;  // n values or tau arguments
  int osc_j = 0;
  std::vector<double> osc_t;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::int64_t replicas = 0;
  int threads = 0;  // 0: use default
  std::string out_dir = ".";
  std::optional<Json> env;
  std::optional<Json> cooling;
  std::optional<HorizonSpec> horizon;
  Json command_opts;  // the command-specific section, if any
  Json raw;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  fail("config", where + ": " + what);
}

inline void check_keys(const Json& obj, const std::string& where,
                       const std::set<std::string>& allowed,
                       const std::set<std::string>& required) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      config_fail(where + "/" + key, "unknown key");
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) config_fail(where, "missing required key '" + key + "'");
  }
}

inline double num_at(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    config_fail(where + "/" + key, "expected a number");
  }
  return obj[key].get<double>();
}

inline std::int64_t int_at(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    config_fail(where + "/" + key, "expected an integer");
  }
  return obj[key].get<std::int64_t>();
}

inline int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline Json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::config_fail(name + ":" + std::to_string(detail::line_of_offset(text, e.byte)),
                        e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::config_fail(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Section builders

inline EnvDist env_from_config(const Json& env) {
  const std::string where = "/env";
  detail::check_keys(env, where, {"family", "params", "target_kappa"}, {"family", "params"});
  const std::string family = env["family"].is_string() ? env["family"].get<std::string>() : "";
  const Json& params = env["params"];
  const bool has_target = env.contains("target_kappa");
  const double target = has_target ? detail::num_at(env, where, "target_kappa") : 0.0;
  if (family == "twopoint") {
    detail::check_keys(params, where + "/params", {"omega_hi", "omega_lo", "p"},
                       {"omega_hi", "omega_lo"});
    const double hi = detail::num_at(params, where + "/params", "omega_hi");
    const double lo = detail::num_at(params, where + "/params", "omega_lo");
    if (params.contains("p")) {
      if (has_target) detail::config_fail(where, "give either p or target_kappa, not both");
      return EnvDist::make(TwoPoint{hi, lo, detail::num_at(params, where + "/params", "p")});
    }
    if (!has_target) detail::config_fail(where, "twopoint needs p or target_kappa");
    return calibrate_to_kappa(TwoPointTemplate{hi, lo}, target);
  }
  if (family == "beta") {
    detail::check_keys(params, where + "/params", {"a", "b"}, {"b"});
    const double b = detail::num_at(params, where + "/params", "b");
    if (params.contains("a")) {
      if (has_target) detail::config_fail(where, "give either a or target_kappa, not both");
      return EnvDist::make(BetaLaw{detail::num_at(params, where + "/params", "a"), b});
    }
    if (!has_target) detail::config_fail(where, "beta needs a or target_kappa");
    return calibrate_to_kappa(BetaTemplate{b}, target);
  }
  if (family == "discrete") {
    detail::check_keys(params, where + "/params", {"omega", "p"}, {"omega", "p"});
    Discrete d;
    if (!params["omega"].is_array() || !params["p"].is_array()) {
      detail::config_fail(where + "/params", "omega and p must be arrays");
    }
    for (const auto& w : params["omega"]) d.omega.push_back(w.get<double>());
    for (const auto& q : params["p"]) d.prob.push_back(q.get<double>());
    if (has_target) detail::config_fail(where, "discrete family has no free parameter");
    return EnvDist::make(d);
  }
  detail::config_fail(where + "/family", "unknown family '" + family + "'");
}

inline CoolingMap cooling_from_config(const Json& cooling) {
  const std::string where = "/cooling";
  detail::check_keys(cooling, where, {"family", "params", "file"}, {"family"});
  const std::string family =
      cooling["family"].is_string() ? cooling["family"].get<std::string>() : "";
  const Json params = cooling.contains("params") ? cooling["params"] : Json::object();
  const std::string pwhere = where + "/params";
  if (family == "constant") {
    detail::check_keys(params, pwhere, {"T"}, {"T"});
    return CoolingMap(Constant{detail::int_at(params, pwhere, "T")});
  }
  if (family == "polynomial") {
    detail::check_keys(params, pwhere, {"A", "alpha"}, {"A", "alpha"});
    return CoolingMap(Polynomial{detail::num_at(params, pwhere, "A"),
                                 detail::num_at(params, pwhere, "alpha")});
  }
  if (family == "exponential") {
    detail::check_keys(params, pwhere, {"C", "c"}, {"C", "c"});
    return CoolingMap(Exponential{detail::num_at(params, pwhere, "C"),
                                  detail::num_at(params, pwhere, "c")});
  }
  if (family == "superexp") {
    detail::check_keys(params, pwhere, {"c"}, {"c"});
    return CoolingMap(SuperExp{detail::num_at(params, pwhere, "c")});
  }
  if (family == "interweaved") {
    detail::check_keys(params, pwhere, {"kappa"}, {"kappa"});
    return CoolingMap(InterweavedMix{detail::num_at(params, pwhere, "kappa")});
  }
  if (family == "oscillation") {
    detail::check_keys(params, pwhere, {}, {});
    return CoolingMap(OscillationK2{});
  }
  if (family == "custom") {
    Custom c;
    if (cooling.contains("file")) {
      std::ifstream in(cooling["file"].get<std::string>());
      if (!in) detail::config_fail(where + "/file", "cannot open increment file");
      std::int64_t t;
      while (in >> t) c.increments.push_back(t);
    } else {
      detail::check_keys(params, pwhere, {"increments"}, {"increments"});
      for (const auto& t : params["increments"]) c.increments.push_back(t.get<std::int64_t>());
    }
    if (c.increments.empty()) detail::config_fail(where, "custom map has no increments");
    return CoolingMap(c);
  }
  if (family == "designed") {
    detail::check_keys(params, pwhere, {"kappa", "j_max", "lambda_star"},
                       {"kappa", "j_max", "lambda_star"});
    const double kappa = detail::num_at(params, pwhere, "kappa");
    const int j_max = static_cast<int>(detail::int_at(params, pwhere, "j_max"));
    const Json& lam = params["lambda_star"];
    if (lam.is_array()) {
      std::vector<double> values;
      for (const auto& v : lam) values.push_back(v.get<double>());
      return construct_mixture_map(values, kappa, j_max).map;
    }
    detail::check_keys(lam, pwhere + "/lambda_star", {"type", "ratio", "scale"}, {"type"});
    if (lam["type"].get<std::string>() != "geometric") {
      detail::config_fail(pwhere + "/lambda_star", "unknown lambda* generator");
    }
    const double ratio = detail::num_at(lam, pwhere + "/lambda_star", "ratio");
    const double scale = lam.contains("scale")
                             ? detail::num_at(lam, pwhere + "/lambda_star", "scale")
                             : std::sqrt(1.0 - ratio * ratio);
    auto fn = [ratio, scale](int k) { return scale * std::pow(ratio, k); };
    return construct_mixture_map(fn, kappa, j_max).map;
  }
  detail::config_fail(where + "/family", "unknown family '" + family + "'");
}

inline HorizonSpec horizon_from_config(const Json& h) {
  const std::string where = "/horizon";
  detail::check_keys(h, where, {"n", "tau_of", "oscillation"}, {});
  HorizonSpec spec;
  int given = 0;
  if (h.contains("n")) {
    ++given;
    spec.kind = HorizonSpec::Kind::kList;
    for (const auto& v : h["n"]) spec.values.push_back(v.get<std::int64_t>());
  }
  if (h.contains("tau_of")) {
    ++given;
    spec.kind = HorizonSpec::Kind::kTauOf;
    for (const auto& v : h["tau_of"]) spec.values.push_back(v.get<std::int64_t>());
  }
  if (h.contains("oscillation")) {
    ++given;
    spec.kind = HorizonSpec::Kind::kOscillation;
    const Json& o = h["oscillation"];
    detail::check_keys(o, where + "/oscillation", {"j", "t"}, {"j", "t"});
    spec.osc_j = static_cast<int>(detail::int_at(o, where + "/oscillation", "j"));
    for (const auto& v : o["t"]) spec.osc_t.push_back(v.get<double>());
  }
  if (given != 1) detail::config_fail(where, "give exactly one of n, tau_of, oscillation");
  if (spec.values.empty() && spec.osc_t.empty()) detail::config_fail(where, "horizon is empty");
  return spec;
}

inline std::vector<std::int64_t> resolve_horizons(const HorizonSpec& spec,
                                                  const CoolingMap& map) {
  std::vector<std::int64_t> out;
  switch (spec.kind) {
    case HorizonSpec::Kind::kList:
      out = spec.values;
      break;
    case HorizonSpec::Kind::kTauOf:
      for (const std::int64_t k : spec.values) out.push_back(map.tau(k));
      break;
    case HorizonSpec::Kind::kOscillation:
      for (const double t : spec.osc_t) out.push_back(oscillation_horizon(map, spec.osc_j, t));
      break;
  }
  return out;
}

// Top-level parse: global keys plus at most one command section.
inline ExperimentConfig parse_config(const Json& root,
                                     const std::set<std::string>& command_sections) {
  std::set<std::string> allowed = {"seed", "replicas", "threads", "out",
                                   "env",  "cooling",  "horizon"};
  allowed.insert(command_sections.begin(), command_sections.end());
  detail::check_keys(root, "/", allowed, {"seed"});
  ExperimentConfig cfg;
  cfg.raw = root;
  cfg.seed = static_cast<std::uint64_t>(detail::int_at(root, "/", "seed"));
  if (root.contains("replicas")) cfg.replicas = detail::int_at(root, "/", "replicas");
  if (root.contains("threads")) cfg.threads = static_cast<int>(detail::int_at(root, "/", "threads"));
  if (root.contains("out")) cfg.out_dir = root["out"].get<std::string>();
  if (root.contains("env")) cfg.env = root["env"];
  if (root.contains("cooling")) cfg.cooling = root["cooling"];
  if (root.contains("horizon")) cfg.horizon = horizon_from_config(root["horizon"]);
  for (const auto& section : command_sections) {
    if (root.contains(section)) cfg.command_opts = root[section];
  }
  return cfg;
}

}  // namespace coolwalk
