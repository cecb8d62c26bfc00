#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coolwalk/config.hpp"
#include "coolwalk/exact_pmf.hpp"
#include "coolwalk/io.hpp"
#include "coolwalk/k2.hpp"
#include "coolwalk/lambda.hpp"
#include "coolwalk/mittag_leffler.hpp"
#include "coolwalk/rwcre.hpp"
#include "coolwalk/stats.hpp"
#include "coolwalk/variance_lookup.hpp"
#include "coolwalk/walk.hpp"

namespace coolwalk {

struct CommandResult {
  int exit_code = 0;
  Json record;
};

namespace detail {

inline int threads_of(const ExperimentConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : default_threads();
}

inline std::int64_t replicas_of(const ExperimentConfig& cfg) {
  if (cfg.replicas < 1) config_fail("/replicas", "this command needs replicas >= 1");
  return cfg.replicas;
}

inline EnvDist env_of(const ExperimentConfig& cfg) {
  if (!cfg.env) config_fail("/env", "this command needs an environment section");
  return env_from_config(*cfg.env);
}

inline CoolingMap cooling_of(const ExperimentConfig& cfg) {
  if (!cfg.cooling) config_fail("/cooling", "this command needs a cooling section");
  return cooling_from_config(*cfg.cooling);
}

inline std::vector<std::int64_t> horizons_of(const ExperimentConfig& cfg, const CoolingMap& map) {
  if (!cfg.horizon) config_fail("/horizon", "this command needs a horizon section");
  return resolve_horizons(*cfg.horizon, map);
}

inline Json moments_json(const MomentEstimate& est) {
  return Json{{"n", est.n},
              {"mean", est.mean},
              {"var", est.variance},
              {"stderr_mean", est.stderr_mean},
              {"stderr_var", est.stderr_var},
              {"replicas", est.replicas},
              {"seed", est.seed}};
}

}  // namespace detail

inline Json k2_to_json(const K2Constants& c) {
  return Json{{"v", c.v},
              {"total", c.total},
              {"b_sq", c.b_sq},
              {"k0v", c.k0v},
              {"beta", c.beta},
              {"stderr_total", c.stderr_total},
              {"stderr_b_sq", c.stderr_b_sq},
              {"stderr_k0v", c.stderr_k0v},
              {"stderr_beta", c.stderr_beta},
              {"k0_tail", c.k0_tail},
              {"k0v_tail", c.k0v_tail},
              {"stderr_k0v_tail", c.stderr_k0v_tail},
              {"grid", c.grid},
              {"replicas", c.replicas},
              {"seed", c.seed}};
}

inline K2Constants k2_from_json(const Json& j) {
  K2Constants c;
  c.v = j.at("v").get<double>();
  c.total = j.at("total").get<double>();
  c.b_sq = j.at("b_sq").get<double>();
  c.k0v = j.at("k0v").get<double>();
  c.beta = j.at("beta").get<double>();
  c.stderr_total = j.value("stderr_total", 0.0);
  c.stderr_b_sq = j.value("stderr_b_sq", 0.0);
  c.stderr_k0v = j.value("stderr_k0v", 0.0);
  c.stderr_beta = j.value("stderr_beta", 0.0);
  c.k0_tail = j.value("k0_tail", 0.0);
  c.k0v_tail = j.value("k0v_tail", 0.0);
  c.stderr_k0v_tail = j.value("stderr_k0v_tail", 0.0);
  if (j.contains("grid")) c.grid = j["grid"].get<std::vector<std::int64_t>>();
  c.replicas = j.value("replicas", std::int64_t{0});
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

// ---------------------------------------------------------------------------
// Commands. Each writes a JSON record (plus CSV curves) under cfg.out_dir and
// returns the record with an exit code: 0 success, 2 statistical rejection.

inline CommandResult cmd_calibrate(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  Json rec{{"command", "calibrate"},
           {"kappa", dist.kappa()},
           {"speed", dist.speed()},
           {"rho_mean", dist.rho_moment(1.0)},
           {"log_rho_mean", dist.log_rho_mean()},
           {"lattice_flag", dist.lattice_flagged()},
           {"ellipticity_finite", dist.ellipticity_finite()},
           {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

inline CommandResult cmd_rwre_sim(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const std::int64_t replicas = detail::replicas_of(cfg);
  bool dump = cfg.command_opts.is_object() && cfg.command_opts.value("dump_endpoints", false);
  if (!cfg.horizon || cfg.horizon->kind != HorizonSpec::Kind::kList) {
    detail::config_fail("/horizon", "rwre-sim takes a plain n list");
  }
  Json all = Json::array();
  for (const std::int64_t n : cfg.horizon->values) {
    const auto z = mc_endpoints(dist, n, replicas, sub_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                                detail::threads_of(cfg));
    const auto est = moments_of(z, n, cfg.seed);
    all.push_back(detail::moments_json(est));
    if (dump) {
      CsvWriter csv(std::filesystem::path(cfg.out_dir) / ("endpoints_n" + std::to_string(n) + ".csv"),
                    {"replica", "z"});
      for (std::size_t i = 0; i < z.size(); ++i) {
        csv.row_raw(std::to_string(i) + "," + std::to_string(z[i]));
      }
    }
  }
  Json rec{{"command", "rwre-sim"}, {"kappa", dist.kappa()}, {"moments", all}, {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

inline CommandResult cmd_rwre_oracle(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const std::int64_t replicas = detail::replicas_of(cfg);
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/oracle", {"n", "tv_threshold"}, {"n"});
  const int n = static_cast<int>(detail::int_at(opts, "/oracle", "n"));
  const double threshold = opts.value("tv_threshold", 0.01);
  const auto pmf = exact_annealed_pmf(dist, n);
  const auto z = mc_endpoints(dist, n, replicas, cfg.seed, detail::threads_of(cfg));
  const double tv = tv_distance(z, pmf, n);
  {
    std::vector<double> hist(pmf.size(), 0.0);
    for (const std::int32_t v : z) hist[static_cast<std::size_t>(v + n)] += 1.0;
    CsvWriter csv(std::filesystem::path(cfg.out_dir) / "oracle_pmf.csv",
                  {"z", "p_exact", "p_empirical"});
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      csv.row({static_cast<double>(static_cast<std::int64_t>(i) - n), pmf[i],
               hist[i] / static_cast<double>(replicas)});
    }
  }
  const bool reject = !(tv < threshold);
  Json rec{{"command", "rwre-oracle"}, {"n", n},       {"replicas", replicas},
           {"tv_distance", tv},        {"threshold", threshold}, {"reject", reject},
           {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {reject ? 2 : 0, rec};
}

inline CommandResult cmd_cooling_build(const ExperimentConfig& cfg) {
  if (!cfg.cooling) detail::config_fail("/cooling", "cooling-build needs a cooling section");
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/build", {"k_max"}, {});
  const std::int64_t k_max = opts.value("k_max", std::int64_t{64});
  const Json& cooling = *cfg.cooling;
  const std::filesystem::path out(cfg.out_dir);
  // The designer emits the increments plus a sidecar with the design data.
  if (cooling.value("family", "") == "designed") {
    const Json& params = cooling.at("params");
    const double kappa = params.at("kappa").get<double>();
    const int j_max = params.at("j_max").get<int>();
    DesignedMixture designed = [&] {
      if (params.at("lambda_star").is_array()) {
        return construct_mixture_map(params["lambda_star"].get<std::vector<double>>(), kappa,
                                     j_max);
      }
      const double ratio = params["lambda_star"].at("ratio").get<double>();
      const double scale = params["lambda_star"].contains("scale")
                               ? params["lambda_star"]["scale"].get<double>()
                               : std::sqrt(1.0 - ratio * ratio);
      auto fn = [ratio, scale](int k) { return scale * std::pow(ratio, k); };
      return construct_mixture_map(fn, kappa, j_max);
    }();
    {
      std::ofstream inc(out / "cooling_map.txt");
      const auto& d = std::get<Designed>(designed.map.family());
      for (const std::int64_t t : d.increments) inc << t << '\n';
    }
    Json sidecar{{"kappa", kappa},
                 {"case", designed.case_id},
                 {"lambda_star_head", designed.lambda_head},
                 {"block_ends", designed.block_ends},
                 {"n_j", designed.n_j}};
    write_json(out / "cooling_map.json", sidecar);
    Json rec{{"command", "cooling-build"}, {"designed", sidecar}, {"seed", cfg.seed}};
    append_result(cfg.out_dir, rec);
    return {0, rec};
  }
  const CoolingMap map = detail::cooling_of(cfg);
  {
    std::ofstream inc(out / "cooling_map.txt");
    for (std::int64_t k = 1; k <= k_max; ++k) inc << map.increment(k) << '\n';
  }
  {
    CsvWriter csv(out / "cooling_tau.csv", {"k", "T_k", "tau_k"});
    for (std::int64_t k = 1; k <= k_max; ++k) {
      csv.row({static_cast<double>(k), static_cast<double>(map.increment(k)),
               static_cast<double>(map.tau(k))});
    }
  }
  Json rec{{"command", "cooling-build"}, {"k_max", k_max}, {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

inline CommandResult cmd_rwcre_sim(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const CoolingMap map = detail::cooling_of(cfg);
  const std::int64_t replicas = detail::replicas_of(cfg);
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/rwcre", {"dump_samples", "var_replicas"}, {});
  const bool dump = opts.value("dump_samples", false);
  const std::int64_t var_replicas = opts.value("var_replicas", std::int64_t{20000});
  VarianceLookup lookup(dist, var_replicas, sub_seed(cfg.seed, 0xb10cu), detail::threads_of(cfg));
  Json all = Json::array();
  for (const std::int64_t n : detail::horizons_of(cfg, map)) {
    const XStats stats = mc_stats_x(dist, map, n, replicas,
                                    sub_seed(cfg.seed, static_cast<std::uint64_t>(n)), lookup,
                                    detail::threads_of(cfg));
    Json entry = detail::moments_json(stats.moments);
    entry["independence_var"] = stats.independence_variance;
    entry["ell"] = map.ell(n);
    all.push_back(entry);
    if (dump) {
      const auto samples =
          normalized_samples(dist, map, n, replicas, sub_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                             Scaling::kStdev, 1.0, detail::threads_of(cfg));
      CsvWriter csv(std::filesystem::path(cfg.out_dir) / ("samples_n" + std::to_string(n) + ".csv"),
                    {"replica", "value"});
      for (std::size_t i = 0; i < samples.size(); ++i) {
        csv.row_raw(std::to_string(i) + "," + format_double(samples[i]));
      }
    }
  }
  Json rec{{"command", "rwcre-sim"}, {"kappa", dist.kappa()}, {"stats", all}, {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

inline CommandResult cmd_limit_check(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const CoolingMap map = detail::cooling_of(cfg);
  const std::int64_t replicas = detail::replicas_of(cfg);
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/limit_check",
                     {"target", "alpha", "reference_multiple", "smooth", "trunc_k"}, {"target"});
  const std::string target = opts.at("target").get<std::string>();
  const double alpha = opts.value("alpha", 0.01);
  const std::int64_t ref_multiple = opts.value("reference_multiple", std::int64_t{10});
  const bool smooth = opts.value("smooth", false);
  const auto horizons = detail::horizons_of(cfg, map);
  if (horizons.size() != 1) detail::config_fail("/horizon", "limit-check takes one horizon");
  const std::int64_t n = horizons.front();

  const auto samples = normalized_samples(dist, map, n, replicas, cfg.seed, Scaling::kStdev, 1.0,
                                          detail::threads_of(cfg), smooth);
  KsResult ks;
  if (target == "normal") {
    ks = ks_one_sample(samples, [](double x) { return normal_cdf(x); });
  } else if (target == "mixture_exponential" || target == "ml") {
    const double kappa = dist.kappa();
    if (!(kappa > 0.0 && kappa < 1.0)) {
      detail::config_fail("/limit_check", "mixture targets need kappa in (0,1)");
    }
    LambdaVector lam;
    if (target == "ml") {
      lam = LambdaVector(std::vector<double>{1.0});
    } else {
      const auto* fam = std::get_if<Exponential>(&map.family());
      if (!fam) detail::config_fail("/limit_check", "mixture_exponential needs an exponential map");
      lam = lambda_star_closed_form(LambdaStarExponential{fam->c}, kappa);
    }
    const std::size_t trunc_k = opts.value("trunc_k", std::size_t{64});
    std::vector<double> ref(static_cast<std::size_t>(replicas * ref_multiple));
    const std::uint64_t ref_seed = sub_seed(cfg.seed, 0x4ef5u);
    for_each_block(static_cast<std::int64_t>(ref.size()), kDefaultBlockSize,
                   detail::threads_of(cfg), [&](std::int64_t, std::int64_t b, std::int64_t e) {
                     for (std::int64_t i = b; i < e; ++i) {
                       RngStream rng = derive_stream(ref_seed, static_cast<std::uint64_t>(i));
                       ref[static_cast<std::size_t>(i)] =
                           sample_mixture(lam, kappa, 1.0, rng, trunc_k);
                     }
                   });
    ks = ks_two_sample(samples, ref);
  } else {
    detail::config_fail("/limit_check/target", "unknown target '" + target + "'");
  }
  const bool reject = ks.p_value < alpha;
  Json rec{{"command", "limit-check"},
           {"n", n},
           {"replicas", replicas},
           {"target", target},
           {"ks_statistic", ks.statistic},
           {"p_value", ks.p_value},
           {"alpha", alpha},
           {"reject", reject},
           {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {reject ? 2 : 0, rec};
}

inline CommandResult cmd_k2_constants(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const std::int64_t replicas = detail::replicas_of(cfg);
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/k2", {"n_grid", "tail_replicas"}, {"n_grid"});
  std::vector<std::int64_t> grid = opts.at("n_grid").get<std::vector<std::int64_t>>();
  K2Options k2opts;
  if (opts.contains("tail_replicas")) {
    k2opts.tail_replicas = opts["tail_replicas"].get<std::int64_t>();
  }
  const K2Constants constants =
      estimate_k2_constants(dist, grid, replicas, cfg.seed, detail::threads_of(cfg), k2opts);
  write_json(std::filesystem::path(cfg.out_dir) / "k2_constants.json", k2_to_json(constants));
  Json rec{{"command", "k2-constants"}, {"constants", k2_to_json(constants)}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

inline CommandResult cmd_beta_seq(const ExperimentConfig& cfg) {
  const EnvDist dist = detail::env_of(cfg);
  const CoolingMap map = detail::cooling_of(cfg);
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/beta_seq",
                     {"mode", "constants_file", "constants", "var_replicas", "mc_cap"}, {"mode"});
  const std::string mode_name = opts.at("mode").get<std::string>();
  if (mode_name != "mc" && mode_name != "approx") {
    detail::config_fail("/beta_seq/mode", "mode must be mc or approx");
  }
  const BetaMode mode = mode_name == "mc" ? BetaMode::kMc : BetaMode::kApprox;
  K2Constants constants;
  if (opts.contains("constants_file")) {
    constants = k2_from_json(load_json_file(opts["constants_file"].get<std::string>()));
  } else if (opts.contains("constants")) {
    constants = k2_from_json(opts["constants"]);
  } else {
    detail::config_fail("/beta_seq", "give constants_file or constants");
  }
  const std::int64_t var_replicas = opts.value("var_replicas", std::int64_t{20000});
  VarianceLookup lookup(dist, var_replicas, sub_seed(cfg.seed, 0xb10cu), detail::threads_of(cfg));
  if (mode == BetaMode::kApprox) {
    lookup.enable_asymptotic(constants.total, opts.value("mc_cap", std::int64_t{1} << 17));
  }
  const auto ns = detail::horizons_of(cfg, map);
  const auto points = beta_n_sequence(dist, map, ns, constants, mode, lookup);
  {
    CsvWriter csv(std::filesystem::path(cfg.out_dir) / "beta_n.csv", {"n", "beta_n", "mode"});
    for (const auto& pt : points) {
      csv.row_raw(std::to_string(pt.n) + "," + format_double(pt.beta_n) + "," + mode_name);
    }
  }
  Json arr = Json::array();
  for (const auto& pt : points) {
    arr.push_back(Json{{"n", pt.n},
                       {"beta_n", pt.beta_n},
                       {"b_tilde", pt.b_tilde},
                       {"fallback_used", pt.fallback_used}});
  }
  Json rec{{"command", "beta-seq"}, {"mode", mode_name}, {"points", arr}, {"seed", cfg.seed}};
  append_result(cfg.out_dir, rec);
  return {0, rec};
}

// Plot-ready curves, pure CSV.
inline CommandResult cmd_emit_plot_data(const ExperimentConfig& cfg) {
  Json opts = cfg.command_opts.is_object() ? cfg.command_opts : Json::object();
  detail::check_keys(opts, "/plot", {"kind"}, {"kind"});
  const std::string kind = opts.at("kind").get<std::string>();
  const std::filesystem::path out(cfg.out_dir);
  if (kind == "moments_vs_n") {
    const EnvDist dist = detail::env_of(cfg);
    const std::int64_t replicas = detail::replicas_of(cfg);
    if (!cfg.horizon) detail::config_fail("/horizon", "moments_vs_n needs horizons");
    CsvWriter csv(out / "moments_vs_n.csv", {"n", "mean", "var", "stderr_mean", "stderr_var"});
    for (const std::int64_t n : cfg.horizon->values) {
      const auto est = mc_moments(dist, n, replicas, sub_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                                  detail::threads_of(cfg));
      csv.row({static_cast<double>(n), est.mean, est.variance, est.stderr_mean, est.stderr_var});
    }
    Json rec{{"command", "emit-plot-data"}, {"kind", kind}, {"seed", cfg.seed}};
    append_result(cfg.out_dir, rec);
    return {0, rec};
  }
  if (kind == "tail_curve") {
    const EnvDist dist = detail::env_of(cfg);
    const std::int64_t replicas = detail::replicas_of(cfg);
    if (!cfg.horizon || cfg.horizon->values.size() != 1) {
      detail::config_fail("/horizon", "tail_curve takes one n");
    }
    const std::int64_t n = cfg.horizon->values.front();
    const double v = dist.speed();
    std::vector<double> xs;
    const double lo = 2.0 * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
    const double hi = static_cast<double>(n) * v * 0.75;
    for (int i = 0; i < 24; ++i) xs.push_back(lo * std::pow(hi / lo, i / 23.0));
    const auto curve = left_tail_curve(dist, n, xs, replicas, cfg.seed, detail::threads_of(cfg));
    CsvWriter csv(out / "tail_curve.csv", {"x", "p", "stderr_p", "plateau_k"});
    for (const auto& pt : curve) {
      const double k = pt.p * pt.x * pt.x / (static_cast<double>(n) * v - pt.x);
      csv.row({pt.x, pt.p, pt.stderr_p, k});
    }
    Json rec{{"command", "emit-plot-data"}, {"kind", kind}, {"seed", cfg.seed}};
    append_result(cfg.out_dir, rec);
    return {0, rec};
  }
  if (kind == "ecdf") {
    const EnvDist dist = detail::env_of(cfg);
    const CoolingMap map = detail::cooling_of(cfg);
    const auto horizons = detail::horizons_of(cfg, map);
    if (horizons.size() != 1) detail::config_fail("/horizon", "ecdf takes one horizon");
    const auto samples =
        normalized_samples(dist, map, horizons.front(), detail::replicas_of(cfg), cfg.seed,
                           Scaling::kStdev, 1.0, detail::threads_of(cfg));
    CsvWriter csv(out / "ecdf.csv", {"value", "cdf"});
    for (const auto& [x, f] : ecdf(samples)) csv.row({x, f});
    Json rec{{"command", "emit-plot-data"}, {"kind", kind}, {"seed", cfg.seed}};
    append_result(cfg.out_dir, rec);
    return {0, rec};
  }
  detail::config_fail("/plot/kind", "unknown kind '" + kind + "'");
}

inline const std::set<std::string>& command_sections() {
  static const std::set<std::string> sections{"oracle",      "rwcre",    "limit_check", "k2",
                                              "beta_seq",    "build",    "plot",        "rwre"};
  return sections;
}

inline CommandResult run_command(const std::string& command, const ExperimentConfig& cfg) {
  if (command == "calibrate") return cmd_calibrate(cfg);
  if (command == "rwre-sim") return cmd_rwre_sim(cfg);
  if (command == "rwre-oracle") return cmd_rwre_oracle(cfg);
  if (command == "cooling-build") return cmd_cooling_build(cfg);
  if (command == "rwcre-sim") return cmd_rwcre_sim(cfg);
  if (command == "limit-check") return cmd_limit_check(cfg);
  if (command == "k2-constants") return cmd_k2_constants(cfg);
  if (command == "beta-seq") return cmd_beta_seq(cfg);
  if (command == "emit-plot-data") return cmd_emit_plot_data(cfg);
  fail("config", "unknown command '" + command + "'");
}

}  // namespace coolwalk
