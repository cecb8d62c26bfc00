#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coolwalk/experiments.hpp"

using namespace coolwalk;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("coolwalk_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config validation catches schema violations") {
  const auto sections = command_sections();
  CHECK_THROWS_AS(parse_config(parse_json_text(R"({"sseed": 1})", "cfg"), sections), Error);
  CHECK_THROWS_AS(parse_config(parse_json_text(R"({})", "cfg"), sections), Error);
  try {
    parse_config(parse_json_text(R"({"seed": 1, "bogus": 2})", "cfg"), sections);
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/bogus") != std::string::npos);
  }
  // malformed JSON reports a line anchor
  try {
    parse_json_text("{\n  \"seed\": 1,\n  oops\n}", "cfg.json");
    FAIL("parse error expected");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cfg.json:3") != std::string::npos);
  }
}

TEST_CASE("environment and cooling sections build objects") {
  const Json env = parse_json_text(
      R"({"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25, "p": 0.9}})",
      "env");
  CHECK(env_from_config(env).kappa() == Catch::Approx(2.0).margin(1e-9));

  const Json cal = parse_json_text(
      R"({"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25}, "target_kappa": 0.5})",
      "env");
  CHECK(env_from_config(cal).kappa() == Catch::Approx(0.5).margin(1e-7));

  CHECK_THROWS_AS(
      env_from_config(parse_json_text(R"({"family": "nope", "params": {}})", "env")), Error);

  const Json cool = parse_json_text(R"({"family": "exponential", "params": {"C": 1.0, "c": 0.5}})",
                                    "cooling");
  CHECK(cooling_from_config(cool).increment(2) == 3);
}

TEST_CASE("horizon resolution") {
  const CoolingMap map((Polynomial{1.0, 1.0}));
  HorizonSpec tau_spec;
  tau_spec.kind = HorizonSpec::Kind::kTauOf;
  tau_spec.values = {3, 5};
  CHECK(resolve_horizons(tau_spec, map) == std::vector<std::int64_t>{6, 15});

  const CoolingMap osc((OscillationK2{}));
  HorizonSpec osc_spec;
  osc_spec.kind = HorizonSpec::Kind::kOscillation;
  osc_spec.osc_j = 4;
  osc_spec.osc_t = {0.0};
  CHECK(resolve_horizons(osc_spec, osc) == std::vector<std::int64_t>{327952});
}

TEST_CASE("calibrate command writes a result record") {
  const auto out = temp_dir("calibrate");
  const Json root = parse_json_text(R"({
    "seed": 7,
    "out": ")" + out.string() + R"(",
    "env": {"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25, "p": 0.9}}
  })", "cfg");
  const auto cfg = parse_config(root, command_sections());
  const auto result = run_command("calibrate", cfg);
  CHECK(result.exit_code == 0);
  CHECK(result.record["kappa"].get<double>() == Catch::Approx(2.0).margin(1e-9));
  CHECK(result.record["lattice_flag"].get<bool>());
  const std::string lines = slurp(out / "results.jsonl");
  CHECK(lines.find("\"command\":\"calibrate\"") != std::string::npos);
}

TEST_CASE("oracle command checks the exact law") {
  const auto out = temp_dir("oracle");
  const Json root = parse_json_text(R"({
    "seed": 11,
    "replicas": 100000,
    "out": ")" + out.string() + R"(",
    "env": {"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25, "p": 0.9}},
    "oracle": {"n": 8, "tv_threshold": 0.02}
  })", "cfg");
  const auto result = run_command("rwre-oracle", parse_config(root, command_sections()));
  CHECK(result.exit_code == 0);
  CHECK(result.record["tv_distance"].get<double>() < 0.02);
  CHECK(std::filesystem::exists(out / "oracle_pmf.csv"));
}

TEST_CASE("limit-check on the unit map accepts normality") {
  const auto out = temp_dir("limitcheck");
  const Json root = parse_json_text(R"({
    "seed": 13,
    "replicas": 5000,
    "out": ")" + out.string() + R"(",
    "env": {"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25, "p": 0.9}},
    "cooling": {"family": "constant", "params": {"T": 1}},
    "horizon": {"n": [2000]},
    "limit_check": {"target": "normal", "alpha": 0.01, "smooth": true}
  })", "cfg");
  const auto result = run_command("limit-check", parse_config(root, command_sections()));
  CHECK(result.exit_code == 0);
  CHECK(result.record["p_value"].get<double>() >= 0.01);
}

TEST_CASE("rwcre-sim output is byte-identical across thread counts") {
  const auto out1 = temp_dir("det1");
  const auto out2 = temp_dir("det2");
  auto make_cfg = [&](const std::filesystem::path& out, int threads) {
    Json root = parse_json_text(R"({
      "seed": 99,
      "replicas": 6000,
      "env": {"family": "twopoint", "params": {"omega_hi": 0.75, "omega_lo": 0.25, "p": 0.9}},
      "cooling": {"family": "custom", "params": {"increments": [32, 64, 128]}},
      "horizon": {"n": [224]},
      "rwcre": {"dump_samples": true, "var_replicas": 4000}
    })", "cfg");
    root["out"] = out.string();
    root["threads"] = threads;
    return parse_config(root, command_sections());
  };
  const auto r1 = run_command("rwcre-sim", make_cfg(out1, 1));
  const auto r2 = run_command("rwcre-sim", make_cfg(out2, 3));
  CHECK(r1.exit_code == 0);
  CHECK(slurp(out1 / "samples_n224.csv") == slurp(out2 / "samples_n224.csv"));
  Json rec1 = r1.record, rec2 = r2.record;
  CHECK(rec1["stats"] == rec2["stats"]);
}

TEST_CASE("k2 constants serialize and parse") {
  K2Constants c;
  c.v = 0.25;
  c.total = 1.1;
  c.b_sq = 0.6;
  c.k0v = 0.5;
  c.beta = std::sqrt(0.6 / 1.1);
  c.grid = {1024, 2048};
  c.replicas = 1000;
  c.seed = 5;
  const K2Constants back = k2_from_json(k2_to_json(c));
  CHECK(back.v == c.v);
  CHECK(back.beta == c.beta);
  CHECK(back.grid == c.grid);
}

TEST_CASE("cooling-build exports the designed map with a sidecar") {
  const auto out = temp_dir("build");
  const Json root = parse_json_text(R"({
    "seed": 3,
    "out": ")" + out.string() + R"(",
    "cooling": {"family": "designed", "params": {"kappa": 0.5, "j_max": 4,
      "lambda_star": {"type": "geometric", "ratio": 0.5, "scale": 0.7071067811865476}}}
  })", "cfg");
  const auto result = run_command("cooling-build", parse_config(root, command_sections()));
  CHECK(result.exit_code == 0);
  CHECK(std::filesystem::exists(out / "cooling_map.txt"));
  const Json sidecar = load_json_file((out / "cooling_map.json").string());
  CHECK(sidecar["case"].get<int>() == 1);
  CHECK(sidecar["n_j"].size() == 4);
}
