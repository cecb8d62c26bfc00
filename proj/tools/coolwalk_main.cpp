#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "coolwalk/experiments.hpp"

namespace {

// Precedence: command-line flag > COOLWALK_* environment variable > config.
void apply_overrides(coolwalk::ExperimentConfig& cfg, const CLI::Option* seed_opt,
                     std::uint64_t seed, const CLI::Option* threads_opt, int threads,
                     const CLI::Option* out_opt, const std::string& out) {
  if (const char* v = std::getenv("COOLWALK_SEED")) cfg.seed = std::strtoull(v, nullptr, 10);
  if (const char* v = std::getenv("COOLWALK_THREADS")) cfg.threads = std::atoi(v);
  if (const char* v = std::getenv("COOLWALK_OUT")) cfg.out_dir = v;
  if (seed_opt->count() > 0) cfg.seed = seed;
  if (threads_opt->count() > 0) cfg.threads = threads;
  if (out_opt->count() > 0) cfg.out_dir = out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coolwalk: random walks in static and cooling random environments"};
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  app.add_option("command", command,
                 "one of: calibrate rwre-sim rwre-oracle cooling-build rwcre-sim "
                 "limit-check k2-constants beta-seq emit-plot-data")
      ->required();
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker thread count");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    const coolwalk::Json root = coolwalk::load_json_file(config_path);
    coolwalk::ExperimentConfig cfg =
        coolwalk::parse_config(root, coolwalk::command_sections());
    apply_overrides(cfg, seed_opt, seed, threads_opt, threads, out_opt, out_dir);
    const coolwalk::CommandResult result = coolwalk::run_command(command, cfg);
    std::printf("%s\n", result.record.dump().c_str());
    return result.exit_code;
  } catch (const coolwalk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
