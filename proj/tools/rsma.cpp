#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rsma/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rsma - rate-splitting multiple access scenario runner"};
  app.require_subcommand(1);

  rsma::RunOptions options;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", options.config_path, "config file (key-value or JSON)")
      ->required();
  run->add_option("--out", options.out_dir, "output directory")
      ->default_val(".");
  run->add_option("--jobs", options.jobs, "worker threads (0 = auto)")
      ->default_val(0);
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the config's base_seed");

  CLI::App* list = app.add_subcommand("list", "print the scenario catalog");
  CLI::App* self = app.add_subcommand("selftest", "run the invariant suite");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    rsma::list_scenarios(std::cout);
    return 0;
  }
  if (self->parsed()) {
    return rsma::selftest(std::cout);
  }

  // environment overrides (CLI flags win)
  if (const char* env = std::getenv("RSMA_JOBS"); env && options.jobs == 0) {
    options.jobs = std::atoi(env);
  }
  if (*seed_opt) {
    options.seed = seed;
  } else if (const char* env = std::getenv("RSMA_SEED")) {
    options.seed = std::strtoull(env, nullptr, 10);
  }
  return rsma::run_scenario(options, std::cerr);
}
