// Batch driver for the magnetoelastic experiments.  Reads a JSON
// configuration, runs the selected experiment, and writes results.csv,
// manifest.json and optional VTK snapshots into the output directory.
// Exit status: 0 success, 2 configuration error, 3 numeric failure.
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "magelas/config.hpp"

int main(int argc, char **argv) {
  CLI::App app{"magnetoelastic experiment driver"};

  std::string config_path;
  std::string out;
  bool snapshots = false;
  int threads = 0;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "JSON experiment configuration")
      ->required();
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_flag("--snapshots", snapshots, "also write VTK field snapshots");
  app.add_option("--threads", threads, "worker threads for the reductions");
  CLI::Option *seed_opt =
      app.add_option("--seed", seed, "RNG seed (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  magelas::ExperimentConfig config;
  try {
    config = magelas::load_config(config_path);
  } catch (const std::exception &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  if (!out.empty())
    config.outdir = out;
  if (snapshots)
    config.snapshots = true;
  if (seed_opt->count() > 0)
    config.seed = seed;
  if (threads > 0)
    magelas::set_thread_count(threads);

  return magelas::run_experiment(config, std::cerr);
}
