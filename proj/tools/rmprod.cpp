#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "rmprod/runner.hpp"
#include "rmprod/version.hpp"

// exit codes: 0 success, 2 config/usage rejected, 3 batch finished but some
// replicas failed (details in manifest.json)
int main(int argc, char** argv) {
  CLI::App app{"random-matrix product and strip-spectrum laboratory"};
  app.set_version_flag("--version", rmprod::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir;

  CLI::App* describe = app.add_subcommand(
      "describe", "resolve the configured model and print its report");
  describe->add_option("config", config_path, "experiment config file")
      ->required();

  CLI::App* run =
      app.add_subcommand("run", "execute the configured experiment");
  run->add_option("config", config_path, "experiment config file")->required();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the master seed");
  CLI::Option* workers_opt =
      run->add_option("--workers", workers, "override the worker count")
          ->check(CLI::PositiveNumber);
  CLI::Option* out_opt =
      run->add_option("--out", out_dir, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    rmprod::ExperimentConfig cfg = rmprod::load_config_file(config_path);
    if (describe->parsed()) {
      std::cout << rmprod::describe_report(cfg);
      return 0;
    }
    if (seed_opt->count() > 0) {
      cfg.seed = seed;
      cfg.echo["seed"] = std::to_string(seed);
    }
    if (workers_opt->count() > 0) {
      cfg.workers = workers;
      cfg.echo["workers"] = std::to_string(workers);
    }
    if (out_opt->count() > 0) {
      cfg.output_dir = out_dir;
      cfg.echo["output_dir"] = out_dir;
    }
    const rmprod::RunManifest man = rmprod::run_experiment(cfg);
    std::cout << "pipeline = " << man.pipeline << "\n";
    std::cout << "output_dir = " << cfg.output_dir << "\n";
    for (const auto& [name, digest] : man.outputs)
      std::cout << "wrote " << name << " (fnv1a64 " << digest << ")\n";
    int failed = 0;
    for (const auto& st : man.replicas)
      if (!st.ok) {
        if (failed++ < 10)
          std::cerr << "replica " << st.index << " failed: " << st.error
                    << "\n";
      }
    if (failed > 0) {
      std::cerr << failed << " of " << man.replicas.size()
                << " replicas failed\n";
      return 3;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
