#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "grevf/experiment.hpp"

namespace {

int run_fit(const std::string& config_path, const std::string& out_override,
            bool has_seed, std::uint64_t seed_override, bool verbose) {
  using namespace grevf;
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output_path = out_override;
    if (has_seed) cfg.optimizer.seed = seed_override;

    if (verbose) {
      std::cerr << "mode=" << to_string(cfg.mode) << " kernel="
                << to_string(cfg.kernel_family) << " nodes=" << cfg.resolved_nodes()
                << "\n";
    }
    const Report report = run_experiment(cfg);
    if (verbose) {
      for (const auto& [key, value] : report.results) {
        std::cerr << key << " = " << value << "\n";
      }
      std::cerr << "report written to " << cfg.output_path << "\n";
    }
    return 0;
  } catch (const ExperimentError& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_category(e) << ": " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian random element regression experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool verbose = false;

  CLI::App* fit = app.add_subcommand("fit", "run the experiment described by a config file");
  fit->add_option("config", config_path, "path to the experiment config")->required();
  fit->add_option("--out", out_override, "override the report output path");
  CLI::Option* seed_opt =
      fit->add_option("--seed", seed_override, "override the optimizer seed");
  fit->add_flag("--verbose", verbose, "log progress to stderr");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    return run_fit(config_path, out_override, seed_opt->count() > 0, seed_override,
                   verbose);
  }
  return 1;
}
