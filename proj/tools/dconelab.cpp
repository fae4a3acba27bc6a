// Batch experiment runner for the clamped-cone energy laboratory: profile
// validation, upper-bound quadrature sweeps, minimization sweeps with warm
// starts and resume, winding-number degree maps, and the exponent table.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "dcone/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dconelab - clamped cone energy scaling laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int threads_override = 0;
  std::int64_t seed_override = -1;

  app.add_option("--config", config_path, "path to the JSON config")->required();
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_option("--threads", threads_override, "worker threads (overrides config)");
  app.add_option("--seed", seed_override, "RNG seed (overrides config)");

  auto* validate = app.add_subcommand("validate-profile",
                                      "check the boundary profile admissibility");
  auto* ansatz = app.add_subcommand("ansatz-sweep",
                                    "upper-bound energies of the smoothed cone");
  auto* sweep = app.add_subcommand("minimize-sweep",
                                   "minimize the energy over the h schedule");
  auto* degree = app.add_subcommand("degree-map",
                                    "winding-number degree field and witness");
  auto* exponents = app.add_subcommand("exponents", "scaling exponent table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    dcone::ExperimentConfig cfg = dcone::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads_override > 0) cfg.threads = threads_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const std::filesystem::path out_dir = cfg.output_dir;

    if (validate->parsed()) return dcone::cmd_validate_profile(cfg, out_dir);
    if (ansatz->parsed()) return dcone::cmd_ansatz_sweep(cfg, out_dir);
    if (sweep->parsed()) return dcone::cmd_minimize_sweep(cfg, out_dir);
    if (degree->parsed()) return dcone::cmd_degree_map(cfg, out_dir);
    if (exponents->parsed()) return dcone::cmd_exponents(cfg, out_dir);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const dcone::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dcone::AdmissibilityViolation& e) {
    std::cerr << "inadmissible profile: " << e.what() << "\n";
    return 1;
  } catch (const dcone::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
