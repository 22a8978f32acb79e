#include <CLI11.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "oscmarket/commands.hpp"
#include "oscmarket/errors.hpp"

namespace oscmarket {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled-oscillator simulator for sector networks linked by goods markets",
               "oscmarket"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  app.add_option("--config", config_path, "Scenario file");
  app.add_option("--out", out_dir, "Output directory (overrides run.output_dir)");
  app.add_flag("--quiet", quiet, "Only print errors and headline numbers");

  auto* stationary =
      app.add_subcommand("stationary", "Analytic stationary profile of a driven chain");
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and summarise it");

  auto* calibrate =
      app.add_subcommand("calibrate", "Fit chain couplings to observed sector phases");
  std::string phases_path;
  double net_input = 1.0;
  calibrate->add_option("--phases", phases_path, "CSV with index,theta_observed")->required();
  calibrate->add_option("--P", net_input, "Endpoint net input P");

  auto* sweep = app.add_subcommand("sweep", "Independent runs over one parameter");
  std::string sweep_param;
  std::vector<double> sweep_values;
  unsigned workers = 0;
  sweep->add_option("--param", sweep_param, "coupling_scale | shock_magnitude | epsilon_d")
      ->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->delimiter(',');
  sweep->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitConfig);
  }

  Console console{out, err, quiet};

  if (calibrate->parsed()) {
    return cmd_calibrate(phases_path, net_input, out_dir.empty() ? "." : out_dir, console);
  }

  if (config_path.empty()) {
    err << "config error: --config is required for this subcommand\n";
    return kExitConfig;
  }
  ScenarioConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::filesystem::path target =
      out_dir.empty() ? config.output_dir : std::filesystem::path(out_dir);

  if (stationary->parsed()) return cmd_stationary(config, target, console);
  if (simulate->parsed()) return cmd_simulate(config, target, console);

  try {
    return cmd_sweep(config, parse_sweep_parameter(sweep_param), sweep_values, target, console,
                     workers);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace oscmarket
