#include <cstring>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "app.hpp"
#include "ilcshape/errors.hpp"

using ilcshape::app::ExitCode;

int main(int argc, char** argv) {
  // --seedless is a bare switch; any attached value is an error
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--seedless=", 11) == 0) {
      std::cerr << "error: --seedless takes no value\n";
      return static_cast<int>(ExitCode::config_error);
    }
  }

  CLI::App cli{"Model-free loop shaping with iterative learning control"};
  cli.require_subcommand(1, 1);
  std::string config;
  std::string out_dir;
  std::size_t horizon = 0;
  bool seedless = false;
  cli.add_option("--config", config, "Pipeline configuration (JSON)")->required();
  cli.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* horizon_opt = cli.add_option("--horizon", horizon, "Horizon N override (even; also sets the inverse half length to N/2)");
  cli.add_flag("--seedless", seedless, "Accepted for compatibility; the pipeline uses no RNG");
  cli.fallthrough();
  cli.add_subcommand("probe", "Measure the plant impulse response and relative order");
  cli.add_subcommand("learn-inverse", "Learn the inverse FIR learning filter");
  cli.add_subcommand("shape", "Learn the FIR controller by impulse-response tracking");
  cli.add_subcommand("reduce", "Reduce the FIR controller to a low-order IIR controller");
  cli.add_subcommand("validate", "Closed-loop step and margin checks against the design spec");
  cli.add_subcommand("full", "probe, learn-inverse, shape, reduce and validate in one run");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::config_error);
  }

  ilcshape::app::RunOptions opts;
  opts.config_path = config;
  if (!out_dir.empty()) opts.output_dir = out_dir;
  if (horizon_opt->count() > 0) opts.horizon = horizon;
  const std::string command = cli.get_subcommands().front()->get_name();

  try {
    return ilcshape::app::run_command(command, opts);
  } catch (const ilcshape::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const ilcshape::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerical_failure);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerical_failure);
  }
}
