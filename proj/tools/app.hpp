#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilcshape/loopshape.hpp"
#include "ilcshape/plant_oracle.hpp"
#include "ilcshape/reduction.hpp"
#include "ilcshape/validation.hpp"

namespace ilcshape::app {

struct PlantSource {
  std::optional<RationalTf> model;   // inline transfer function
  std::vector<std::string> command;  // external process speaking the trial protocol
};

struct PipelineConfig {
  double sample_rate_hz = 1.0;
  PlantSource plant;
  RationalTf desired_loop_gain;
  LoopShapeConfig loopshape;
  OrderSelection reduction;
  std::size_t reduction_grid = 4096;
  double validation_horizon_s = 0.1;
  std::size_t margin_grid = 16384;
  DesignSpec spec;
  std::filesystem::path output_dir = "out";
  std::filesystem::path config_dir = ".";
};

/// Parses and validates the JSON configuration; throws ConfigError.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& config_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& c);

std::unique_ptr<PlantOracle> make_oracle(const PipelineConfig& c);

enum class ExitCode : int { ok = 0, spec_failure = 2, numerical_failure = 3, config_error = 4 };

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::size_t> horizon;
};

/// Runs a subcommand ("probe", "learn-inverse", "shape", "reduce", "validate",
/// "full"), writing artifacts plus a manifest. Returns the exit code.
int run_command(const std::string& command, const RunOptions& options);

std::string sha256_hex(const std::string& data);

}  // namespace ilcshape::app
