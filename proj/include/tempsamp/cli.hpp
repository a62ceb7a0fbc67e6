#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tempsamp/environment.hpp"
#include "tempsamp/trainer.hpp"

namespace tempsamp {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

struct ExperimentConfig {
  TrainConfig train;
  DatasetParams dataset;
  std::filesystem::path out_dir = "runs/default";

  void validate() const;
};

/// Reads {"train", "shaping", "dataset", "output": {"out_dir"}}; throws kConfigInvalid.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Zero-weight policy sized for the dataset parameters.
IntervalPolicy initial_policy(const DatasetParams& params);

struct RunOutput {
  TrainResult result;
  std::vector<StepRecord> log;
};

/// Generates the dataset and trains; the in-memory equivalent of `tempsamp train`.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// CSV rows "r,shaped" over an evenly spaced grid on [0, r_max] plus the exact tau row.
std::vector<std::pair<double, double>> shape_table(const ShapingConfig& cfg, std::size_t resolution);

/// Entry point behind the `tempsamp` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tempsamp
