#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikegrad/data_io.hpp"
#include "spikegrad/losses.hpp"
#include "spikegrad/network.hpp"
#include "spikegrad/optim.hpp"
#include "spikegrad/srm.hpp"
#include "spikegrad/train.hpp"

namespace spikegrad {

/// Invalid configuration. The message starts with the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default target rates used when loss.kind needs rates (spike_rate,
/// van_rossum) and the loss block leaves them out.
struct RateTargets {
  double rate_true = 0.2;
  double rate_false = 0.04;
};

struct DataConfig {
  std::string train_manifest;
  std::string test_manifest;
  std::optional<SyntheticParams> synthetic;  // generated in memory, seeded from the run seed
};

struct RunConfig {
  std::string preset;  // informational
  std::string architecture;
  double dt = 1.0;  // ms
  NeuronParams neuron;
  double pool_scale = 1.1;
  LossConfig loss;
  std::optional<RateTargets> rate_defaults;
  OptimizerConfig optimizer;
  InitConfig init;
  DataConfig data;
  std::uint64_t seed = 1;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  std::string output_dir;
  std::optional<int> workers;

  /// Loss config as used for training: dt filled in, default rates applied.
  LossConfig effective_loss() const;
  /// Throws ConfigError with a key path.
  void validate() const;
};

/// Overlays `j` on `base`. Unknown keys and type errors raise ConfigError
/// naming the key path (e.g. "loss.kind").
RunConfig parse_run_config(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& cfg);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

/// Parses the architecture with the configured neuron and pool scale.
NetworkSpec build_spec(const RunConfig& cfg);

}  // namespace spikegrad
