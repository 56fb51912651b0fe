#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "spikegrad/config.hpp"
#include "spikegrad/data_io.hpp"
#include "spikegrad/network.hpp"
#include "spikegrad/train.hpp"

namespace spikegrad {

struct PreparedData {
  EventDataset train;
  std::optional<EventDataset> test;
};

/// Loads the manifests named in the config, or generates the synthetic task
/// from the run seed.
PreparedData load_data(const RunConfig& cfg);

struct RunResult {
  NetworkWeights weights;
  std::vector<EpochMetrics> history;
};

/// Called once after initialization (epoch 0, no metrics) and after every epoch.
using EpochCallback = std::function<void(std::size_t epoch, const NetworkWeights&, const std::vector<EpochMetrics>&)>;

/// Initializes and trains for cfg.epochs. All randomness derives from cfg.seed.
RunResult run_training(const RunConfig& cfg, const PreparedData& data, const EpochCallback& on_epoch = {});

}  // namespace spikegrad
