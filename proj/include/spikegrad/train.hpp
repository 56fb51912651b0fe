#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spikegrad/data_io.hpp"
#include "spikegrad/losses.hpp"
#include "spikegrad/network.hpp"
#include "spikegrad/optim.hpp"
#include "spikegrad/rng.hpp"

namespace spikegrad {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rasterized inputs with labels.
struct LabeledRasters {
  std::vector<SpikeTensor> inputs;
  std::vector<std::size_t> labels;
  std::size_t size() const { return inputs.size(); }
};

/// Full-length rasters of every sample (no cropping).
LabeledRasters present_all(const EventDataset& dataset, double dt);

struct InitConfig {
  double rate_low = 0.05;   // spikes per bin
  double rate_high = 0.3;
  std::size_t calibration_samples = 16;
  std::size_t max_iterations = 60;
};

/// Uniform [-a, a] weights per trainable layer. a starts from a fan-in
/// heuristic and is rescaled layer by layer until the layer's mean firing rate
/// on the calibration inputs falls inside [rate_low, rate_high] (or the
/// iteration budget runs out). Weights are rounded to float precision.
NetworkWeights init_weights(const Network& net, const std::vector<SpikeTensor>& calibration,
                            const InitConfig& cfg, Rng rng);

/// Rounds every weight to the nearest float, the precision checkpoints store.
void quantize_f32(NetworkWeights& weights);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct SampleOutcome {
  double loss = 0.0;
  std::size_t prediction = 0;
  NetworkWeights grads;
};

/// Forward, loss and backward for one sample. Throws TrainingError on a
/// non-finite loss or gradient.
SampleOutcome sample_gradient(const Network& net, const NetworkWeights& weights, const SpikeTensor& input,
                              std::size_t label, const LossConfig& loss);

/// One pass over `data` in an order shuffled by `rng`. Each batch computes
/// per-sample gradients in parallel, sums them in sample order, then takes one
/// optimizer step. Weights stay at float precision.
EpochMetrics train_epoch(const Network& net, NetworkWeights& weights, const LabeledRasters& data,
                         const LossConfig& loss, OptimizerState& opt, std::size_t batch_size, Rng rng);

/// Dataset flavour: rasterizes each sample, drawing a random crop per sample
/// from `rng` when the dataset defines one.
EpochMetrics train_epoch(const Network& net, NetworkWeights& weights, const EventDataset& dataset,
                         const LossConfig& loss, OptimizerState& opt, std::size_t batch_size, Rng rng);

std::vector<std::size_t> predict(const Network& net, const NetworkWeights& weights,
                                 const std::vector<SpikeTensor>& inputs);

double accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& labels);

}  // namespace spikegrad
