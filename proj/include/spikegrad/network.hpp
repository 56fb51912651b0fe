#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spikegrad/srm.hpp"
#include "spikegrad/synapse.hpp"
#include "spikegrad/tensor.hpp"

namespace spikegrad {

class ArchitectureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LayerKind { input, dense, conv, pool };

struct LayerSpec {
  LayerKind kind = LayerKind::input;
  std::size_t units = 0;   // dense: neurons, conv: output channels
  std::size_t kernel = 0;  // conv: filter size, pool: window size
  Shape3 in_shape;
  Shape3 out_shape;
  NeuronParams params;

  bool trainable() const { return kind == LayerKind::dense || kind == LayerKind::conv; }
  Shape weight_shape() const;
  std::size_t parameter_count() const;
  std::string token() const;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;  // layers[0] is the input
  double pool_scale = 1.1;        // pool weight = pool_scale * theta

  const Shape3& input_shape() const { return layers.front().out_shape; }
  std::size_t output_units() const { return layers.back().out_shape.count(); }
  double pool_weight(const LayerSpec& layer) const { return pool_scale * layer.params.theta; }
};

/// Parses the '-' separated shorthand: "HxWxC" (or a bare integer) for the
/// input, "KcN" for a K-channel convolution with an N x N filter, "Na" for
/// N x N aggregate pooling, a bare integer for a dense layer. Pooling floors
/// odd spatial sizes.
NetworkSpec parse_architecture(std::string_view text, const NeuronParams& params = {});
std::string render(const NetworkSpec& spec);

/// Trainable synaptic weights only: conv K*C*k*k, dense fan_in*fan_out, pool 0.
std::size_t count_parameters(const NetworkSpec& spec);

/// One tensor per layer; empty for input and pool layers.
using NetworkWeights = std::vector<Tensor>;

class Network {
 public:
  Network(NetworkSpec spec, double dt_ms);

  const NetworkSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  std::size_t layer_count() const { return spec_.layers.size(); }

  NetworkWeights zero_weights() const;

  /// Activations for every layer; element 0 carries the input spikes only.
  std::vector<LayerActivation> forward(const NetworkWeights& weights, const SpikeTensor& input) const;

  /// Weight gradients per layer given dL/ds of the final layer.
  NetworkWeights backward(const NetworkWeights& weights,
                          const std::vector<LayerActivation>& activations,
                          const SpikeTensor& grad_output) const;

  void check_weights(const NetworkWeights& weights) const;

 private:
  NetworkSpec spec_;
  double dt_;
  std::vector<NeuronKernels> kernels_;
};

}  // namespace spikegrad
