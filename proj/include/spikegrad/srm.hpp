#pragma once

#include "spikegrad/kernels.hpp"
#include "spikegrad/tensor.hpp"

namespace spikegrad {

/// How membrane potential becomes output.
///  - threshold: binary spikes with refractory feedback (the real model).
///  - sigmoid: s = sigmoid((u - theta) / temperature) with no refractory term.
///    A differentiable stand-in used to verify backprop against finite
///    differences; its surrogate is the exact sigmoid derivative.
enum class SpikeFunction { threshold, sigmoid };

struct NeuronParams {
  double theta = 10.0;           // mV
  double tau_s = 1.0;            // ms
  double tau_r = 1.0;            // ms
  double surrogate_scale = 1.0;  // gamma
  double surrogate_width = 5.0;  // alpha, mV
  double kernel_cutoff = kDefaultKernelCutoff;
  SpikeFunction spike_function = SpikeFunction::threshold;
  double sigmoid_temperature = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Response and refractory kernels for one parameter set on one grid.
struct NeuronKernels {
  KernelVector response;
  KernelVector refractory;

  static NeuronKernels build(const NeuronParams& params, const TimeGrid& grid);
};

struct LayerActivation {
  SpikeTensor synaptic_drive;  // (eps * s_in)(t), kept for the weight gradient
  SpikeTensor membrane;        // u(t)
  SpikeTensor spikes;          // s(t)
};

struct LayerGradients {
  Tensor grad_weights;
  SpikeTensor grad_input_spikes;
};

/// Runs the membrane recurrence on a precomputed feedforward drive d(t):
/// u(t) = d(t) + sum_{t' < t} nu(t - t') s(t'), s(t) = [u(t) >= theta].
/// Fills membrane and spikes (same shape as drive).
void fire(const SpikeTensor& drive, const NeuronParams& params, const NeuronKernels& kernels,
          SpikeTensor& membrane, SpikeTensor& spikes);

/// Dense SRM layer: u(t) = W (eps * s_in)(t) + (nu * s)(t). Weights are (out, in).
LayerActivation forward(const Tensor& weights, const SpikeTensor& input_spikes,
                        const NeuronParams& params, const NeuronKernels& kernels);

/// rho(u) = (gamma / alpha) exp(-|u - theta| / alpha) for threshold neurons;
/// the sigmoid derivative for the relaxed model.
SpikeTensor surrogate_derivative(const SpikeTensor& membrane, const NeuronParams& params);

/// e(t) = rho(u(t)) * dL/ds(t). No gradient flows through the refractory term.
SpikeTensor membrane_error(const SpikeTensor& grad_spikes, const SpikeTensor& membrane,
                           const NeuronParams& params);

/// Dense layer backward: grad_W = sum_t e(t) (eps * s_in)(t)^T and
/// dL/ds_in = eps (.) (W^T e).
LayerGradients backward(const SpikeTensor& grad_spikes, const LayerActivation& activation,
                        const Tensor& weights, const NeuronParams& params,
                        const NeuronKernels& kernels);

}  // namespace spikegrad
