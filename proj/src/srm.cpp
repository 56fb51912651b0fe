#include "spikegrad/srm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikegrad/parallel.hpp"
#include "spikegrad/synapse.hpp"

namespace spikegrad {
namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("neuron.") + name + " must be positive");
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void NeuronParams::validate() const {
  positive(theta, "theta");
  positive(tau_s, "tau_s");
  positive(tau_r, "tau_r");
  positive(surrogate_scale, "surrogate_scale");
  positive(surrogate_width, "surrogate_width");
  positive(sigmoid_temperature, "sigmoid_temperature");
  if (!(kernel_cutoff > 0.0 && kernel_cutoff < 1.0)) {
    throw std::invalid_argument("neuron.kernel_cutoff must be in (0, 1)");
  }
}

NeuronKernels NeuronKernels::build(const NeuronParams& params, const TimeGrid& grid) {
  params.validate();
  return {build_response_kernel(params.tau_s, grid, params.kernel_cutoff),
          build_refractory_kernel(params.tau_r, params.theta, grid, params.kernel_cutoff)};
}

void fire(const SpikeTensor& drive, const NeuronParams& params, const NeuronKernels& kernels,
          SpikeTensor& membrane, SpikeTensor& spikes) {
  membrane = SpikeTensor(drive.unit_shape(), drive.steps());
  spikes = SpikeTensor(drive.unit_shape(), drive.steps());
  const auto units = static_cast<std::ptrdiff_t>(drive.units());
  const std::size_t steps = drive.steps();

  if (params.spike_function == SpikeFunction::sigmoid) {
    const double beta = params.sigmoid_temperature;
    for (std::size_t i = 0; i < drive.size(); ++i) {
      const double u = drive.data()[i];
      membrane.data()[i] = u;
      spikes.data()[i] = sigmoid((u - params.theta) / beta);
    }
    return;
  }

  const auto& nu = kernels.refractory.samples;
#pragma omp parallel for schedule(static) if (parallel::worth_it(units * static_cast<std::ptrdiff_t>(steps)))
  for (std::ptrdiff_t n = 0; n < units; ++n) {
    const auto d = drive.row(static_cast<std::size_t>(n));
    auto u = membrane.row(static_cast<std::size_t>(n));
    auto s = spikes.row(static_cast<std::size_t>(n));
    std::vector<double> refractory(steps, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
      u[t] = d[t] + refractory[t];
      if (u[t] >= params.theta) {
        s[t] = 1.0;
        for (std::size_t k = 1; k < nu.size() && t + k < steps; ++k) refractory[t + k] += nu[k];
      }
    }
  }
}

LayerActivation forward(const Tensor& weights, const SpikeTensor& input_spikes,
                        const NeuronParams& params, const NeuronKernels& kernels) {
  LayerActivation act;
  act.synaptic_drive = temporal_convolve(kernels.response, input_spikes);
  const SpikeTensor drive = dense_forward(weights, act.synaptic_drive);
  fire(drive, params, kernels, act.membrane, act.spikes);
  return act;
}

SpikeTensor surrogate_derivative(const SpikeTensor& membrane, const NeuronParams& params) {
  SpikeTensor rho(membrane.unit_shape(), membrane.steps());
  auto in = membrane.data();
  auto out = rho.data();
  if (params.spike_function == SpikeFunction::sigmoid) {
    const double beta = params.sigmoid_temperature;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double s = sigmoid((in[i] - params.theta) / beta);
      out[i] = s * (1.0 - s) / beta;
    }
  } else {
    const double alpha = params.surrogate_width;
    const double peak = params.surrogate_scale / alpha;
    for (std::size_t i = 0; i < in.size(); ++i) {
      out[i] = peak * std::exp(-std::abs(in[i] - params.theta) / alpha);
    }
  }
  return rho;
}

SpikeTensor membrane_error(const SpikeTensor& grad_spikes, const SpikeTensor& membrane,
                           const NeuronParams& params) {
  if (grad_spikes.units() != membrane.units() || grad_spikes.steps() != membrane.steps()) {
    throw ShapeError("backward: gradient shape does not match layer output");
  }
  SpikeTensor e = surrogate_derivative(membrane, params);
  auto g = grad_spikes.data();
  auto ed = e.data();
  for (std::size_t i = 0; i < ed.size(); ++i) ed[i] *= g[i];
  return e;
}

LayerGradients backward(const SpikeTensor& grad_spikes, const LayerActivation& activation,
                        const Tensor& weights, const NeuronParams& params,
                        const NeuronKernels& kernels) {
  const SpikeTensor e = membrane_error(grad_spikes, activation.membrane, params);
  LayerGradients out;
  out.grad_weights = dense_weight_grad(e, activation.synaptic_drive);
  const SpikeTensor back =
      dense_transpose(weights, e, activation.synaptic_drive.unit_shape());
  out.grad_input_spikes = temporal_correlate(kernels.response, back);
  return out;
}

}  // namespace spikegrad
