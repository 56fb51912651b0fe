#pragma once

#include <cstddef>
#include <vector>

#include "spikegrad/tensor.hpp"

namespace spikegrad {

enum class KernelKind { response, refractory };

/// Causal kernel sampled at t = k*dt, k = 0..K-1.
struct KernelVector {
  std::vector<double> samples;
  double tau = 1.0;
  double dt = 1.0;
  KernelKind kind = KernelKind::response;

  std::size_t size() const { return samples.size(); }
  double operator[](std::size_t k) const { return samples[k]; }
};

inline constexpr double kDefaultKernelCutoff = 0.01;

/// eps(t) = (t/tau_s) exp(1 - t/tau_s). Truncated at the first sample past the
/// peak whose magnitude drops below cutoff * peak, and capped at
/// floor(10 tau_s / dt) + 1 samples.
KernelVector build_response_kernel(double tau_s, const TimeGrid& grid,
                                   double cutoff = kDefaultKernelCutoff);

/// nu(t) = -2 theta (t/tau_r) exp(1 - t/tau_r), truncated like the response kernel.
KernelVector build_refractory_kernel(double tau_r, double theta, const TimeGrid& grid,
                                     double cutoff = kDefaultKernelCutoff);

/// Causal convolution per unit: y[t] = sum_{k=0}^{min(t,K-1)} kernel[k] x[t-k].
SpikeTensor temporal_convolve(const KernelVector& kernel, const SpikeTensor& x);

/// Anti-causal correlation per unit: r[t] = sum_{k=0}^{min(T-1-t,K-1)} kernel[k] g[t+k].
/// Adjoint of temporal_convolve.
SpikeTensor temporal_correlate(const KernelVector& kernel, const SpikeTensor& g);

namespace reference {

// Single-threaded loops over the definitions. Kept for testing and benchmarks;
// the parallel versions above must agree with these bit for bit.
SpikeTensor temporal_convolve(const KernelVector& kernel, const SpikeTensor& x);
SpikeTensor temporal_correlate(const KernelVector& kernel, const SpikeTensor& g);

}  // namespace reference

}  // namespace spikegrad
