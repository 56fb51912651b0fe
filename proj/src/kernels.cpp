#include "spikegrad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikegrad/parallel.hpp"

namespace spikegrad {
namespace {

double alpha_shape(double t, double tau) { return (t / tau) * std::exp(1.0 - t / tau); }

KernelVector build_alpha_kernel(double tau, double scale, const TimeGrid& grid, double cutoff,
                                KernelKind kind) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("kernel: cutoff must be in (0, 1)");
  const auto cap = static_cast<std::size_t>(std::floor(10.0 * tau / grid.dt)) + 1;
  const double peak = std::abs(scale);

  KernelVector kv;
  kv.tau = tau;
  kv.dt = grid.dt;
  kv.kind = kind;
  for (std::size_t k = 0; k < cap; ++k) {
    const double t = static_cast<double>(k) * grid.dt;
    const double v = scale * alpha_shape(t, tau);
    if (t > tau && std::abs(v) < cutoff * peak) break;
    kv.samples.push_back(v);
  }
  return kv;
}

void check_steps(const char* who, const SpikeTensor& x) {
  if (x.steps() == 0) throw ShapeError(std::string(who) + ": empty time axis");
}

}  // namespace

KernelVector build_response_kernel(double tau_s, const TimeGrid& grid, double cutoff) {
  if (!(tau_s > 0.0)) throw std::invalid_argument("response kernel: tau_s must be positive");
  return build_alpha_kernel(tau_s, 1.0, grid, cutoff, KernelKind::response);
}

KernelVector build_refractory_kernel(double tau_r, double theta, const TimeGrid& grid,
                                     double cutoff) {
  if (!(tau_r > 0.0)) throw std::invalid_argument("refractory kernel: tau_r must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("refractory kernel: theta must be positive");
  return build_alpha_kernel(tau_r, -2.0 * theta, grid, cutoff, KernelKind::refractory);
}

SpikeTensor temporal_convolve(const KernelVector& kernel, const SpikeTensor& x) {
  check_steps("temporal_convolve", x);
  SpikeTensor y(x.unit_shape(), x.steps());
  const auto steps = static_cast<std::ptrdiff_t>(x.steps());
  const auto taps = static_cast<std::ptrdiff_t>(kernel.size());
  const auto units = static_cast<std::ptrdiff_t>(x.units());
  const double* ks = kernel.samples.data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(units * steps * taps))
  for (std::ptrdiff_t u = 0; u < units; ++u) {
    const auto in = x.row(static_cast<std::size_t>(u));
    auto out = y.row(static_cast<std::size_t>(u));
    for (std::ptrdiff_t t = 0; t < steps; ++t) {
      const std::ptrdiff_t kmax = std::min(t, taps - 1);
      double acc = 0.0;
      for (std::ptrdiff_t k = 0; k <= kmax; ++k) {
        acc += ks[k] * in[static_cast<std::size_t>(t - k)];
      }
      out[static_cast<std::size_t>(t)] = acc;
    }
  }
  return y;
}

SpikeTensor temporal_correlate(const KernelVector& kernel, const SpikeTensor& g) {
  check_steps("temporal_correlate", g);
  SpikeTensor r(g.unit_shape(), g.steps());
  const auto steps = static_cast<std::ptrdiff_t>(g.steps());
  const auto taps = static_cast<std::ptrdiff_t>(kernel.size());
  const auto units = static_cast<std::ptrdiff_t>(g.units());
  const double* ks = kernel.samples.data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(units * steps * taps))
  for (std::ptrdiff_t u = 0; u < units; ++u) {
    const auto in = g.row(static_cast<std::size_t>(u));
    auto out = r.row(static_cast<std::size_t>(u));
    for (std::ptrdiff_t t = 0; t < steps; ++t) {
      const std::ptrdiff_t kmax = std::min(steps - 1 - t, taps - 1);
      double acc = 0.0;
      for (std::ptrdiff_t k = 0; k <= kmax; ++k) {
        acc += ks[k] * in[static_cast<std::size_t>(t + k)];
      }
      out[static_cast<std::size_t>(t)] = acc;
    }
  }
  return r;
}

namespace reference {

SpikeTensor temporal_convolve(const KernelVector& kernel, const SpikeTensor& x) {
  SpikeTensor y(x.unit_shape(), x.steps());
  const std::size_t steps = x.steps();
  for (std::size_t u = 0; u < x.units(); ++u) {
    for (std::size_t t = 0; t < steps; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size() && k <= t; ++k) acc += kernel[k] * x.at(u, t - k);
      y.at(u, t) = acc;
    }
  }
  return y;
}

SpikeTensor temporal_correlate(const KernelVector& kernel, const SpikeTensor& g) {
  SpikeTensor r(g.unit_shape(), g.steps());
  const std::size_t steps = g.steps();
  for (std::size_t u = 0; u < g.units(); ++u) {
    for (std::size_t t = 0; t < steps; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size() && t + k < steps; ++k) acc += kernel[k] * g.at(u, t + k);
      r.at(u, t) = acc;
    }
  }
  return r;
}

}  // namespace reference
}  // namespace spikegrad
