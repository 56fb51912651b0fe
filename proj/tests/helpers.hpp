#pragma once

#include "spikegrad/rng.hpp"
#include "spikegrad/tensor.hpp"

namespace testutil {

inline spikegrad::SpikeTensor random_spikes(spikegrad::Rng& rng, spikegrad::Shape shape, std::size_t steps, double p) {
  spikegrad::SpikeTensor s(std::move(shape), steps);
  for (double& v : s.data()) v = rng.uniform() < p ? 1.0 : 0.0;
  return s;
}

inline spikegrad::SpikeTensor random_real(spikegrad::Rng& rng, spikegrad::Shape shape, std::size_t steps,
                                          double lo = -1.0, double hi = 1.0) {
  spikegrad::SpikeTensor s(std::move(shape), steps);
  for (double& v : s.data()) v = rng.uniform(lo, hi);
  return s;
}

inline spikegrad::Tensor random_tensor(spikegrad::Rng& rng, spikegrad::Shape shape, double lo = -1.0, double hi = 1.0) {
  spikegrad::Tensor w(std::move(shape));
  for (double& v : w.data()) v = rng.uniform(lo, hi);
  return w;
}

}  // namespace testutil
