#pragma once

#include <cstdint>

namespace spikegrad {

/// Counter-based generator: the i-th draw is a pure function of (key, i), and
/// split() derives independent child streams from a label. All randomness in a
/// run (initialization, shuffling, crops, synthetic data) is split off one
/// master seed, so results do not depend on call interleaving across
/// subsystems.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace spikegrad
