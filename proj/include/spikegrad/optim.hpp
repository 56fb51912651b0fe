#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikegrad/network.hpp"

namespace spikegrad {

enum class OptimizerKind { sgd_momentum, adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double momentum = 0.0;  // sgd_momentum
  double beta1 = 0.9;     // adam
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

/// Per-weight slots: velocity for SGD, first/second moments for Adam.
struct OptimizerState {
  OptimizerConfig config;
  NetworkWeights first;
  NetworkWeights second;
  std::uint64_t steps = 0;

  OptimizerState() = default;
  OptimizerState(OptimizerConfig cfg, const NetworkWeights& like);
};

/// v <- momentum * v + g;  w <- w - lr * v.
void sgd_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads);

/// Adam with bias-corrected moments.
void adam_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads);

void optimizer_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads);

}  // namespace spikegrad
