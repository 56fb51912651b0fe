#include "spikegrad/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace spikegrad {
namespace {

void check_shapes(const NetworkWeights& weights, const NetworkWeights& grads, const OptimizerState& state) {
  if (weights.size() != grads.size() || weights.size() != state.first.size()) {
    throw ShapeError("optimizer: layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].shape() != grads[l].shape() || weights[l].shape() != state.first[l].shape()) {
      throw ShapeError("optimizer: layer " + std::to_string(l) + " shape mismatch");
    }
  }
}

NetworkWeights zeros_like(const NetworkWeights& like) {
  NetworkWeights out;
  out.reserve(like.size());
  for (const auto& w : like) out.emplace_back(w.shape().empty() ? Tensor() : Tensor(w.shape()));
  return out;
}

}  // namespace

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd_momentum"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
  throw std::invalid_argument("optimizer.kind: unknown optimizer '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("optimizer.lr must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("optimizer.momentum must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("optimizer.beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("optimizer.beta2 must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("optimizer.eps must be positive");
}

OptimizerState::OptimizerState(OptimizerConfig cfg, const NetworkWeights& like)
    : config(cfg), first(zeros_like(like)), second(zeros_like(like)) {
  config.validate();
}

void sgd_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads) {
  check_shapes(weights, grads, state);
  ++state.steps;
  const double lr = state.config.lr, mu = state.config.momentum;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto w = weights[l].data();
    auto g = grads[l].data();
    auto v = state.first[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = mu * v[i] + g[i];
      w[i] -= lr * v[i];
    }
  }
}

void adam_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads) {
  check_shapes(weights, grads, state);
  ++state.steps;
  const auto& c = state.config;
  const double t = static_cast<double>(state.steps);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto w = weights[l].data();
    auto g = grads[l].data();
    auto m = state.first[l].data();
    auto v = state.second[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.adam_eps);
    }
  }
}

void optimizer_step(OptimizerState& state, NetworkWeights& weights, const NetworkWeights& grads) {
  if (state.config.kind == OptimizerKind::adam) {
    adam_step(state, weights, grads);
  } else {
    sgd_step(state, weights, grads);
  }
}

}  // namespace spikegrad
