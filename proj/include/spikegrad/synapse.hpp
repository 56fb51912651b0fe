#pragma once

#include <cstddef>

#include "spikegrad/tensor.hpp"

// Spatial linear maps applied independently at every time bin. Each map has a
// forward, a weight gradient and a transpose (input gradient). The OpenMP
// versions accumulate in the same order as the serial reference, so results
// match bit for bit.

namespace spikegrad {

/// (channels, height, width); flattening is channel-major.
struct Shape3 {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t count() const { return channels * height * width; }
  Shape as_shape() const { return {channels, height, width}; }
  bool operator==(const Shape3&) const = default;
};

/// Weights (out, in). Input has `in` units, output shape {out}.
SpikeTensor dense_forward(const Tensor& weights, const SpikeTensor& x);
Tensor dense_weight_grad(const SpikeTensor& e, const SpikeTensor& x);
SpikeTensor dense_transpose(const Tensor& weights, const SpikeTensor& e, const Shape& input_shape);

/// Stride-1 convolution with zero padding k/2. Weights (K, C, k, k), input
/// shape (C, H, W), output (K, H, W).
SpikeTensor conv_forward(const Tensor& weights, const SpikeTensor& x, const Shape3& in);
Tensor conv_weight_grad(const SpikeTensor& e, const SpikeTensor& x, const Shape3& in,
                        std::size_t kernel);
SpikeTensor conv_transpose(const Tensor& weights, const SpikeTensor& e, const Shape3& in);

/// Non-overlapping n x n sum scaled by a fixed weight. Output (C, H/n, W/n).
SpikeTensor pool_forward(std::size_t n, double weight, const SpikeTensor& x, const Shape3& in);
SpikeTensor pool_transpose(std::size_t n, double weight, const SpikeTensor& e, const Shape3& in);

namespace reference {

SpikeTensor dense_forward(const Tensor& weights, const SpikeTensor& x);
Tensor dense_weight_grad(const SpikeTensor& e, const SpikeTensor& x);
SpikeTensor dense_transpose(const Tensor& weights, const SpikeTensor& e, const Shape& input_shape);
SpikeTensor conv_forward(const Tensor& weights, const SpikeTensor& x, const Shape3& in);
Tensor conv_weight_grad(const SpikeTensor& e, const SpikeTensor& x, const Shape3& in,
                        std::size_t kernel);
SpikeTensor conv_transpose(const Tensor& weights, const SpikeTensor& e, const Shape3& in);

}  // namespace reference

}  // namespace spikegrad
