#include "spikegrad/tensor.hpp"

#include <cmath>
#include <sstream>

namespace spikegrad {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

TimeGrid::TimeGrid(double dt_ms, std::size_t steps) : dt(dt_ms), num_steps(steps) {
  if (!(dt_ms > 0.0) || !std::isfinite(dt_ms)) throw ShapeError("time grid: dt must be positive");
  if (steps == 0) throw ShapeError("time grid: num_steps must be at least 1");
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  values_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) {
    throw ShapeError("tensor: " + std::to_string(values_.size()) + " values for shape " +
                     to_string(shape_));
  }
}

SpikeTensor::SpikeTensor(Shape unit_shape, std::size_t steps)
    : unit_shape_(std::move(unit_shape)), steps_(steps) {
  if (unit_shape_.empty()) throw ShapeError("spike tensor: empty unit shape");
  for (auto d : unit_shape_) {
    if (d == 0) throw ShapeError("spike tensor: zero dimension in " + to_string(unit_shape_));
  }
  if (steps_ == 0) throw ShapeError("spike tensor: zero time steps");
  units_ = element_count(unit_shape_);
  values_.assign(units_ * steps_, 0.0);
}

SpikeTensor SpikeTensor::reshaped(Shape unit_shape) const {
  if (element_count(unit_shape) != units_) {
    throw ShapeError("reshape: " + to_string(unit_shape_) + " -> " + to_string(unit_shape));
  }
  SpikeTensor out = *this;
  out.unit_shape_ = std::move(unit_shape);
  return out;
}

SpikeTensor zeros(const Shape& unit_shape, const TimeGrid& grid) {
  return SpikeTensor(unit_shape, grid.num_steps);
}

Tensor elementwise_axpy(double a, const Tensor& x, const Tensor& y) {
  if (x.shape() != y.shape()) {
    throw ShapeError("axpy: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
  }
  Tensor out = y;
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] += a * xs[i];
  return out;
}

SpikeTensor elementwise_axpy(double a, const SpikeTensor& x, const SpikeTensor& y) {
  if (x.unit_shape() != y.unit_shape() || x.steps() != y.steps()) {
    throw ShapeError("axpy: spike tensor shape mismatch");
  }
  SpikeTensor out = y;
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] += a * xs[i];
  return out;
}

Tensor reduce_time_sum(const SpikeTensor& x, std::size_t t_start, std::size_t t_end) {
  if (t_start > t_end || t_end > x.steps()) {
    throw ShapeError("reduce_time_sum: range [" + std::to_string(t_start) + ", " +
                     std::to_string(t_end) + ") outside " + std::to_string(x.steps()) + " steps");
  }
  Tensor out(x.unit_shape());
  for (std::size_t u = 0; u < x.units(); ++u) {
    auto r = x.row(u);
    double s = 0.0;
    for (std::size_t t = t_start; t < t_end; ++t) s += r[t];
    out[u] = s;
  }
  return out;
}

double inner_product(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("inner_product: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace spikegrad
