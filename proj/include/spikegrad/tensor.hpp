#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikegrad {

/// Raised on incompatible shapes, out-of-range indices and invalid sizes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Uniform simulation grid. Bin k covers [k*dt, (k+1)*dt) milliseconds.
struct TimeGrid {
  double dt = 1.0;
  std::size_t num_steps = 1;

  TimeGrid() = default;
  TimeGrid(double dt_ms, std::size_t steps);

  double duration() const { return dt * static_cast<double>(num_steps); }
};

/// Dense row-major array of doubles with an arbitrary shape. Holds weights,
/// gradients and per-unit reductions.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

using DenseTensor = Tensor;

/// Real-valued (units x time) raster with time as the innermost axis. Spike
/// trains, membrane potentials and per-bin gradients all use this layout;
/// spike outputs of a layer only ever hold 0 or 1.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  SpikeTensor(Shape unit_shape, std::size_t steps);

  const Shape& unit_shape() const { return unit_shape_; }
  std::size_t units() const { return units_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> row(std::size_t unit) {
    return std::span<double>(values_).subspan(unit * steps_, steps_);
  }
  std::span<const double> row(std::size_t unit) const {
    return std::span<const double>(values_).subspan(unit * steps_, steps_);
  }

  double& at(std::size_t unit, std::size_t t) { return values_[unit * steps_ + t]; }
  double at(std::size_t unit, std::size_t t) const { return values_[unit * steps_ + t]; }

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  /// Same data under a different unit shape with the same unit count.
  SpikeTensor reshaped(Shape unit_shape) const;

  bool operator==(const SpikeTensor&) const = default;

 private:
  Shape unit_shape_;
  std::size_t units_ = 0;
  std::size_t steps_ = 0;
  std::vector<double> values_;
};

SpikeTensor zeros(const Shape& unit_shape, const TimeGrid& grid);

/// a*x + y.
Tensor elementwise_axpy(double a, const Tensor& x, const Tensor& y);
SpikeTensor elementwise_axpy(double a, const SpikeTensor& x, const SpikeTensor& y);

/// Per-unit sum over bins [t_start, t_end). Result has the unit shape of x.
Tensor reduce_time_sum(const SpikeTensor& x, std::size_t t_start, std::size_t t_end);

double inner_product(std::span<const double> a, std::span<const double> b);

}  // namespace spikegrad
