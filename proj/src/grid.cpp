#include "fpcc/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpcc {

namespace {

// (N+1)^d with overflow detection; index arithmetic must stay inside int64.
std::int64_t checked_power(std::int64_t base, int exponent) {
  std::int64_t result = 1;
  for (int k = 0; k < exponent; ++k) {
    if (result > std::numeric_limits<std::int64_t>::max() / base)
      throw std::overflow_error("grid point count overflows 64-bit index range");
    result *= base;
  }
  return result;
}

}  // namespace

Grid::Grid(int dim, std::int64_t intervals, double length)
    : dim_(dim), intervals_(intervals), length_(length) {
  if (dim < 1) throw std::invalid_argument("grid dimension must be >= 1");
  if (intervals < 1) throw std::invalid_argument("grid needs at least one interval per axis");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("grid length must be positive and finite");

  num_points_ = checked_power(intervals_ + 1, dim_);
  strides_.resize(static_cast<std::size_t>(dim_));
  std::int64_t s = 1;
  for (int i = 0; i < dim_; ++i) {
    strides_[static_cast<std::size_t>(i)] = s;
    if (i + 1 < dim_) s *= intervals_ + 1;
  }

  spacing_ = length_ / static_cast<double>(intervals_);
  const double recovered = spacing_ * static_cast<double>(intervals_);
  if (std::abs(recovered - length_) >
      std::numeric_limits<double>::epsilon() * std::abs(length_))
    throw std::invalid_argument("h * N does not reproduce L to within one ulp");
}

std::int64_t Grid::multi_to_linear(const MultiIndex& j) const {
  if (static_cast<int>(j.size()) != dim_)
    throw std::out_of_range("multi-index dimension mismatch");
  std::int64_t p = 0;
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t ji = j[static_cast<std::size_t>(i)];
    if (ji < 0 || ji > intervals_)
      throw std::out_of_range("multi-index component " + std::to_string(i) +
                              " out of range [0, N]");
    p += ji * strides_[static_cast<std::size_t>(i)];
  }
  return p;
}

MultiIndex Grid::linear_to_multi(std::int64_t p) const {
  if (p < 0 || p >= num_points_)
    throw std::out_of_range("linear index " + std::to_string(p) + " out of range");
  MultiIndex j(static_cast<std::size_t>(dim_));
  const std::int64_t base = intervals_ + 1;
  for (int i = 0; i < dim_; ++i) {
    j[static_cast<std::size_t>(i)] = p % base;
    p /= base;
  }
  return j;
}

std::optional<std::int64_t> Grid::neighbor(std::int64_t p, int axis, int direction) const {
  if (axis < 0 || axis >= dim_) throw std::out_of_range("axis out of range");
  if (direction != 1 && direction != -1)
    throw std::out_of_range("direction must be +1 or -1");
  if (p < 0 || p >= num_points_)
    throw std::out_of_range("linear index out of range");

  const std::int64_t stride = strides_[static_cast<std::size_t>(axis)];
  const std::int64_t base = intervals_ + 1;
  const std::int64_t ji = (p / stride) % base;
  const std::int64_t moved = ji + direction;
  if (moved < 0 || moved > intervals_) return std::nullopt;
  return p + direction * stride;
}

std::vector<double> Grid::node_position(const MultiIndex& j) const {
  if (static_cast<int>(j.size()) != dim_)
    throw std::out_of_range("multi-index dimension mismatch");
  std::vector<double> x(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    x[i] = static_cast<double>(j[i]) * spacing_;
  return x;
}

bool Grid::on_boundary(const MultiIndex& j) const {
  for (std::int64_t ji : j)
    if (ji == 0 || ji == intervals_) return true;
  return false;
}

}  // namespace fpcc
