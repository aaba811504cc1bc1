#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fpcc {

// Multi-index j = (j_1, ..., j_d), each component in [0, N].
using MultiIndex = std::vector<std::int64_t>;

// Uniform tensor-product mesh over [0, L]^d with N intervals (N+1 points) per
// axis. Linear indices follow p = sum_i j_i (N+1)^(i-1): axis 0 varies fastest,
// so the stride of axis i is (N+1)^i.
class Grid {
public:
  Grid(int dim, std::int64_t intervals, double length);

  int dim() const { return dim_; }
  std::int64_t intervals() const { return intervals_; }          // N
  std::int64_t points_per_axis() const { return intervals_ + 1; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }                    // h = L / N
  std::int64_t num_points() const { return num_points_; }        // (N+1)^d
  std::int64_t axis_stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  std::int64_t multi_to_linear(const MultiIndex& j) const;
  MultiIndex linear_to_multi(std::int64_t p) const;

  // Index of the point one step along `axis` from p, or nullopt when the move
  // leaves [0, N] (the zero-flux ghost layer is never materialized).
  std::optional<std::int64_t> neighbor(std::int64_t p, int axis, int direction) const;

  // Coordinates of the node with multi-index j (x = j h).
  std::vector<double> node_position(const MultiIndex& j) const;

  bool on_boundary(const MultiIndex& j) const;

private:
  int dim_;
  std::int64_t intervals_;
  double length_;
  double spacing_;
  std::int64_t num_points_;
  std::vector<std::int64_t> strides_;
};

}  // namespace fpcc
