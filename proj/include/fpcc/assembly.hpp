#pragma once

#include <Eigen/Sparse>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fpcc/grid.hpp"
#include "fpcc/model.hpp"

namespace fpcc {

// One backward-Euler Chang-Cooper step matrix A^n acting on the future state:
// rho^n = A^n rho^{n+1}. Bands sit at offsets {0, +-(N+1)^(i-1)}; the diagonal
// is >= 1, off-diagonal entries are <= 0, and every column sums to exactly 1
// (zero-flux conservation).
struct StepMatrix {
  Eigen::SparseMatrix<double> matrix;  // compressed, (N+1)^d square
  Grid grid;
  double time = 0.0;  // t^n at which the coefficients were frozen
  double dt = 0.0;
  std::vector<std::string> warnings;

  std::int64_t rows() const { return matrix.rows(); }
};

// Assemble A^n from face samples at time t. Coefficients are evaluated at t
// (explicit freezing); the unknown lives at t + dt. Faces on the domain
// boundary carry zero flux and contribute nothing, which reproduces the
// boundary diagonal modification exactly.
StepMatrix assemble_step_matrix(const FPEProblem& problem, const Grid& grid, double t,
                                double dt);

// Boundary diagonal modification for a row whose point touches the boundary:
//   beta_hat = beta - sum_{axes at 0} gamma_i e^{w at (m - e_i/2)}
//                   - sum_{axes at N} alpha_i e^{-w at (m + e_i/2)}
// with each product folded to its overflow-safe form r D cc_We(w) resp.
// r D cc_W(w). `lower_ghost` holds the out-of-domain faces of axes pinned at
// 0, `upper_ghost` those of axes pinned at N, and r = dt / h^2.
double boundary_beta_hat(double beta, double r, std::span<const FaceCoefficients> lower_ghost,
                         std::span<const FaceCoefficients> upper_ghost);

// Coordinate text export: "row col value" per line, deterministic order.
void write_coordinate_format(const Eigen::SparseMatrix<double>& matrix, std::ostream& out);

}  // namespace fpcc
