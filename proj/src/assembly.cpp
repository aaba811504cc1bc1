#include "fpcc/assembly.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

StepMatrix assemble_step_matrix(const FPEProblem& problem, const Grid& grid, double t,
                                double dt) {
  validate_problem(problem);
  if (!(dt > 0.0)) throw std::invalid_argument("assemble_step_matrix: dt must be positive");
  if (problem.dim != grid.dim())
    throw std::invalid_argument("assemble_step_matrix: problem/grid dimension mismatch");

  const int d = grid.dim();
  const double h = grid.spacing();
  const double r = dt / (h * h);
  const std::int64_t n = grid.num_points();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * d + 1));

  MultiIndex j(static_cast<std::size_t>(d), 0);
  for (std::int64_t p = 0; p < n; ++p) {
    double diag = 1.0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t stride = grid.axis_stride(i);
      const std::int64_t ji = j[static_cast<std::size_t>(i)];
      if (ji < grid.intervals()) {
        // Face between j and j + e_i: alpha = r D W e^w on the super-diagonal,
        // r D W on the diagonal.
        const FaceCoefficients f = sample_face(problem, grid, j, i, +1, t);
        diag += r * f.D * f.W;
        triplets.emplace_back(p, p + stride, -r * f.D * cc_We(f.w));
      }
      if (ji > 0) {
        // Face between j - e_i and j: gamma = r D W on the sub-diagonal,
        // r D W e^w on the diagonal.
        const FaceCoefficients f = sample_face(problem, grid, j, i, -1, t);
        diag += r * f.D * cc_We(f.w);
        triplets.emplace_back(p, p - stride, -r * f.D * f.W);
      }
    }
    triplets.emplace_back(p, p, diag);
    advance_multi_index(j, grid.intervals());
  }

  StepMatrix result{Eigen::SparseMatrix<double>(n, n), grid, t, dt, {}};
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  result.matrix.makeCompressed();

  if (dt * problem.gamma >= 1.0)
    result.warnings.push_back("dt = " + format_double(dt) + " violates dt < 1/gamma = " +
                              format_double(1.0 / problem.gamma) +
                              "; diagonal-dominance bounds are not guaranteed");
  return result;
}

double boundary_beta_hat(double beta, double r, std::span<const FaceCoefficients> lower_ghost,
                         std::span<const FaceCoefficients> upper_ghost) {
  if (lower_ghost.empty() && upper_ghost.empty())
    throw std::logic_error("boundary_beta_hat called on an interior row");
  double beta_hat = beta;
  for (const FaceCoefficients& f : lower_ghost) beta_hat -= r * f.D * cc_We(f.w);
  for (const FaceCoefficients& f : upper_ghost) beta_hat -= r * f.D * f.W;
  return beta_hat;
}

void write_coordinate_format(const Eigen::SparseMatrix<double>& matrix, std::ostream& out) {
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

}  // namespace fpcc
