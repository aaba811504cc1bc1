#include "fpcc/global_system.hpp"

#include <cmath>
#include <stdexcept>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

GlobalSystem build_global(const FPEProblem& problem, const Grid& grid, double dt,
                          std::int64_t n_steps, GlobalForm form) {
  validate_problem(problem);
  if (n_steps < 1) throw std::invalid_argument("build_global: need at least one step");

  GlobalSystem sys;
  sys.form_ = form;
  sys.block_size_ = grid.num_points();
  sys.n_steps_ = n_steps;
  sys.grid_ = grid;
  sys.dt_ = dt;
  sys.steps_.reserve(static_cast<std::size_t>(n_steps));

  if (!problem.time_dependent) {
    auto shared = std::make_shared<FactoredStep>(assemble_step_matrix(problem, grid, 0.0, dt));
    if (shared->lu.info() != Eigen::Success)
      throw SolveError("block factorization failed", std::numeric_limits<double>::infinity());
    sys.steps_.assign(static_cast<std::size_t>(n_steps), shared);
  } else {
    for (std::int64_t n = 0; n < n_steps; ++n) {
      auto factored = std::make_shared<FactoredStep>(
          assemble_step_matrix(problem, grid, static_cast<double>(n) * dt, dt));
      if (factored->lu.info() != Eigen::Success)
        throw SolveError("block factorization failed at step " + std::to_string(n),
                         std::numeric_limits<double>::infinity());
      sys.steps_.push_back(std::move(factored));
    }
  }

  sys.rhs_ = Eigen::VectorXd::Zero(sys.rows());
  sys.rhs_.head(sys.block_size_) = discretize_initial(problem, grid);
  return sys;
}

Eigen::VectorXd GlobalSystem::apply(const Eigen::VectorXd& v) const {
  if (v.size() != rows()) throw std::invalid_argument("apply: length mismatch");
  Eigen::VectorXd out(rows());
  const std::int64_t bs = block_size_;
  for (std::int64_t n = 0; n < n_blocks(); ++n) {
    auto seg = out.segment(n * bs, bs);
    if (n < n_steps_)
      seg = steps_[static_cast<std::size_t>(n)]->step.matrix * v.segment(n * bs, bs);
    else
      seg = v.segment(n * bs, bs);
    if (n > 0) seg -= v.segment((n - 1) * bs, bs);
  }
  return out;
}

Eigen::VectorXd GlobalSystem::apply_transpose(const Eigen::VectorXd& v) const {
  if (v.size() != rows()) throw std::invalid_argument("apply_transpose: length mismatch");
  Eigen::VectorXd out(rows());
  const std::int64_t bs = block_size_;
  for (std::int64_t n = 0; n < n_blocks(); ++n) {
    auto seg = out.segment(n * bs, bs);
    if (n < n_steps_)
      seg = steps_[static_cast<std::size_t>(n)]->step.matrix.transpose() * v.segment(n * bs, bs);
    else
      seg = v.segment(n * bs, bs);
    if (n + 1 < n_blocks()) seg -= v.segment((n + 1) * bs, bs);
  }
  return out;
}

Eigen::VectorXd GlobalSystem::solve_blockwise(const Eigen::VectorXd& b) const {
  if (b.size() != rows()) throw std::invalid_argument("solve_blockwise: length mismatch");
  Eigen::VectorXd x(rows());
  const std::int64_t bs = block_size_;
  for (std::int64_t n = 0; n < n_blocks(); ++n) {
    Eigen::VectorXd rhs = b.segment(n * bs, bs);
    if (n > 0) rhs += x.segment((n - 1) * bs, bs);
    if (n < n_steps_)
      x.segment(n * bs, bs) = steps_[static_cast<std::size_t>(n)]->lu.solve(rhs);
    else
      x.segment(n * bs, bs) = rhs;
  }
  return x;
}

Eigen::VectorXd GlobalSystem::solve_transpose_blockwise(const Eigen::VectorXd& b) const {
  if (b.size() != rows()) throw std::invalid_argument("solve_transpose_blockwise: length mismatch");
  Eigen::VectorXd x(rows());
  const std::int64_t bs = block_size_;
  for (std::int64_t n = n_blocks() - 1; n >= 0; --n) {
    Eigen::VectorXd rhs = b.segment(n * bs, bs);
    if (n + 1 < n_blocks()) rhs += x.segment((n + 1) * bs, bs);
    if (n < n_steps_) {
      // Transposed solve reuses the factorization of A^n.
      x.segment(n * bs, bs) =
          steps_[static_cast<std::size_t>(n)]->lu.transpose().solve(rhs);
    } else {
      x.segment(n * bs, bs) = rhs;
    }
  }
  return x;
}

std::int64_t GlobalSystem::nonzeros() const {
  std::int64_t nnz = 0;
  for (std::int64_t n = 0; n < n_steps_; ++n)
    nnz += steps_[static_cast<std::size_t>(n)]->step.matrix.nonZeros();
  if (form_ == GlobalForm::extended) nnz += n_steps_ * block_size_;  // padding I blocks
  nnz += (n_blocks() - 1) * block_size_;                             // -I sub-diagonal
  return nnz;
}

Eigen::SparseMatrix<double> GlobalSystem::materialize(std::int64_t nnz_cap) const {
  if (nonzeros() > nnz_cap)
    throw std::length_error("global system exceeds the materialization cap (" +
                            std::to_string(nonzeros()) + " nonzeros)");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nonzeros()));
  const std::int64_t bs = block_size_;
  for (std::int64_t n = 0; n < n_blocks(); ++n) {
    if (n < n_steps_) {
      const Eigen::SparseMatrix<double>& A = steps_[static_cast<std::size_t>(n)]->step.matrix;
      for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
          triplets.emplace_back(n * bs + it.row(), n * bs + it.col(), it.value());
    } else {
      for (std::int64_t i = 0; i < bs; ++i) triplets.emplace_back(n * bs + i, n * bs + i, 1.0);
    }
    if (n > 0)
      for (std::int64_t i = 0; i < bs; ++i)
        triplets.emplace_back(n * bs + i, (n - 1) * bs + i, -1.0);
  }
  Eigen::SparseMatrix<double> L(rows(), rows());
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

std::int64_t GlobalSystem::max_row_nonzeros() const {
  // Row nonzero counts: step-block row count plus one -I entry for n > 0.
  std::int64_t best = 0;
  for (std::int64_t n = 0; n < n_steps_; ++n) {
    const Eigen::SparseMatrix<double>& A = steps_[static_cast<std::size_t>(n)]->step.matrix;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(A.rows()), n > 0 ? 1 : 0);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        ++counts[static_cast<std::size_t>(it.row())];
    for (std::int64_t c : counts) best = std::max(best, c);
  }
  if (form_ == GlobalForm::extended && n_steps_ >= 1) best = std::max<std::int64_t>(best, 2);
  return best;
}

Eigen::VectorXd solve_global(const GlobalSystem& system, double tolerance,
                             GlobalSolveMethod method, double* residual_out) {
  if (method == GlobalSolveMethod::automatic)
    method = system.rows() <= 40000 ? GlobalSolveMethod::direct : GlobalSolveMethod::block;

  Eigen::VectorXd x;
  if (method == GlobalSolveMethod::direct) {
    const Eigen::SparseMatrix<double> L = system.materialize();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);
    if (lu.info() != Eigen::Success)
      throw SolveError("global sparse LU failed", std::numeric_limits<double>::infinity());
    x = lu.solve(system.rhs());
  } else {
    x = system.solve_blockwise(system.rhs());
  }

  const double nb = system.rhs().norm();
  const double res = nb > 0.0 ? (system.apply(x) - system.rhs()).norm() / nb
                              : system.apply(x).norm();
  if (residual_out) *residual_out = res;
  if (nb > 0.0 && !(res <= tolerance))
    throw SolveError("global solve stalled at relative residual " + format_double(res), res);
  return x;
}

DilatedSystem hermitian_dilation(const GlobalSystem& system, std::int64_t nnz_cap) {
  const Eigen::SparseMatrix<double> L = system.materialize(nnz_cap / 2);
  const std::int64_t n = L.rows();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * L.nonZeros()));
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
      triplets.emplace_back(it.row() + n, it.col(), it.value());  // lower-left L
      triplets.emplace_back(it.col(), it.row() + n, it.value());  // upper-right L^T
    }
  DilatedSystem dilated;
  dilated.half = n;
  dilated.matrix.resize(2 * n, 2 * n);
  dilated.matrix.setFromTriplets(triplets.begin(), triplets.end());
  dilated.matrix.makeCompressed();
  dilated.rhs = Eigen::VectorXd::Zero(2 * n);
  dilated.rhs.tail(n) = system.rhs();
  return dilated;
}

}  // namespace fpcc
