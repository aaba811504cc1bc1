#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "fpcc/assembly.hpp"
#include "fpcc/model.hpp"
#include "fpcc/stepper.hpp"

namespace fpcc {

enum class GlobalForm { plain, extended };

enum class GlobalSolveMethod { automatic, direct, block };

// A step matrix together with its LU factors; shared between blocks when the
// problem is autonomous. `lu` is mutable because Eigen's SparseLU::transpose()
// is not const-qualified even though it leaves the factors untouched.
struct FactoredStep {
  explicit FactoredStep(StepMatrix s) : step(std::move(s)) { lu.compute(step.matrix); }
  StepMatrix step;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

// All-steps block system L rho = f. Block row n < N_t carries A^n on the
// diagonal and -I below; the extended form appends N_t replication rows
// (diagonal I, sub-diagonal -I) so the terminal state occupies half of the
// solution. The right-hand side is rho^0 in block 0 and zero elsewhere.
class GlobalSystem {
public:
  GlobalForm form() const { return form_; }
  std::int64_t block_size() const { return block_size_; }
  std::int64_t n_steps() const { return n_steps_; }  // N_t
  std::int64_t n_blocks() const { return form_ == GlobalForm::extended ? 2 * n_steps_ : n_steps_; }
  std::int64_t rows() const { return n_blocks() * block_size_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  const StepMatrix& step(std::int64_t n) const { return steps_[static_cast<std::size_t>(n)]->step; }

  Eigen::VectorBlock<const Eigen::VectorXd> block(const Eigen::VectorXd& v,
                                                  std::int64_t n) const {
    return v.segment(n * block_size_, block_size_);
  }

  // Operator application, usable without materializing the matrix.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;

  // Exact block substitution: forward for L, backward for L^T.
  Eigen::VectorXd solve_blockwise(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose_blockwise(const Eigen::VectorXd& b) const;

  // Explicit sparse form; throws when the nonzero count exceeds nnz_cap.
  Eigen::SparseMatrix<double> materialize(std::int64_t nnz_cap = 5000000) const;
  std::int64_t nonzeros() const;

  // Largest nonzero count over all rows (the sparsity s of the system).
  std::int64_t max_row_nonzeros() const;

  friend GlobalSystem build_global(const FPEProblem& problem, const Grid& grid, double dt,
                                   std::int64_t n_steps, GlobalForm form);

private:
  GlobalForm form_ = GlobalForm::plain;
  std::int64_t block_size_ = 0;
  std::int64_t n_steps_ = 0;
  Grid grid_{1, 1, 1.0};
  double dt_ = 0.0;
  std::vector<std::shared_ptr<const FactoredStep>> steps_;  // size N_t
  Eigen::VectorXd rhs_;
};

GlobalSystem build_global(const FPEProblem& problem, const Grid& grid, double dt,
                          std::int64_t n_steps, GlobalForm form);

// Solve L x = f. `direct` materializes and runs sparse LU (small systems,
// independent of the stepper path); `block` runs exact block substitution;
// `automatic` picks direct up to 40000 unknowns. The achieved relative
// residual is verified against the tolerance.
Eigen::VectorXd solve_global(const GlobalSystem& system, double tolerance = 1e-12,
                             GlobalSolveMethod method = GlobalSolveMethod::automatic,
                             double* residual_out = nullptr);

// Hermitian dilation [[0, L^T], [L, 0]] with right-hand side (0, f): the first
// half of the solution solves L x = f. Materialized; meant for analysis at
// small sizes.
struct DilatedSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::int64_t half = 0;
};

DilatedSystem hermitian_dilation(const GlobalSystem& system, std::int64_t nnz_cap = 5000000);

}  // namespace fpcc
