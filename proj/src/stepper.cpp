#include "fpcc/stepper.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <memory>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

namespace {

double relative_residual(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
  const double nb = b.norm();
  if (nb == 0.0) return (A * x).norm();
  return (A * x - b).norm() / nb;
}

Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             const SolveOptions& options, double* residual_out) {
  Eigen::VectorXd x;
  if (A.rows() <= options.direct_cap) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
      throw SolveError("sparse LU factorization failed", std::numeric_limits<double>::infinity());
    x = lu.solve(b);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver(A);
    solver.setTolerance(options.tolerance);
    solver.setMaxIterations(options.max_iterations);
    x = solver.solve(b);
  }
  const double res = relative_residual(A, x, b);
  if (residual_out) *residual_out = res;
  if (!(res <= options.tolerance) && b.norm() > 0.0)
    throw SolveError("linear solve stalled at relative residual " + format_double(res), res);
  return x;
}

}  // namespace

Eigen::VectorXd step(const StepMatrix& A, const Eigen::VectorXd& rho_n,
                     const SolveOptions& options, double* residual_out) {
  if (rho_n.size() != A.rows())
    throw std::invalid_argument("step: state length does not match the matrix");
  return solve_sparse(A.matrix, rho_n, options, residual_out);
}

Trajectory evolve(const FPEProblem& problem, const Grid& grid, double dt, std::int64_t n_steps,
                  const SolveOptions& options) {
  validate_problem(problem);
  if (n_steps < 1) throw std::invalid_argument("evolve: need at least one step");

  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(discretize_initial(problem, grid));

  if (dt > 0.5 / problem.gamma)
    traj.warnings.push_back("dt = " + format_double(dt) +
                            " exceeds 1/(2 gamma); the convergence guarantee does not apply");

  const double cell = std::pow(grid.spacing(), static_cast<double>(grid.dim()));
  auto record = [&](std::int64_t n, double t, const Eigen::VectorXd& state, double residual) {
    StepDiagnostics diag;
    diag.step = n;
    diag.time = t;
    diag.mass = stable_sum({state.data(), static_cast<std::size_t>(state.size())}) * cell;
    diag.min_entry = state.minCoeff();
    diag.residual = residual;
    traj.diagnostics.push_back(diag);
  };
  record(0, 0.0, traj.states[0], 0.0);

  // Factorize once for autonomous problems; the matrix is the same at every step.
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> cached_lu;
  StepMatrix frozen{Eigen::SparseMatrix<double>(0, 0), grid, 0.0, dt, {}};
  const bool reuse = !problem.time_dependent && grid.num_points() <= options.direct_cap;
  if (reuse) {
    frozen = assemble_step_matrix(problem, grid, 0.0, dt);
    traj.warnings.insert(traj.warnings.end(), frozen.warnings.begin(), frozen.warnings.end());
    cached_lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>(frozen.matrix);
    if (cached_lu->info() != Eigen::Success)
      throw SolveError("sparse LU factorization failed", std::numeric_limits<double>::infinity());
  }

  for (std::int64_t n = 0; n < n_steps; ++n) {
    const double t_n = static_cast<double>(n) * dt;
    double residual = 0.0;
    Eigen::VectorXd next;
    try {
      if (reuse) {
        next = cached_lu->solve(traj.states.back());
        residual = relative_residual(frozen.matrix, next, traj.states.back());
        if (!(residual <= options.tolerance) && traj.states.back().norm() > 0.0)
          throw SolveError("linear solve stalled at relative residual " + format_double(residual),
                           residual);
      } else {
        const StepMatrix A = assemble_step_matrix(problem, grid, t_n, dt);
        if (n == 0)
          traj.warnings.insert(traj.warnings.end(), A.warnings.begin(), A.warnings.end());
        next = step(A, traj.states.back(), options, &residual);
      }
    } catch (const std::exception& e) {
      throw SolveError("evolve failed at step " + std::to_string(n) + ": " + e.what(),
                       residual);
    }
    traj.states.push_back(std::move(next));
    record(n + 1, static_cast<double>(n + 1) * dt, traj.states.back(), residual);
  }

  // Theorem-level runtime checks surface as warnings on the trajectory.
  const double mass0 = traj.diagnostics.front().mass;
  for (const StepDiagnostics& diag : traj.diagnostics) {
    if (std::abs(diag.mass - mass0) > 1e-10) {
      traj.warnings.push_back("mass drift " + format_double(diag.mass - mass0) + " at step " +
                              std::to_string(diag.step));
      break;
    }
  }
  for (const StepDiagnostics& diag : traj.diagnostics) {
    if (diag.min_entry < -10.0 * options.tolerance) {
      traj.warnings.push_back("negative density " + format_double(diag.min_entry) +
                              " at step " + std::to_string(diag.step));
      break;
    }
  }
  return traj;
}

}  // namespace fpcc
