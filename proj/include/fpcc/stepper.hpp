#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fpcc/assembly.hpp"
#include "fpcc/grid.hpp"
#include "fpcc/model.hpp"

namespace fpcc {

struct SolveOptions {
  double tolerance = 1e-12;          // relative residual target
  std::int64_t direct_cap = 200000;  // unknown count up to which sparse LU is used
  int max_iterations = 20000;        // iterative fallback cap
};

struct StepDiagnostics {
  std::int64_t step = 0;
  double time = 0.0;      // time of the state (t^{n})
  double mass = 0.0;      // sum(rho) h^d
  double min_entry = 0.0;
  double residual = 0.0;  // ||A x - b|| / ||b|| of the solve producing this state
};

// Densities rho^0 .. rho^{N_t} plus per-step diagnostics.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  double dt = 0.0;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<std::string> warnings;

  const Eigen::VectorXd& terminal() const { return states.back(); }
};

// Solve A x = rho_n to the requested relative residual. Throws SolveError when
// the solver cannot reach it. residual_out (optional) receives the achieved
// relative residual.
Eigen::VectorXd step(const StepMatrix& A, const Eigen::VectorXd& rho_n,
                     const SolveOptions& options = {}, double* residual_out = nullptr);

// March n_steps backward-Euler steps from the discretized initial density.
// Coefficients are re-assembled at each t^n unless the problem is autonomous,
// in which case the t = 0 factorization is reused.
Trajectory evolve(const FPEProblem& problem, const Grid& grid, double dt, std::int64_t n_steps,
                  const SolveOptions& options = {});

}  // namespace fpcc
