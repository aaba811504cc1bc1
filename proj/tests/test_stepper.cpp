#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fpcc/catalog.hpp"
#include "fpcc/errors.hpp"
#include "fpcc/stepper.hpp"
#include "fpcc/util.hpp"
#include "support.hpp"

using namespace fpcc;

TEST_CASE("zero input stays zero") {
  const FPEProblem p = catalog::make_diffusion(1, 1.0, 1.0, {{"c", 1.0}});
  const StepMatrix A = assemble_step_matrix(p, Grid(1, 2, 1.0), 0.0, 0.1);
  const Eigen::VectorXd x = step(A, Eigen::VectorXd::Zero(3));
  CHECK(x.norm() == 0.0);
}

TEST_CASE("one step conserves the sum for arbitrary input") {
  const FPEProblem p = catalog::make_diffusion(1, 1.0, 1.0, {{"c", 1.0}});
  const StepMatrix A = assemble_step_matrix(p, Grid(1, 2, 1.0), 0.0, 0.1);
  Eigen::VectorXd rho(3);
  rho << 0.0, 4.0, 0.0;
  const Eigen::VectorXd next = step(A, rho);
  CHECK(std::abs(next.sum() - rho.sum()) <= 1e-10);

  rho << 1.3, -0.2, 2.0;  // conservation is a column-sum property, any input
  CHECK(std::abs(step(A, rho).sum() - rho.sum()) <= 1e-10);
}

TEST_CASE("discrete stationary density is a fixed point") {
  // Zero flux on every face forces rho_{j+1} = e^{-w_j} rho_j; the resulting
  // product vector satisfies A rho = rho exactly, so one step returns it.
  const double theta = 1.2, diff = 0.4, L = 2.0;
  const FPEProblem p =
      catalog::make_ou(1, L, 1.0, {{"theta", theta}, {"diff", diff}});
  const Grid grid(1, 24, L);
  const StepMatrix A = assemble_step_matrix(p, grid, 0.0, 0.05);

  Eigen::VectorXd stationary(grid.num_points());
  stationary[0] = 1.0;
  for (std::int64_t jj = 0; jj + 1 <= grid.intervals(); ++jj) {
    const FaceCoefficients f = sample_face(p, grid, {jj}, 0, +1, 0.0);
    stationary[jj + 1] = stationary[jj] * std::exp(-f.w);
  }
  stationary /= stationary.sum() * grid.spacing();

  // Verified fixed point of the matrix itself (dense residual oracle)...
  const Eigen::MatrixXd dense(A.matrix);
  CHECK((dense * stationary - stationary).cwiseAbs().maxCoeff() <=
        1e-12 * stationary.cwiseAbs().maxCoeff());
  // ...and of the solver.
  const Eigen::VectorXd next = step(A, stationary);
  CHECK(test::relative_l2(next, stationary) <= 1e-11);
}

TEST_CASE("evolve with one step equals a single solve") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.1);
  const Grid grid(1, 16, 4.0);
  const Trajectory traj = evolve(p, grid, 0.1, 1);
  const StepMatrix A = assemble_step_matrix(p, grid, 0.0, 0.1);
  const Eigen::VectorXd direct = step(A, discretize_initial(p, grid));
  CHECK(test::relative_l2(traj.terminal(), direct) <= 1e-14);
  CHECK(traj.states.size() == 2);
  CHECK(traj.diagnostics.size() == 2);
}

TEST_CASE("symmetric initial data stays symmetric under pure diffusion") {
  FPEProblem p = catalog::make_diffusion(1, 2.0, 1.0, {{"c", 0.3}});
  p.initial = GaussianInit{{1.0}, {0.02}};  // centered
  const Grid grid(1, 32, 2.0);
  const Trajectory traj = evolve(p, grid, 0.02, 10);
  for (const Eigen::VectorXd& state : traj.states) {
    const Eigen::VectorXd reversed = state.reverse();
    CHECK(test::relative_l2(reversed, state) <= 1e-10);
  }
}

TEST_CASE("mass conservation and positivity along a trajectory") {
  std::mt19937_64 rng(77);
  const FPEProblem p = test::random_smooth_problem(rng, 2, 2.0);
  const Grid grid(2, 12, 2.0);
  const double dt = 0.3 / p.gamma;
  const Trajectory traj = evolve(p, grid, dt, 12);
  const double mass0 = traj.diagnostics.front().mass;
  for (const StepDiagnostics& diag : traj.diagnostics) {
    CHECK(std::abs(diag.mass - mass0) <= 1e-10);
    CHECK(diag.min_entry >= -1e-11);
    CHECK(diag.residual <= 1e-12);
  }
}

TEST_CASE("OU terminal density approaches the analytic Gaussian") {
  const FPEProblem p = catalog::make_ou(1, 8.0, 0.5);
  const Grid grid(1, 128, 8.0);
  const Trajectory traj = evolve(p, grid, 0.5 / 256.0, 256);
  const Eigen::VectorXd ref = p.reference(grid, 0.5);
  CHECK(test::relative_l2(traj.terminal(), ref) <= 2e-3);
}

TEST_CASE("dt beyond the stability hypothesis only warns") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 1.0, {{"theta", 3.0}});
  const Grid grid(1, 16, 4.0);
  const Trajectory traj = evolve(p, grid, 0.5, 2);  // dt > 1/(2 gamma)
  bool warned = false;
  for (const std::string& w : traj.warnings)
    if (w.find("1/(2 gamma)") != std::string::npos) warned = true;
  CHECK(warned);
}

TEST_CASE("failures carry the offending step index") {
  FPEProblem p = catalog::make_diffusion(1, 1.0, 1.0, {{"c", 1.0}});
  p.time_dependent = true;
  p.diffusion = [](int, std::span<const double>, double t) { return t < 0.15 ? 1.0 : -1.0; };
  p.diffusion_deriv = [](int, std::span<const double>, double) { return 0.0; };
  const Grid grid(1, 8, 1.0);
  try {
    (void)evolve(p, grid, 0.1, 5);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
}
