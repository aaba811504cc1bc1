#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>

#include "fpcc/catalog.hpp"
#include "fpcc/global_system.hpp"
#include "fpcc/stepper.hpp"
#include "support.hpp"

using namespace fpcc;

TEST_CASE("single-step plain system is A^0 with f = rho^0") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.1);
  const Grid grid(1, 8, 4.0);
  const GlobalSystem sys = build_global(p, grid, 0.1, 1, GlobalForm::plain);
  CHECK(sys.n_blocks() == 1);
  const Eigen::MatrixXd L(sys.materialize());
  const Eigen::MatrixXd A(assemble_step_matrix(p, grid, 0.0, 0.1).matrix);
  CHECK((L - A).cwiseAbs().maxCoeff() == 0.0);
  CHECK(test::relative_l2(sys.rhs(), discretize_initial(p, grid)) == 0.0);
}

TEST_CASE("extended system with N_t = 2 has the padded block structure") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.2);
  const Grid grid(1, 5, 4.0);
  const GlobalSystem sys = build_global(p, grid, 0.1, 2, GlobalForm::extended);
  CHECK(sys.n_blocks() == 4);
  const std::int64_t bs = sys.block_size();
  const Eigen::MatrixXd L(sys.materialize());
  // Block rows 2 and 3: diagonal I, sub-diagonal -I.
  for (std::int64_t nb : {2, 3}) {
    const Eigen::MatrixXd diag = L.block(nb * bs, nb * bs, bs, bs);
    const Eigen::MatrixXd sub = L.block(nb * bs, (nb - 1) * bs, bs, bs);
    CHECK((diag - Eigen::MatrixXd::Identity(bs, bs)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sub + Eigen::MatrixXd::Identity(bs, bs)).cwiseAbs().maxCoeff() == 0.0);
  }
  // Right-hand side: rho^0 in block 0, zeros elsewhere.
  CHECK(sys.rhs().tail(3 * bs).norm() == 0.0);
}

TEST_CASE("apply/materialize agree and f = 0 solves to zero") {
  const FPEProblem p = catalog::make_ou(2, 4.0, 0.2);
  const Grid grid(2, 4, 4.0);
  const GlobalSystem sys = build_global(p, grid, 0.05, 3, GlobalForm::extended);
  const Eigen::MatrixXd L(sys.materialize());
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(sys.rows(), -1.0, 2.0);
  CHECK((sys.apply(v) - L * v).cwiseAbs().maxCoeff() <= 1e-13 * L.cwiseAbs().maxCoeff());
  CHECK((sys.apply_transpose(v) - L.transpose() * v).cwiseAbs().maxCoeff() <=
        1e-13 * L.cwiseAbs().maxCoeff());
  CHECK(sys.solve_blockwise(Eigen::VectorXd::Zero(sys.rows())).norm() == 0.0);
}

TEST_CASE("plain global solve matches the sequential stepper blockwise") {
  const FPEProblem p = catalog::make_ou(1, 8.0, 0.5);
  const Grid grid(1, 24, 8.0);
  const std::int64_t n_steps = 16;
  const double dt = 0.5 / static_cast<double>(n_steps);
  const GlobalSystem sys = build_global(p, grid, dt, n_steps, GlobalForm::plain);

  const Eigen::VectorXd direct = solve_global(sys, 1e-12, GlobalSolveMethod::direct);
  const Trajectory traj = evolve(p, grid, dt, n_steps);
  for (std::int64_t nb = 0; nb < n_steps; ++nb) {
    const Eigen::VectorXd block = sys.block(direct, nb);
    CHECK(test::relative_l2(block, traj.states[static_cast<std::size_t>(nb + 1)]) <= 1e-9);
  }

  // The block-substitution path agrees with the materialized direct path.
  const Eigen::VectorXd blockwise = solve_global(sys, 1e-12, GlobalSolveMethod::block);
  CHECK(test::relative_l2(blockwise, direct) <= 1e-11);
}

TEST_CASE("extended solution replicates the terminal block") {
  const FPEProblem p = catalog::make_ou(1, 8.0, 0.5);
  const Grid grid(1, 16, 8.0);
  const std::int64_t n_steps = 8;
  const GlobalSystem sys =
      build_global(p, grid, 0.5 / n_steps, n_steps, GlobalForm::extended);
  const Eigen::VectorXd x = solve_global(sys, 1e-12, GlobalSolveMethod::direct);
  const Eigen::VectorXd last = sys.block(x, n_steps - 1);
  for (std::int64_t nb = n_steps; nb < 2 * n_steps; ++nb)
    CHECK(test::relative_l2(sys.block(x, nb), last) <= 1e-9);
}

TEST_CASE("sparsity audit: at most 2d + 2 nonzeros per row of the extended system") {
  for (int d : {1, 2, 3}) {
    const FPEProblem p = catalog::make_ou(d, 2.0, 0.2);
    const Grid grid(d, d == 3 ? 3 : 5, 2.0);
    const GlobalSystem sys = build_global(p, grid, 0.05, 3, GlobalForm::extended);
    CHECK(sys.max_row_nonzeros() == 2 * d + 2);
  }
}

TEST_CASE("hermitian dilation structure and spectrum") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.4, {{"theta", 0.8}});
  const Grid grid(1, 7, 4.0);  // block 8, two blocks -> L is 16x16, dilation 32x32
  const GlobalSystem sys = build_global(p, grid, 0.2, 2, GlobalForm::plain);
  const DilatedSystem dilated = hermitian_dilation(sys);
  const Eigen::MatrixXd S(dilated.matrix);

  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(S.topLeftCorner(dilated.half, dilated.half).cwiseAbs().maxCoeff() == 0.0);
  CHECK(S.bottomRightCorner(dilated.half, dilated.half).cwiseAbs().maxCoeff() == 0.0);

  // Eigenvalues of the dilation are +- singular values of L.
  const Eigen::MatrixXd L(sys.materialize());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::VectorXd sv = svd.singularValues();
  const Eigen::VectorXd ev = eig.eigenvalues();
  // eig sorts ascending, svd descending: ev = (-sv[0], ..., -sv[n-1], sv[n-1], ..., sv[0]).
  for (std::int64_t k = 0; k < sv.size(); ++k) {
    CHECK(ev[ev.size() - 1 - k] == doctest::Approx(sv[k]).epsilon(1e-10));
    CHECK(ev[k] == doctest::Approx(-sv[k]).epsilon(1e-10));
  }
}

TEST_CASE("dilated solve recovers the plain solution in the first half") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.4);
  const Grid grid(1, 9, 4.0);
  const GlobalSystem sys = build_global(p, grid, 0.1, 4, GlobalForm::plain);
  const DilatedSystem dilated = hermitian_dilation(sys);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(dilated.matrix);
  REQUIRE(lu.info() == Eigen::Success);
  const Eigen::VectorXd xy = lu.solve(dilated.rhs);
  const Eigen::VectorXd plain = solve_global(sys, 1e-12, GlobalSolveMethod::direct);
  CHECK(test::relative_l2(xy.head(dilated.half), plain) <= 1e-9);
  CHECK(xy.tail(dilated.half).norm() <= 1e-9 * plain.norm());
}

TEST_CASE("materialization cap throws instead of allocating") {
  const FPEProblem p = catalog::make_ou(1, 4.0, 0.4);
  const Grid grid(1, 64, 4.0);
  const GlobalSystem sys = build_global(p, grid, 0.05, 8, GlobalForm::plain);
  CHECK_THROWS_AS((void)sys.materialize(10), std::length_error);
}

TEST_CASE("time-dependent problems assemble one block per step") {
  FPEProblem p = catalog::make_diffusion(1, 1.0, 0.4, {{"c", 1.0}});
  p.time_dependent = true;
  p.diffusion = [](int, std::span<const double>, double t) { return 1.0 + t; };
  p.diffusion_deriv = [](int, std::span<const double>, double) { return 0.0; };
  const Grid grid(1, 4, 1.0);
  const GlobalSystem sys = build_global(p, grid, 0.1, 3, GlobalForm::plain);
  CHECK(sys.step(0).matrix.coeff(1, 2) != sys.step(2).matrix.coeff(1, 2));
  // Forward substitution still reproduces the stepper.
  const Eigen::VectorXd x = solve_global(sys, 1e-12, GlobalSolveMethod::block);
  const Trajectory traj = evolve(p, grid, 0.1, 3);
  CHECK(test::relative_l2(sys.block(x, 2), traj.states[3]) <= 1e-10);
}
