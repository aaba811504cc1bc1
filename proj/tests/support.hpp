#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "fpcc/assembly.hpp"
#include "fpcc/catalog.hpp"
#include "fpcc/grid.hpp"
#include "fpcc/model.hpp"
#include "fpcc/util.hpp"

namespace fpcc::test {

// ---------------------------------------------------------------------------
// Literal transcription of the step-matrix entry formulas, used as an oracle
// against the face-based production assembly. Every row is written with the
// full interior stencil (ghost faces included) and boundary rows are then
// corrected through boundary_beta_hat. The weight is computed from its raw
// definition w / (e^w - 1), independent of cc_W.
// ---------------------------------------------------------------------------

inline double raw_weight(double w) {
  if (w == 0.0) return 1.0;
  return w / std::expm1(w);
}

inline Eigen::MatrixXd dense_step_oracle(const FPEProblem& problem, const Grid& grid, double t,
                                         double dt) {
  const int d = grid.dim();
  const double h = grid.spacing();
  const double r = dt / (h * h);
  const std::int64_t n = grid.num_points();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

  MultiIndex j(static_cast<std::size_t>(d), 0);
  for (std::int64_t p = 0; p < n; ++p) {
    double beta = 1.0;
    std::vector<FaceCoefficients> lower_ghost, upper_ghost;
    for (int i = 0; i < d; ++i) {
      const FaceCoefficients up = sample_face(problem, grid, j, i, +1, t);
      const FaceCoefficients down = sample_face(problem, grid, j, i, -1, t);
      const double alpha = r * up.D * raw_weight(up.w) * std::exp(up.w);
      const double gamma = r * down.D * raw_weight(down.w);
      beta += r * (up.D * raw_weight(up.w) + down.D * raw_weight(down.w) * std::exp(down.w));
      const std::int64_t ji = j[static_cast<std::size_t>(i)];
      if (ji < grid.intervals()) A(p, p + grid.axis_stride(i)) = -alpha;
      if (ji > 0) A(p, p - grid.axis_stride(i)) = -gamma;
      if (ji == 0) lower_ghost.push_back(down);
      if (ji == grid.intervals()) upper_ghost.push_back(up);
    }
    A(p, p) = (lower_ghost.empty() && upper_ghost.empty())
                  ? beta
                  : boundary_beta_hat(beta, r, lower_ghost, upper_ghost);
    advance_multi_index(j, grid.intervals());
  }
  return A;
}

// ---------------------------------------------------------------------------
// Randomized smooth problems whose advective coefficient M has compact
// support: M^i = amp_i * taper(x) * cos(pi k_i . x / L + psi_i) with
// taper = prod_k 4 x_k (L - x_k) / L^2, and mu_i = dD^i/dx_i - M^i so the
// scheme sees exactly M^i. The declared gamma is sum_i sup |dM^i/dx_i|
// (sampled with margin), which validates the dominance hypotheses: interior
// face pairs differ by at most sup * h and boundary faces sit within h/2 of a
// zero of M.
// ---------------------------------------------------------------------------

inline FPEProblem random_smooth_problem(std::mt19937_64& rng, int d, double length) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Params {
    std::vector<double> d0, d1, dk, dphi, amp, psi;
    std::vector<std::vector<double>> freq;
    double length = 1.0;
    int dim = 1;
  };
  auto prm = std::make_shared<Params>();
  prm->length = length;
  prm->dim = d;
  for (int i = 0; i < d; ++i) {
    prm->d0.push_back(0.3 + 0.7 * unit(rng));
    prm->d1.push_back(0.5 * unit(rng));
    prm->dk.push_back(1.0 + std::floor(2.0 * unit(rng)));
    prm->dphi.push_back(2.0 * M_PI * unit(rng));
    prm->amp.push_back(0.2 + 1.3 * unit(rng));
    prm->psi.push_back(2.0 * M_PI * unit(rng));
    std::vector<double> k;
    for (int kk = 0; kk < d; ++kk) k.push_back(std::floor(3.0 * unit(rng)) - 1.0);
    prm->freq.push_back(k);
  }

  auto m_target = [prm](int axis, std::span<const double> x) {
    double taper = 1.0;
    for (int k = 0; k < prm->dim; ++k) {
      const double xk = x[static_cast<std::size_t>(k)];
      taper *= 4.0 * xk * (prm->length - xk) / (prm->length * prm->length);
    }
    const auto& freq = prm->freq[static_cast<std::size_t>(axis)];
    double phase = prm->psi[static_cast<std::size_t>(axis)];
    for (std::size_t kk = 0; kk < freq.size(); ++kk)
      phase += M_PI * freq[kk] * x[kk] / prm->length;
    return prm->amp[static_cast<std::size_t>(axis)] * taper * std::cos(phase);
  };

  FPEProblem problem;
  problem.dim = d;
  problem.length = length;
  problem.horizon = 1.0;
  problem.name = "random-smooth";
  problem.diffusion = [prm](int axis, std::span<const double> x, double) {
    const double s = std::sin(M_PI * prm->dk[static_cast<std::size_t>(axis)] *
                                  x[static_cast<std::size_t>(axis)] / prm->length +
                              prm->dphi[static_cast<std::size_t>(axis)]);
    return prm->d0[static_cast<std::size_t>(axis)] +
           prm->d1[static_cast<std::size_t>(axis)] * s * s;
  };
  problem.diffusion_deriv = [prm](int axis, std::span<const double> x, double) {
    const double arg = M_PI * prm->dk[static_cast<std::size_t>(axis)] *
                           x[static_cast<std::size_t>(axis)] / prm->length +
                       prm->dphi[static_cast<std::size_t>(axis)];
    return prm->d1[static_cast<std::size_t>(axis)] * 2.0 * std::sin(arg) * std::cos(arg) *
           M_PI * prm->dk[static_cast<std::size_t>(axis)] / prm->length;
  };
  auto diffusion_deriv = problem.diffusion_deriv;
  problem.drift = [diffusion_deriv, m_target](int axis, std::span<const double> x, double t) {
    return diffusion_deriv(axis, x, t) - m_target(axis, x);
  };

  const std::int64_t samples = d == 1 ? 512 : (d == 2 ? 48 : 16);
  const double fd = length / (16.0 * static_cast<double>(samples));
  double gamma = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    double sup = 0.0;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
    bool more = true;
    while (more) {
      for (int k = 0; k < d; ++k)
        x[static_cast<std::size_t>(k)] = length * static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                                         static_cast<double>(samples);
      std::vector<double> xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += fd;
      xm[static_cast<std::size_t>(i)] -= fd;
      sup = std::max(sup, std::abs(m_target(i, xp) - m_target(i, xm)) / (2.0 * fd));
      more = advance_multi_index(idx, samples);
    }
    gamma += sup;
  }
  problem.gamma = 1.3 * gamma + 1e-9;
  problem.initial =
      GaussianInit{std::vector<double>(static_cast<std::size_t>(d), length / 2.0),
                   std::vector<double>(static_cast<std::size_t>(d), length * length / 32.0)};
  return problem;
}

inline double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace fpcc::test
