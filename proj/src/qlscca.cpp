#include "fpcc/qlscca.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fpcc/errors.hpp"
#include "fpcc/stepper.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

double DiscretizationPlan::budget_used() const {
  return error_constant * (dt + static_cast<double>(dim) * h * h) / q;
}

DiscretizationPlan choose_discretization(double epsilon, double gamma, double error_constant,
                                         double q, int dim, double length, double horizon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("choose_discretization: epsilon must lie in (0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("choose_discretization: gamma must be positive");
  if (!(error_constant >= 1.0))
    throw std::invalid_argument("choose_discretization: error constant C must be >= 1");
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("choose_discretization: q must lie in (0, 1]");
  if (dim < 1 || !(length > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("choose_discretization: bad domain parameters");

  DiscretizationPlan plan;
  plan.epsilon = epsilon;
  plan.gamma = gamma;
  plan.error_constant = error_constant;
  plan.q = q;
  plan.dim = dim;
  plan.length = length;
  plan.horizon = horizon;

  const double budget = epsilon * q / (8.0 * error_constant * gamma);
  double h2d;  // d h^2
  if (gamma >= 1.0) {
    plan.branch = 0;
    plan.dt_raw = budget;
    h2d = budget;
  } else if (gamma > 0.5) {
    plan.branch = 1;
    plan.dt_raw = budget;
    h2d = epsilon * q / (4.0 * error_constant) - budget;
  } else {
    // The branch formula would allocate a negative h^2; use the even split of
    // the eps q / (4C) budget instead, which also satisfies dt <= 1/(2 gamma).
    plan.branch = 2;
    plan.fallback = true;
    plan.dt_raw = epsilon * q / (8.0 * error_constant);
    h2d = plan.dt_raw;
  }
  plan.dt_raw = std::min(plan.dt_raw, 0.5 / gamma);
  plan.h_raw = std::sqrt(h2d / static_cast<double>(dim));

  plan.intervals = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                                 std::ceil(length / plan.h_raw)));
  plan.h = length / static_cast<double>(plan.intervals);
  plan.n_steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                               std::ceil(horizon / plan.dt_raw)));
  plan.dt = horizon / static_cast<double>(plan.n_steps);

  if (plan.dt > 0.5 / gamma + 1e-15)
    throw HypothesisError("choose_discretization: rounded dt exceeds 1/(2 gamma)");
  if (plan.budget_used() > epsilon / 4.0 * (1.0 + 1e-12))
    throw HypothesisError("choose_discretization: rounded plan exceeds the eps/4 budget");
  return plan;
}

EmulationResult emulate(const FPEProblem& problem, const Grid& grid,
                        const DiscretizationPlan& plan, const EmulateOptions& options) {
  if (grid.intervals() != plan.intervals || grid.dim() != plan.dim)
    throw std::invalid_argument("emulate: grid does not match the plan");

  const GlobalSystem system =
      build_global(problem, grid, plan.dt, plan.n_steps, GlobalForm::extended);

  EmulationResult result;
  result.n_steps = plan.n_steps;
  result.block_size = system.block_size();
  result.seed = options.seed;
  result.samples = options.samples;

  const Eigen::VectorXd solution =
      solve_global(system, options.tolerance, GlobalSolveMethod::automatic,
                   &result.solve_residual);

  // Post-selection statistics over the 2 N_t blocks of the solution state.
  const std::int64_t blocks = system.n_blocks();
  const double total_sq = solution.squaredNorm();
  if (!(total_sq > 0.0)) throw SolveError("emulate: zero global solution", 0.0);
  result.block_probabilities.resize(static_cast<std::size_t>(blocks));
  double padded_sq = 0.0;
  for (std::int64_t nb = 0; nb < blocks; ++nb) {
    const double sq = system.block(solution, nb).squaredNorm();
    result.block_probabilities[static_cast<std::size_t>(nb)] = sq / total_sq;
    if (nb >= plan.n_steps) padded_sq += sq;
  }
  result.success_probability = padded_sq / total_sq;

  // Terminal state: first padded block, i.e. rho^{N_t}.
  Eigen::VectorXd terminal = system.block(solution, plan.n_steps);
  const double tnorm = terminal.norm();
  if (!(tnorm > 0.0)) throw SolveError("emulate: zero terminal block", 0.0);
  terminal /= tnorm;

  std::mt19937_64 rng(options.seed);
  if (options.inject_noise) {
    // Rotate the unit vector by a chord of exactly eps/2, emulating the
    // worst-case normalized-state error the quantum solve is allowed.
    const double chord = plan.epsilon / 2.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd u(terminal.size());
    for (std::int64_t i = 0; i < u.size(); ++i) u[i] = normal(rng);
    u -= terminal * terminal.dot(u);
    const double un = u.norm();
    if (un > 0.0 && chord > 0.0 && chord < 2.0) {
      u /= un;
      const double angle = 2.0 * std::asin(chord / 2.0);
      terminal = std::cos(angle) * terminal + std::sin(angle) * u;
      result.injected_noise = chord;
    }
  }
  result.terminal_state = terminal;

  if (options.samples > 0) {
    std::vector<double> weights(static_cast<std::size_t>(solution.size()));
    for (std::int64_t i = 0; i < solution.size(); ++i)
      weights[static_cast<std::size_t>(i)] = solution[i] * solution[i];
    std::discrete_distribution<std::int64_t> dist(weights.begin(), weights.end());
    result.block_counts.assign(static_cast<std::size_t>(blocks), 0);
    for (std::int64_t s = 0; s < options.samples; ++s) {
      const std::int64_t flat = dist(rng);
      ++result.block_counts[static_cast<std::size_t>(flat / system.block_size())];
      ++result.outcome_counts[flat];
    }
  }
  return result;
}

double fidelity_check(const EmulationResult& result, const Eigen::VectorXd& reference) {
  if (reference.size() != result.terminal_state.size())
    throw std::invalid_argument("fidelity_check: reference/grid size mismatch");
  const double n = reference.norm();
  if (!(n > 0.0)) throw std::invalid_argument("fidelity_check: zero reference");
  return (reference / n - result.terminal_state).norm();
}

double estimate_q(const FPEProblem& problem, std::int64_t coarse_intervals,
                  std::int64_t coarse_steps, double target_h) {
  const Grid coarse(problem.dim, coarse_intervals, problem.length);
  const double dt = problem.horizon / static_cast<double>(coarse_steps);
  const Trajectory traj = evolve(problem, coarse, dt, coarse_steps);
  const double cell = std::pow(coarse.spacing(), static_cast<double>(problem.dim));
  const double coarse_norm = traj.terminal().norm() * cell;  // ||rho h^d||_2
  const double scale =
      std::pow(target_h / coarse.spacing(), static_cast<double>(problem.dim) / 2.0);
  return std::min(1.0, 0.5 * coarse_norm * scale);
}

}  // namespace fpcc
