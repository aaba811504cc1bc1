#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpcc/global_system.hpp"
#include "fpcc/grid.hpp"
#include "fpcc/model.hpp"

namespace fpcc {

// Mesh parameters chosen from the error budget. Both branches keep
// C (dt + d h^2) / q <= eps / 4 and dt <= 1/(2 gamma); rounding N and N_t up
// only shrinks the budget. The gamma < 1/2 corner, where the split
// d h^2 = eps q / (4C) - eps q / (8 C gamma) goes negative, falls back to the
// even split dt = d h^2 = eps q / (8C) and is flagged.
struct DiscretizationPlan {
  double epsilon = 0.0;
  double gamma = 0.0;
  double error_constant = 1.0;  // C
  double q = 1.0;               // lower bound on ||rho(T)||_2 (probability-vector norm)
  int dim = 1;
  double length = 0.0;
  double horizon = 0.0;

  int branch = 0;                // 0: gamma >= 1, 1: gamma in (1/2, 1), 2: fallback
  bool fallback = false;
  double dt_raw = 0.0;
  double h_raw = 0.0;
  std::int64_t intervals = 0;    // N after rounding
  std::int64_t n_steps = 0;      // N_t after rounding
  double h = 0.0;
  double dt = 0.0;

  double budget_used() const;    // C (dt + d h^2) / q, must be <= eps/4
};

DiscretizationPlan choose_discretization(double epsilon, double gamma, double error_constant,
                                         double q, int dim, double length, double horizon);

struct EmulateOptions {
  double tolerance = 1e-12;     // classical solve target (well below eps/2)
  bool inject_noise = false;    // perturb the terminal state by chord eps/2
  std::int64_t samples = 0;     // measurement samples to draw (0 = none)
  std::uint64_t seed = 42;
};

struct EmulationResult {
  Eigen::VectorXd terminal_state;      // normalized terminal block (noise applied if enabled)
  double success_probability = 0.0;    // analytic post-selection probability
  std::vector<double> block_probabilities;  // measurement probability of each block
  std::vector<std::int64_t> block_counts;   // sampled block histogram
  std::map<std::int64_t, std::int64_t> outcome_counts;  // flat (block, node) index -> count
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::string generator = "mt19937_64";
  double injected_noise = 0.0;         // chord distance of the injected perturbation
  double solve_residual = 0.0;
  std::int64_t n_steps = 0;
  std::int64_t block_size = 0;
};

// Classical emulation of the pipeline: build the extended system, solve it,
// extract the replicated terminal block, compute post-selection statistics,
// and draw seeded measurement samples from the squared-amplitude distribution.
EmulationResult emulate(const FPEProblem& problem, const Grid& grid,
                        const DiscretizationPlan& plan, const EmulateOptions& options = {});

// || ref/||ref|| - terminal_state ||_2 on the same grid.
double fidelity_check(const EmulationResult& result, const Eigen::VectorXd& reference);

// Heuristic lower bound on q = ||rho(T)||_2 in the probability-vector
// convention (entries rho_p h^d). A coarse run is rescaled to the target
// spacing by (h_target / h_coarse)^(d/2) and halved for safety.
double estimate_q(const FPEProblem& problem, std::int64_t coarse_intervals,
                  std::int64_t coarse_steps, double target_h);

}  // namespace fpcc
