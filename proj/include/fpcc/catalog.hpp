#pragma once

#include <map>
#include <string>

#include "fpcc/model.hpp"

namespace fpcc::catalog {

// Pure diffusion: mu = 0, D^i = c. Parameters: "c" (default 0.5),
// "gamma" (declared constant, default 1e-6 since M == 0).
FPEProblem make_diffusion(int dim, double length, double horizon,
                          const std::map<std::string, double>& params = {});

// Ornstein-Uhlenbeck: mu_i = -theta (x_i - center), D^i = diff.
// Parameters: "theta" (1), "center" (L/2), "diff" (0.5). gamma = theta.
// Carries the free-space Gaussian reference (valid while the density stays
// clear of the boundary).
FPEProblem make_ou(int dim, double length, double horizon,
                   const std::map<std::string, double>& params = {});

// Double well: V(x) = sum_i a ((x_i - center)^2 - b)^2, mu = -grad V,
// D^i = diff. Parameters: "a" (2), "b" (0.25), "center" (L/2), "diff" (0.25).
// gamma computed from the analytic derivative bound of M on the domain.
FPEProblem make_double_well(int dim, double length, double horizon,
                            const std::map<std::string, double>& params = {});

// Factory by name: "diffusion", "ou", "double-well". Unknown names throw
// ConfigError. Recognized initial-condition keys (optional, applied to any
// problem): init.kind = 0 gaussian / 1 point via "init_point" flag,
// "init_mean", "init_variance", "init_x0" (scalar, broadcast to every axis).
FPEProblem make(const std::string& name, int dim, double length, double horizon,
                const std::map<std::string, double>& params = {});

// Free-space Gaussian density for an OU process started from a Gaussian,
// sampled at the grid nodes: mean_i(t) = c + (m0_i - c) e^{-theta t},
// var_i(t) = v_inf + (v0_i - v_inf) e^{-2 theta t}, v_inf = diff / theta.
Eigen::VectorXd ou_reference_density(const Grid& grid, double t, double theta, double center,
                                     double diff, const std::vector<double>& mean0,
                                     const std::vector<double>& var0);

}  // namespace fpcc::catalog
