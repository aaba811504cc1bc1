#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fpcc/grid.hpp"

namespace fpcc {

// Per-axis scalar coefficient field, e.g. mu_i(x, t) or D^i(x, t).
using AxisField = std::function<double(int axis, std::span<const double> x, double t)>;

struct PointMassInit {
  std::vector<double> x0;
};

struct GaussianInit {
  std::vector<double> mean;
  std::vector<double> variance;  // per axis
};

struct ExplicitInit {
  Eigen::VectorXd values;
};

using InitialCondition = std::variant<PointMassInit, GaussianInit, ExplicitInit>;

// Drift-diffusion problem on [0, L]^d over [0, T]. The diffusion tensor is
// diagonal with positive entries D^i; the advective coefficient seen by the
// scheme is M^i = d/dx_i D^i - mu_i. `gamma` is the declared Lipschitz
// constant of the face-pair sums of M (see validate_assumptions).
struct FPEProblem {
  int dim = 1;
  double length = 1.0;   // L
  double horizon = 1.0;  // T
  double gamma = 1.0;

  AxisField drift;            // mu_i(x, t)
  AxisField diffusion;        // D^i(x, t) > 0
  AxisField diffusion_deriv;  // optional analytic d/dx_i D^i; empty -> symmetric difference

  InitialCondition initial = GaussianInit{};
  bool time_dependent = false;

  std::string name = "custom";
  std::map<std::string, double> parameters;

  // Optional analytic density on a grid at time t (set by catalog problems
  // that have one); empty otherwise.
  std::function<Eigen::VectorXd(const Grid&, double)> reference;

  bool has_reference() const { return static_cast<bool>(reference); }
};

void validate_problem(const FPEProblem& problem);

// Chang-Cooper weight W(w) = w / (e^w - 1), extended by continuity to W(0) = 1.
// |w| < 1e-4 uses the series 1 - w/2 + w^2/12 - w^4/720; positive w uses the
// overflow-safe form w e^{-w} / (1 - e^{-w}).
double cc_W(double w);

// W(w) e^w = w / (1 - e^{-w}). Identical to cc_W(-w); assembly must never form
// the product W * e^w directly.
double cc_We(double w);

// Chang-Cooper interpolation weight delta(w) = 1/w - 1/(e^w - 1), in (0, 1).
// Appears in the flux definition but cancels from the simplified scheme; kept
// for completeness.
double cc_delta(double w);

// M^i(x, t) = d/dx_i D^i - mu_i. Uses the analytic diffusion derivative when
// the problem supplies one, otherwise a symmetric difference with stencil
// width fd_step (callers pass the mesh spacing h).
double eval_M(const FPEProblem& problem, std::span<const double> x, double t, int axis,
              double fd_step);

// Coefficients sampled at one half-grid face x = (j +- e_i/2) h.
struct FaceCoefficients {
  double M = 0.0;  // drift-like coefficient at the face
  double D = 0.0;  // diffusion at the face
  double w = 0.0;  // cell Peclet number h M / D
  double W = 0.0;  // Chang-Cooper weight cc_W(w)
};

// Sample the face (j, axis, side). side = +1 is the face toward j + e_i.
// j must be a valid grid point; the face itself may lie in the half-cell
// ghost layer (j_i = 0 with side -1, j_i = N with side +1), which the
// boundary-row analysis of the scheme needs.
FaceCoefficients sample_face(const FPEProblem& problem, const Grid& grid, const MultiIndex& j,
                             int axis, int side, double t);

struct AssumptionReport {
  double min_M = 0.0;                // minimum of M over in-domain faces
  double lipschitz_estimate = 0.0;   // empirical face-pair estimate of gamma
  double declared_gamma = 0.0;
  double boundary_max_abs_M = 0.0;   // compact-support proxy
  std::vector<std::string> warnings;
  bool positivity_ok = false;
  bool lipschitz_ok = false;
};

// Advisory sweep over all faces at the given times. Solving proceeds
// regardless of the outcome; violations only produce warnings.
AssumptionReport validate_assumptions(const FPEProblem& problem, const Grid& grid,
                                      std::span<const double> times);

// Node values of the initial density, scaled so that sum(rho) h^d = 1.
Eigen::VectorXd discretize_initial(const FPEProblem& problem, const Grid& grid);

}  // namespace fpcc
