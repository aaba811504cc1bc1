#include "fpcc/catalog.hpp"

#include <cmath>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc::catalog {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

InitialCondition initial_from_params(int dim, double length,
                                     const std::map<std::string, double>& params,
                                     double default_mean, double default_variance) {
  if (get(params, "init_point", 0.0) != 0.0) {
    const double x0 = get(params, "init_x0", length / 2.0);
    return PointMassInit{std::vector<double>(static_cast<std::size_t>(dim), x0)};
  }
  const double mean = get(params, "init_mean", default_mean);
  const double variance = get(params, "init_variance", default_variance);
  return GaussianInit{std::vector<double>(static_cast<std::size_t>(dim), mean),
                      std::vector<double>(static_cast<std::size_t>(dim), variance)};
}

}  // namespace

Eigen::VectorXd ou_reference_density(const Grid& grid, double t, double theta, double center,
                                     double diff, const std::vector<double>& mean0,
                                     const std::vector<double>& var0) {
  const int d = grid.dim();
  const double v_inf = diff / theta;
  const double decay = std::exp(-theta * t);
  std::vector<double> mean(static_cast<std::size_t>(d));
  std::vector<double> var(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    mean[static_cast<std::size_t>(i)] = center + (mean0[static_cast<std::size_t>(i)] - center) * decay;
    var[static_cast<std::size_t>(i)] =
        v_inf + (var0[static_cast<std::size_t>(i)] - v_inf) * decay * decay;
  }
  Eigen::VectorXd rho(grid.num_points());
  MultiIndex j(static_cast<std::size_t>(d), 0);
  const double h = grid.spacing();
  for (std::int64_t p = 0; p < grid.num_points(); ++p) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) {
      const double xi = static_cast<double>(j[static_cast<std::size_t>(i)]) * h;
      const double mi = mean[static_cast<std::size_t>(i)];
      const double vi = var[static_cast<std::size_t>(i)];
      v *= std::exp(-(xi - mi) * (xi - mi) / (2.0 * vi)) / std::sqrt(2.0 * M_PI * vi);
    }
    rho[p] = v;
    advance_multi_index(j, grid.intervals());
  }
  return rho;
}

FPEProblem make_diffusion(int dim, double length, double horizon,
                          const std::map<std::string, double>& params) {
  FPEProblem problem;
  problem.dim = dim;
  problem.length = length;
  problem.horizon = horizon;
  problem.name = "diffusion";
  const double c = get(params, "c", 0.5);
  if (!(c > 0.0)) throw ConfigError("diffusion: parameter c must be positive");
  problem.parameters = {{"c", c}};
  problem.gamma = get(params, "gamma", 1e-6);  // M == 0; any positive constant is valid
  problem.drift = [](int, std::span<const double>, double) { return 0.0; };
  problem.diffusion = [c](int, std::span<const double>, double) { return c; };
  problem.diffusion_deriv = [](int, std::span<const double>, double) { return 0.0; };
  problem.initial = initial_from_params(dim, length, params, length / 2.0,
                                        length * length / 64.0);

  if (const auto* g = std::get_if<GaussianInit>(&problem.initial)) {
    const auto mean0 = g->mean;
    const auto var0 = g->variance;
    problem.reference = [c, mean0, var0](const Grid& grid, double t) {
      // Heat kernel: variance grows linearly, var_i(t) = var_i(0) + 2 c t.
      std::vector<double> var(var0.size());
      for (std::size_t i = 0; i < var0.size(); ++i) var[i] = var0[i] + 2.0 * c * t;
      Eigen::VectorXd rho(grid.num_points());
      MultiIndex j(static_cast<std::size_t>(grid.dim()), 0);
      const double h = grid.spacing();
      for (std::int64_t p = 0; p < grid.num_points(); ++p) {
        double v = 1.0;
        for (int i = 0; i < grid.dim(); ++i) {
          const double xi = static_cast<double>(j[static_cast<std::size_t>(i)]) * h;
          v *= std::exp(-(xi - mean0[static_cast<std::size_t>(i)]) *
                        (xi - mean0[static_cast<std::size_t>(i)]) /
                        (2.0 * var[static_cast<std::size_t>(i)])) /
               std::sqrt(2.0 * M_PI * var[static_cast<std::size_t>(i)]);
        }
        rho[p] = v;
        advance_multi_index(j, grid.intervals());
      }
      return rho;
    };
  }
  return problem;
}

FPEProblem make_ou(int dim, double length, double horizon,
                   const std::map<std::string, double>& params) {
  FPEProblem problem;
  problem.dim = dim;
  problem.length = length;
  problem.horizon = horizon;
  problem.name = "ou";
  const double theta = get(params, "theta", 1.0);
  const double center = get(params, "center", length / 2.0);
  const double diff = get(params, "diff", 0.5);
  if (!(theta > 0.0)) throw ConfigError("ou: parameter theta must be positive");
  if (!(diff > 0.0)) throw ConfigError("ou: parameter diff must be positive");
  problem.parameters = {{"theta", theta}, {"center", center}, {"diff", diff}};
  // M^i = theta (x_i - center). The dominance lemma consumes the face-pair
  // sum over all axes, sum_i (M^i at j + e_i/2 - M^i at j - e_i/2) = d theta h,
  // so the valid constant is d * theta.
  problem.gamma = get(params, "gamma", static_cast<double>(dim) * theta);
  problem.drift = [theta, center](int axis, std::span<const double> x, double) {
    return -theta * (x[static_cast<std::size_t>(axis)] - center);
  };
  problem.diffusion = [diff](int, std::span<const double>, double) { return diff; };
  problem.diffusion_deriv = [](int, std::span<const double>, double) { return 0.0; };
  const double v_inf = diff / theta;
  problem.initial = initial_from_params(dim, length, params, center, v_inf / 2.0);

  if (const auto* g = std::get_if<GaussianInit>(&problem.initial)) {
    const auto mean0 = g->mean;
    const auto var0 = g->variance;
    problem.reference = [theta, center, diff, mean0, var0](const Grid& grid, double t) {
      return ou_reference_density(grid, t, theta, center, diff, mean0, var0);
    };
  }
  return problem;
}

FPEProblem make_double_well(int dim, double length, double horizon,
                            const std::map<std::string, double>& params) {
  FPEProblem problem;
  problem.dim = dim;
  problem.length = length;
  problem.horizon = horizon;
  problem.name = "double-well";
  const double a = get(params, "a", 2.0);
  const double b = get(params, "b", 0.25);
  const double center = get(params, "center", length / 2.0);
  const double diff = get(params, "diff", 0.25);
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("double-well: a and b must be positive");
  if (!(diff > 0.0)) throw ConfigError("double-well: parameter diff must be positive");
  problem.parameters = {{"a", a}, {"b", b}, {"center", center}, {"diff", diff}};
  // M^i = 4 a ((x_i - c)^2 - b)(x_i - c); |dM^i/dx_i| <= 4 a (3 s^2 - b) at
  // s = max |x - c| = L/2. Summed over the d face pairs of a row.
  const double s = length / 2.0;
  problem.gamma =
      get(params, "gamma", static_cast<double>(dim) * 4.0 * a * std::max(3.0 * s * s - b, b));
  problem.drift = [a, b, center](int axis, std::span<const double> x, double) {
    const double u = x[static_cast<std::size_t>(axis)] - center;
    return -4.0 * a * (u * u - b) * u;
  };
  problem.diffusion = [diff](int, std::span<const double>, double) { return diff; };
  problem.diffusion_deriv = [](int, std::span<const double>, double) { return 0.0; };
  problem.initial = initial_from_params(dim, length, params, center + std::sqrt(b),
                                        std::max(b / 4.0, 1e-3));
  return problem;
}

FPEProblem make(const std::string& name, int dim, double length, double horizon,
                const std::map<std::string, double>& params) {
  if (name == "diffusion") return make_diffusion(dim, length, horizon, params);
  if (name == "ou") return make_ou(dim, length, horizon, params);
  if (name == "double-well") return make_double_well(dim, length, horizon, params);
  throw ConfigError("unknown problem name '" + name +
                    "' (expected diffusion, ou, or double-well)");
}

}  // namespace fpcc::catalog
