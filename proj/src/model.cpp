#include "fpcc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

namespace {

constexpr double kSeriesThreshold = 1e-4;

std::string face_label(const MultiIndex& j, int axis, int side) {
  std::ostringstream os;
  os << "face (j=";
  for (std::size_t i = 0; i < j.size(); ++i) os << (i ? "," : "") << j[i];
  os << ", axis=" << axis << ", side=" << (side > 0 ? "+" : "-") << ")";
  return os.str();
}

}  // namespace

void validate_problem(const FPEProblem& problem) {
  if (problem.dim < 1) throw std::invalid_argument("problem dimension must be >= 1");
  if (!(problem.length > 0.0)) throw std::invalid_argument("domain length must be positive");
  if (!(problem.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(problem.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!problem.drift) throw std::invalid_argument("problem has no drift field");
  if (!problem.diffusion) throw std::invalid_argument("problem has no diffusion field");
}

double cc_W(double w) {
  if (!std::isfinite(w)) throw std::invalid_argument("cc_W: non-finite argument");
  if (std::abs(w) < kSeriesThreshold)
    return 1.0 - w / 2.0 + w * w / 12.0 - w * w * w * w / 720.0;
  if (w > 0.0) {
    // w e^{-w} / (1 - e^{-w}); e^w would overflow near w ~ 710.
    return -w * std::exp(-w) / std::expm1(-w);
  }
  return w / std::expm1(w);
}

double cc_We(double w) { return cc_W(-w); }

double cc_delta(double w) {
  if (!std::isfinite(w)) throw std::invalid_argument("cc_delta: non-finite argument");
  if (std::abs(w) < kSeriesThreshold) return 0.5 - w / 12.0 + w * w * w / 720.0;
  // expm1 overflows to +inf for large w; 1/inf = 0 gives the right tail.
  return 1.0 / w - 1.0 / std::expm1(w);
}

double eval_M(const FPEProblem& problem, std::span<const double> x, double t, int axis,
              double fd_step) {
  double dD;
  if (problem.diffusion_deriv) {
    dD = problem.diffusion_deriv(axis, x, t);
  } else {
    std::vector<double> probe(x.begin(), x.end());
    probe[static_cast<std::size_t>(axis)] = x[static_cast<std::size_t>(axis)] + fd_step / 2.0;
    const double upper = problem.diffusion(axis, probe, t);
    probe[static_cast<std::size_t>(axis)] = x[static_cast<std::size_t>(axis)] - fd_step / 2.0;
    const double lower = problem.diffusion(axis, probe, t);
    if (!std::isfinite(upper) || !std::isfinite(lower))
      throw AssumptionError("eval_M: diffusion non-finite at finite-difference probe");
    dD = (upper - lower) / fd_step;
  }
  const double mu = problem.drift(axis, x, t);
  const double m = dD - mu;
  if (!std::isfinite(m)) throw AssumptionError("eval_M: non-finite coefficient value");
  return m;
}

FaceCoefficients sample_face(const FPEProblem& problem, const Grid& grid, const MultiIndex& j,
                             int axis, int side, double t) {
  if (axis < 0 || axis >= grid.dim()) throw std::out_of_range("sample_face: axis out of range");
  if (side != 1 && side != -1) throw std::out_of_range("sample_face: side must be +1 or -1");

  const double h = grid.spacing();
  std::vector<double> x(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] < 0 || j[i] > grid.intervals())
      throw std::out_of_range("sample_face: multi-index component out of range");
    x[i] = static_cast<double>(j[i]) * h;
  }
  // j_i +- 0.5 is exact in binary floating point, so both rows adjacent to a
  // face compute bit-identical coordinates (and hence identical coefficients).
  x[static_cast<std::size_t>(axis)] =
      (static_cast<double>(j[static_cast<std::size_t>(axis)]) + 0.5 * side) * h;

  FaceCoefficients face;
  face.D = problem.diffusion(axis, x, t);
  if (!std::isfinite(face.D) || face.D <= 0.0)
    throw AssumptionError("diffusion not positive at " + face_label(j, axis, side) +
                          ": D = " + format_double(face.D));
  face.M = eval_M(problem, x, t, axis, h);
  face.w = h * face.M / face.D;
  face.W = cc_W(face.w);
  return face;
}

AssumptionReport validate_assumptions(const FPEProblem& problem, const Grid& grid,
                                      std::span<const double> times) {
  validate_problem(problem);
  AssumptionReport report;
  report.declared_gamma = problem.gamma;
  report.min_M = std::numeric_limits<double>::infinity();
  report.lipschitz_estimate = 0.0;
  report.boundary_max_abs_M = 0.0;

  const int d = grid.dim();
  const double h = grid.spacing();
  const std::int64_t npts = grid.num_points();
  std::vector<double> node_M(static_cast<std::size_t>(npts * d));

  for (double t : times) {
    // M at every node, all components.
    MultiIndex j(static_cast<std::size_t>(d), 0);
    for (std::int64_t p = 0; p < npts; ++p) {
      const std::vector<double> x = grid.node_position(j);
      double max_abs = 0.0;
      for (int i = 0; i < d; ++i) {
        const double m = eval_M(problem, x, t, i, h);
        node_M[static_cast<std::size_t>(p * d + i)] = m;
        max_abs = std::max(max_abs, std::abs(m));
      }
      if (grid.on_boundary(j))
        report.boundary_max_abs_M = std::max(report.boundary_max_abs_M, max_abs);
      advance_multi_index(j, grid.intervals());
    }

    // Lipschitz estimate, node-shift sense: sum_i |M^i(x + h e_k) - M^i(x)| / h.
    for (std::int64_t p = 0; p < npts; ++p) {
      for (int k = 0; k < d; ++k) {
        const auto q = grid.neighbor(p, k, +1);
        if (!q) continue;
        double acc = 0.0;
        for (int i = 0; i < d; ++i)
          acc += std::abs(node_M[static_cast<std::size_t>(*q * d + i)] -
                          node_M[static_cast<std::size_t>(p * d + i)]);
        report.lipschitz_estimate = std::max(report.lipschitz_estimate, acc / h);
      }
    }

    // Face sweep: min M over the faces the scheme uses, plus the face-pair
    // sense of the Lipschitz bound, sum_i |M^i(j + e_i/2) - M^i(j - e_i/2)| / h.
    std::fill(j.begin(), j.end(), 0);
    for (std::int64_t p = 0; p < npts; ++p) {
      double pair_acc = 0.0;
      bool full_stencil = true;
      for (int i = 0; i < d; ++i) {
        double upper = 0.0, lower = 0.0;
        if (j[static_cast<std::size_t>(i)] < grid.intervals()) {
          upper = sample_face(problem, grid, j, i, +1, t).M;
          report.min_M = std::min(report.min_M, upper);
        } else {
          full_stencil = false;
        }
        if (j[static_cast<std::size_t>(i)] > 0) {
          lower = sample_face(problem, grid, j, i, -1, t).M;
        } else {
          full_stencil = false;
        }
        pair_acc += std::abs(upper - lower);
      }
      if (full_stencil)
        report.lipschitz_estimate = std::max(report.lipschitz_estimate, pair_acc / h);
      advance_multi_index(j, grid.intervals());
    }
  }

  report.positivity_ok = report.min_M > 0.0;
  report.lipschitz_ok = report.lipschitz_estimate <= problem.gamma;
  if (!report.positivity_ok)
    report.warnings.push_back("M is not strictly positive on the sampled faces (min M = " +
                              format_double(report.min_M) + ")");
  if (!report.lipschitz_ok)
    report.warnings.push_back("declared gamma " + format_double(problem.gamma) +
                              " is below the empirical Lipschitz estimate " +
                              format_double(report.lipschitz_estimate));
  if (report.boundary_max_abs_M > 1e-12)
    report.warnings.push_back("M does not vanish on the domain boundary (max |M| = " +
                              format_double(report.boundary_max_abs_M) +
                              "); compact support is violated");
  return report;
}

Eigen::VectorXd discretize_initial(const FPEProblem& problem, const Grid& grid) {
  validate_problem(problem);
  const int d = grid.dim();
  const double h = grid.spacing();
  const double cell = std::pow(h, static_cast<double>(d));
  const std::int64_t npts = grid.num_points();
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(npts);

  if (const auto* point = std::get_if<PointMassInit>(&problem.initial)) {
    if (static_cast<int>(point->x0.size()) != d)
      throw std::invalid_argument("initial point mass has wrong dimension");
    MultiIndex j(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      const double xi = point->x0[static_cast<std::size_t>(i)];
      if (xi < 0.0 || xi > grid.length())
        throw std::domain_error("initial point mass lies outside the domain");
      j[static_cast<std::size_t>(i)] =
          std::min<std::int64_t>(grid.intervals(), std::llround(xi / h));
    }
    rho[grid.multi_to_linear(j)] = 1.0 / cell;
    return rho;
  }

  if (const auto* gauss = std::get_if<GaussianInit>(&problem.initial)) {
    if (static_cast<int>(gauss->mean.size()) != d ||
        static_cast<int>(gauss->variance.size()) != d)
      throw std::invalid_argument("initial Gaussian has wrong dimension");
    for (int i = 0; i < d; ++i) {
      if (!(gauss->variance[static_cast<std::size_t>(i)] > 0.0))
        throw std::invalid_argument("initial Gaussian variance must be positive");
      const double mi = gauss->mean[static_cast<std::size_t>(i)];
      if (mi < 0.0 || mi > grid.length())
        throw std::domain_error("initial Gaussian mean lies outside the domain");
    }
    MultiIndex j(static_cast<std::size_t>(d), 0);
    for (std::int64_t p = 0; p < npts; ++p) {
      double v = 1.0;
      for (int i = 0; i < d; ++i) {
        const double xi = static_cast<double>(j[static_cast<std::size_t>(i)]) * h;
        const double mi = gauss->mean[static_cast<std::size_t>(i)];
        const double vi = gauss->variance[static_cast<std::size_t>(i)];
        v *= std::exp(-(xi - mi) * (xi - mi) / (2.0 * vi)) / std::sqrt(2.0 * M_PI * vi);
      }
      rho[p] = v;
      advance_multi_index(j, grid.intervals());
    }
    const double mass = stable_sum({rho.data(), static_cast<std::size_t>(rho.size())}) * cell;
    if (!(mass > 0.0)) throw std::invalid_argument("initial Gaussian vanishes on the grid");
    rho /= mass;
    return rho;
  }

  const auto& expl = std::get<ExplicitInit>(problem.initial);
  if (expl.values.size() != npts)
    throw std::invalid_argument("explicit initial vector has wrong length");
  for (std::int64_t p = 0; p < npts; ++p)
    if (expl.values[p] < 0.0)
      throw std::invalid_argument("explicit initial vector has a negative entry");
  const double mass =
      stable_sum({expl.values.data(), static_cast<std::size_t>(expl.values.size())}) * cell;
  if (!(mass > 0.0)) throw std::invalid_argument("explicit initial vector has zero mass");
  rho = expl.values / mass;
  return rho;
}

}  // namespace fpcc
