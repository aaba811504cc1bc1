#include "fpcc/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <ostream>
#include <random>

#include "fpcc/errors.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

namespace {

DefectPair defects_impl(const Eigen::SparseMatrix<double>& A) {
  const std::int64_t n = A.rows();
  Eigen::VectorXd row_off = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd col_off = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] = std::abs(it.value());
      } else {
        row_off[it.row()] += std::abs(it.value());
        col_off[it.col()] += std::abs(it.value());
      }
    }
  DefectPair d;
  d.row = (diag - row_off).minCoeff();
  d.col = (diag - col_off).minCoeff();
  return d;
}

// Power iteration for the largest eigenvalue of the symmetric PSD operator
// v -> op(v). Returns the eigenvalue estimate; throws on stagnation.
template <typename Op>
double power_iteration(std::int64_t n, Op&& op, const NormOptions& options,
                       const char* label) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (std::int64_t i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();

  double lambda = 0.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd w = op(v);
    const double next = v.dot(w);  // Rayleigh quotient of the PSD operator
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (iter > 0 && std::abs(next - lambda) <= options.tolerance * std::abs(next))
      return next;
    lambda = next;
  }
  throw SolveError(std::string(label) + ": power iteration did not converge (last estimate " +
                       format_double(lambda) + ")",
                   lambda);
}

double spectral_norm_dense(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

DefectPair sdd_defects(const StepMatrix& A) { return defects_impl(A.matrix); }
DefectPair sdd_defects(const Eigen::SparseMatrix<double>& A) { return defects_impl(A); }

double norm1(const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(A.cols());
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      col[it.col()] += std::abs(it.value());
  return col.maxCoeff();
}

double norm_inf(const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      row[it.row()] += std::abs(it.value());
  return row.maxCoeff();
}

double norm2_estimate(const Eigen::SparseMatrix<double>& A, const NormOptions& options) {
  if (A.rows() != A.cols()) throw std::invalid_argument("norm2_estimate: square systems only");
  if (A.rows() <= options.dense_cap) return spectral_norm_dense(Eigen::MatrixXd(A));
  const double lambda = power_iteration(
      A.rows(),
      [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A.transpose() * (A * v)); },
      options, "norm2_estimate");
  return std::sqrt(lambda);
}

double norm2_estimate(const GlobalSystem& system, const NormOptions& options) {
  if (system.rows() <= options.dense_cap)
    return spectral_norm_dense(Eigen::MatrixXd(system.materialize()));
  const double lambda = power_iteration(
      system.rows(),
      [&](const Eigen::VectorXd& v) { return system.apply_transpose(system.apply(v)); },
      options, "norm2_estimate");
  return std::sqrt(lambda);
}

double smallest_singular_estimate(const StepMatrix& A, const NormOptions& options) {
  if (A.rows() <= options.dense_cap) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(A.matrix));
    return svd.singularValues()(svd.singularValues().size() - 1);
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A.matrix);
  if (lu.info() != Eigen::Success)
    throw SolveError("smallest_singular_estimate: factorization failed",
                     std::numeric_limits<double>::infinity());
  const double lambda = power_iteration(
      A.rows(),
      [&](const Eigen::VectorXd& v) {
        // (A^T A)^{-1} v = A^{-1} A^{-T} v
        Eigen::VectorXd y = lu.transpose().solve(v);
        return Eigen::VectorXd(lu.solve(y));
      },
      options, "smallest_singular_estimate");
  return 1.0 / std::sqrt(lambda);
}

double smallest_singular_estimate(const GlobalSystem& system, const NormOptions& options) {
  if (system.rows() <= options.dense_cap) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(system.materialize()));
    return svd.singularValues()(svd.singularValues().size() - 1);
  }
  const double lambda = power_iteration(
      system.rows(),
      [&](const Eigen::VectorXd& v) {
        return system.solve_blockwise(system.solve_transpose_blockwise(v));
      },
      options, "smallest_singular_estimate");
  return 1.0 / std::sqrt(lambda);
}

StepNormBound bound_A(const FPEProblem& problem, const Grid& grid, double t, double dt) {
  const int d = grid.dim();
  const double h = grid.spacing();
  StepNormBound out;

  // Q^n from its definition; boundary rows include their ghost faces, so the
  // coefficient fields must be evaluable half a cell outside the domain.
  MultiIndex j(static_cast<std::size_t>(d), 0);
  for (std::int64_t p = 0; p < grid.num_points(); ++p) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const FaceCoefficients up = sample_face(problem, grid, j, i, +1, t);
      const FaceCoefficients down = sample_face(problem, grid, j, i, -1, t);
      acc += up.D * up.W + down.D * cc_We(down.w);
    }
    out.q_factor = std::max(out.q_factor, acc);
    advance_multi_index(j, grid.intervals());
  }

  out.c_factor = std::max(0.0, (out.q_factor / static_cast<double>(d) - 2.0) / h);
  out.bound = 2.0 * dt / (h * h) * (out.c_factor * h * d + 2.0 * d) + 1.0;
  return out;
}

double bound_A_inv(double gamma, double dt) {
  if (!(gamma * dt < 1.0))
    throw HypothesisError("bound_A_inv requires gamma * dt < 1 (got " +
                          format_double(gamma * dt) + ")");
  return 1.0 / std::sqrt(1.0 - gamma * dt);
}

double bound_L_inv(double gamma, double dt, double horizon) {
  if (!(gamma * dt < 0.5))
    throw HypothesisError("bound_L_inv requires gamma * dt < 1/2 (got " +
                          format_double(gamma * dt) + ")");
  return 1.5 * std::exp(gamma * horizon) / (gamma * dt);
}

double bound_kappa(double gamma, double horizon, double dt, double h, int dim,
                   double c_factor) {
  return 3.0 * std::exp(gamma * horizon) / gamma *
         (1.0 / dt + 2.0 * dim / (h * h) + c_factor * dim / h);
}

ConditionAnalysis condition_and_query_estimate(const GlobalSystem& system,
                                               const FPEProblem& problem, double epsilon,
                                               const NormOptions& options) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("condition_and_query_estimate: epsilon must lie in (0, 1)");
  ConditionAnalysis out;
  out.epsilon = epsilon;

  const double dt = system.dt();
  const double horizon = dt * static_cast<double>(system.n_steps());
  out.hypothesis_ok = problem.gamma * dt < 0.5;

  out.norm_L = norm2_estimate(system, options);
  out.norm_L_inv = 1.0 / smallest_singular_estimate(system, options);
  out.kappa = out.norm_L * out.norm_L_inv;

  double c_factor = 0.0;
  for (std::int64_t n = 0; n < system.n_steps(); ++n) {
    const StepNormBound b = bound_A(problem, system.grid(), system.step(n).time, dt);
    c_factor = std::max(c_factor, b.c_factor);
    if (!problem.time_dependent) break;  // C^n is the same at every step
  }
  out.c_factor = c_factor;
  out.kappa_bound =
      bound_kappa(problem.gamma, horizon, dt, system.grid().spacing(), system.grid().dim(),
                  c_factor);
  if (out.hypothesis_ok) out.bound_norm_L_inv = bound_L_inv(problem.gamma, dt, horizon);

  out.sparsity = system.max_row_nonzeros();
  const double log_term = std::ceil(std::log2(1.0 / epsilon));
  out.query_estimate = static_cast<double>(out.sparsity) * out.kappa * log_term;
  out.query_estimate_bound = static_cast<double>(out.sparsity) * out.kappa_bound * log_term;
  out.within_bounds = !out.hypothesis_ok ||
                      (out.kappa <= out.kappa_bound && out.norm_L_inv <= out.bound_norm_L_inv);
  return out;
}

AnalysisReport analyze(const FPEProblem& problem, const Grid& grid, double dt,
                       std::int64_t n_steps, double epsilon, const NormOptions& options) {
  AnalysisReport report;
  report.gamma = problem.gamma;
  report.dt = dt;
  report.horizon = dt * static_cast<double>(n_steps);

  const bool hyp = problem.gamma * dt < 1.0;
  const std::int64_t distinct = problem.time_dependent ? n_steps : 1;
  for (std::int64_t n = 0; n < distinct; ++n) {
    const double t = static_cast<double>(n) * dt;
    const StepMatrix A = assemble_step_matrix(problem, grid, t, dt);
    StepAnalysis step;
    step.step = n;
    step.time = t;
    const DefectPair defects = sdd_defects(A);
    step.row_defect = defects.row;
    step.col_defect = defects.col;
    step.norm_A = norm2_estimate(A.matrix, options);
    step.bound_norm_A = bound_A(problem, grid, t, dt).bound;
    step.norm_A_inv = 1.0 / smallest_singular_estimate(A, options);
    step.hypothesis_ok = hyp;
    if (hyp) {
      step.bound_norm_A_inv = bound_A_inv(problem.gamma, dt);
      step.within_bounds =
          step.norm_A <= step.bound_norm_A && step.norm_A_inv <= step.bound_norm_A_inv;
    } else {
      step.bound_norm_A_inv = std::numeric_limits<double>::quiet_NaN();
      step.within_bounds = step.norm_A <= step.bound_norm_A;
    }
    if (!step.within_bounds) report.flagged = true;
    report.steps.push_back(step);
  }
  if (!problem.time_dependent && n_steps > 1)
    report.notes.push_back("coefficients are autonomous; step rows beyond 0 are identical");

  const GlobalSystem plain = build_global(problem, grid, dt, n_steps, GlobalForm::plain);
  report.global = condition_and_query_estimate(plain, problem, epsilon, options);
  if (!report.global.within_bounds) report.flagged = true;
  return report;
}

void write_report_text(const AnalysisReport& report, std::ostream& out) {
  out << "gamma = " << format_double(report.gamma) << "\n"
      << "dt = " << format_double(report.dt) << "\n"
      << "horizon = " << format_double(report.horizon) << "\n"
      << "gamma_dt = " << format_double(report.gamma * report.dt) << "\n";
  for (const StepAnalysis& s : report.steps) {
    out << "step " << s.step << ": row_defect = " << format_double(s.row_defect)
        << ", col_defect = " << format_double(s.col_defect)
        << ", norm_A = " << format_double(s.norm_A)
        << " (bound " << format_double(s.bound_norm_A) << ")"
        << ", norm_A_inv = " << format_double(s.norm_A_inv)
        << " (bound " << format_double(s.bound_norm_A_inv) << ")"
        << ", hypothesis_ok = " << (s.hypothesis_ok ? 1 : 0)
        << ", within_bounds = " << (s.within_bounds ? 1 : 0) << "\n";
  }
  const ConditionAnalysis& g = report.global;
  out << "norm_L = " << format_double(g.norm_L) << "\n"
      << "norm_L_inv = " << format_double(g.norm_L_inv) << " (bound "
      << format_double(g.bound_norm_L_inv) << ")\n"
      << "kappa = " << format_double(g.kappa) << " (bound " << format_double(g.kappa_bound)
      << ")\n"
      << "c_factor = " << format_double(g.c_factor) << "\n"
      << "sparsity = " << g.sparsity << "\n"
      << "epsilon = " << format_double(g.epsilon) << "\n"
      << "query_estimate = " << format_double(g.query_estimate) << " (bound "
      << format_double(g.query_estimate_bound) << ")\n"
      << "flagged = " << (report.flagged ? 1 : 0) << "\n";
  for (const std::string& note : report.notes) out << "note: " << note << "\n";
}

void write_report_table(const AnalysisReport& report, std::ostream& out) {
  out << "quantity,empirical,bound,hypothesis_ok\n";
  for (const StepAnalysis& s : report.steps) {
    out << "row_defect_step" << s.step << "," << format_double(s.row_defect) << ","
        << format_double(1.0 - report.gamma * report.dt) << "," << (s.hypothesis_ok ? 1 : 0)
        << "\n";
    out << "col_defect_step" << s.step << "," << format_double(s.col_defect) << ",1,1\n";
    out << "norm_A_step" << s.step << "," << format_double(s.norm_A) << ","
        << format_double(s.bound_norm_A) << "," << (s.hypothesis_ok ? 1 : 0) << "\n";
    out << "norm_A_inv_step" << s.step << "," << format_double(s.norm_A_inv) << ","
        << format_double(s.bound_norm_A_inv) << "," << (s.hypothesis_ok ? 1 : 0) << "\n";
  }
  const ConditionAnalysis& g = report.global;
  out << "norm_L_inv," << format_double(g.norm_L_inv) << ","
      << format_double(g.bound_norm_L_inv) << "," << (g.hypothesis_ok ? 1 : 0) << "\n";
  out << "kappa," << format_double(g.kappa) << "," << format_double(g.kappa_bound) << ","
      << (g.hypothesis_ok ? 1 : 0) << "\n";
  out << "query_estimate," << format_double(g.query_estimate) << ","
      << format_double(g.query_estimate_bound) << "," << (g.hypothesis_ok ? 1 : 0) << "\n";
}

}  // namespace fpcc
