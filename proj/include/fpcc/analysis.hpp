#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpcc/assembly.hpp"
#include "fpcc/global_system.hpp"
#include "fpcc/model.hpp"

namespace fpcc {

struct DefectPair {
  double row = 0.0;  // min_p |A_pp| - sum_{q != p} |A_pq|
  double col = 0.0;  // min_p |A_pp| - sum_{q != p} |A_qp|
};

// Minimum row/column diagonal-dominance defects of a step matrix.
DefectPair sdd_defects(const StepMatrix& A);
DefectPair sdd_defects(const Eigen::SparseMatrix<double>& A);

struct NormOptions {
  double tolerance = 1e-6;      // relative change stopping rule
  int max_iterations = 20000;
  std::int64_t dense_cap = 400;  // up to this size use a dense SVD instead
  std::uint64_t seed = 20240901;
};

// Spectral norm, dense SVD below dense_cap, power iteration on A^T A above.
double norm2_estimate(const Eigen::SparseMatrix<double>& A, const NormOptions& options = {});
double norm2_estimate(const GlobalSystem& system, const NormOptions& options = {});

// Smallest singular value via power iteration on (A^T A)^{-1} using the
// available factorizations; ||A^{-1}||_2 is its reciprocal.
double smallest_singular_estimate(const StepMatrix& A, const NormOptions& options = {});
double smallest_singular_estimate(const GlobalSystem& system, const NormOptions& options = {});

// Induced 1- and infinity-norms (exact column / row absolute sums).
double norm1(const Eigen::SparseMatrix<double>& A);
double norm_inf(const Eigen::SparseMatrix<double>& A);

// The step-norm bound 2 (dt/h^2)(C^n h d + 2 d) + 1. Q^n is the largest
// unmodified diagonal face sum max_j sum_i (D_+ W_+ + D_- W_- e^{w_-}),
// evaluated over all points including the ghost faces of boundary rows, and
// C^n = max(0, (Q^n / d - 2) / h) back-solves the tightest constant consistent
// with Q^n <= d (C^n h + 2).
struct StepNormBound {
  double q_factor = 0.0;  // Q^n
  double c_factor = 0.0;  // C^n
  double bound = 0.0;     // 2 (dt/h^2) (C^n h d + 2 d) + 1 = 2 (dt/h^2) max(Q^n, 2d) + 1
};

StepNormBound bound_A(const FPEProblem& problem, const Grid& grid, double t, double dt);

// ||(A^n)^{-1}||_2 <= 1 / sqrt(1 - gamma dt); requires gamma dt < 1.
double bound_A_inv(double gamma, double dt);

// ||L^{-1}||_2 <= (3/2) e^{gamma T} / (gamma dt); requires gamma dt < 1/2.
double bound_L_inv(double gamma, double dt, double horizon);

// Condition-number bound 3 (e^{gamma T} / gamma)(1/dt + 2d/h^2 + C d / h).
double bound_kappa(double gamma, double horizon, double dt, double h, int dim, double c_factor);

struct StepAnalysis {
  std::int64_t step = 0;
  double time = 0.0;
  double row_defect = 0.0;
  double col_defect = 0.0;
  double norm_A = 0.0;
  double bound_norm_A = 0.0;
  double norm_A_inv = 0.0;
  double bound_norm_A_inv = 0.0;
  bool hypothesis_ok = true;  // gamma dt < 1
  bool within_bounds = true;
};

struct ConditionAnalysis {
  double norm_L = 0.0;
  double norm_L_inv = 0.0;
  double bound_norm_L_inv = 0.0;
  double kappa = 0.0;
  double kappa_bound = 0.0;
  double c_factor = 0.0;        // max_n C^n
  std::int64_t sparsity = 0;    // measured max nonzeros per row
  double epsilon = 0.0;
  double query_estimate = 0.0;        // s * kappa * ceil(log2(1/eps))
  double query_estimate_bound = 0.0;  // same with the kappa bound
  bool hypothesis_ok = true;          // gamma dt < 1/2
  bool within_bounds = true;
};

ConditionAnalysis condition_and_query_estimate(const GlobalSystem& system,
                                               const FPEProblem& problem, double epsilon,
                                               const NormOptions& options = {});

// Side-by-side empirical vs bound report over every step of a run plus the
// global system quantities. Any empirical value above its bound (with valid
// hypotheses) sets `flagged` instead of silently passing.
struct AnalysisReport {
  std::vector<StepAnalysis> steps;
  ConditionAnalysis global;
  double gamma = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  bool flagged = false;
  std::vector<std::string> notes;
};

AnalysisReport analyze(const FPEProblem& problem, const Grid& grid, double dt,
                       std::int64_t n_steps, double epsilon, const NormOptions& options = {});

void write_report_text(const AnalysisReport& report, std::ostream& out);
void write_report_table(const AnalysisReport& report, std::ostream& out);

}  // namespace fpcc
