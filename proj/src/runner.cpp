#include "fpcc/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpcc/analysis.hpp"
#include "fpcc/catalog.hpp"
#include "fpcc/errors.hpp"
#include "fpcc/qlscca.hpp"
#include "fpcc/stepper.hpp"
#include "fpcc/util.hpp"

namespace fpcc {

namespace {

namespace fs = std::filesystem;

void write_config_header(std::ostream& out, const RunConfig& config) {
  out << "# mode = " << config.mode << "\n"
      << "# problem = " << config.problem << "\n";
  for (const auto& [key, value] : config.params)
    out << "# problem." << key << " = " << format_double(value) << "\n";
  out << "# dim = " << config.dim << "\n"
      << "# length = " << format_double(config.length) << "\n"
      << "# horizon = " << format_double(config.horizon) << "\n"
      << "# intervals = " << config.intervals << "\n"
      << "# n_steps = " << config.n_steps << "\n"
      << "# epsilon = " << format_double(config.epsilon) << "\n"
      << "# error_constant = " << format_double(config.error_constant) << "\n"
      << "# q = " << format_double(config.q) << "\n"
      << "# tolerance = " << format_double(config.tolerance) << "\n"
      << "# seed = " << config.seed << "\n"
      << "# trajectory_format = " << config.trajectory_format << "\n"
      << "# samples = " << config.samples << "\n"
      << "# inject_noise = " << (config.inject_noise ? 1 : 0) << "\n";
}

std::ofstream open_artifact(const RunConfig& config, const std::string& name) {
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot open output file " + (dir / name).string());
  write_config_header(out, config);
  return out;
}

FPEProblem make_problem(const RunConfig& config) {
  return catalog::make(config.problem, config.dim, config.length, config.horizon,
                       config.params);
}

struct Discretization {
  Grid grid;
  std::int64_t n_steps;
  double dt;
  bool planned;
  DiscretizationPlan plan;  // valid when planned
};

Discretization resolve_discretization(const RunConfig& config, const FPEProblem& problem) {
  if (config.epsilon > 0.0) {
    double q = config.q;
    if (q <= 0.0) {
      // One fixed-point pass of the coarse-grid heuristic: estimate against
      // the coarse spacing, plan, then re-estimate at the planned spacing.
      const Grid coarse(config.dim, 16, config.length);
      const double q0 = estimate_q(problem, 16, 16, coarse.spacing());
      const DiscretizationPlan first = choose_discretization(
          config.epsilon, problem.gamma, config.error_constant, q0, config.dim,
          config.length, config.horizon);
      q = estimate_q(problem, 16, 16, first.h);
    }
    const DiscretizationPlan plan =
        choose_discretization(config.epsilon, problem.gamma, config.error_constant, q,
                              config.dim, config.length, config.horizon);
    double unknowns = static_cast<double>(plan.n_steps);
    for (int i = 0; i < config.dim; ++i) unknowns *= static_cast<double>(plan.intervals + 1);
    if (unknowns > static_cast<double>(config.max_unknowns))
      throw ConfigError("planned discretization needs " + format_double(unknowns) +
                        " unknowns, above max_unknowns = " +
                        std::to_string(config.max_unknowns));
    return {Grid(config.dim, plan.intervals, config.length), plan.n_steps, plan.dt, true,
            plan};
  }
  const Grid grid(config.dim, config.intervals, config.length);
  const double dt = config.horizon / static_cast<double>(config.n_steps);
  return {grid, config.n_steps, dt, false, {}};
}

void export_step_matrix(const RunConfig& config, const FPEProblem& problem, const Grid& grid,
                        double dt) {
  const StepMatrix A = assemble_step_matrix(problem, grid, 0.0, dt);
  std::ofstream out = open_artifact(config, "step_matrix_0.txt");
  write_coordinate_format(A.matrix, out);
}

Eigen::VectorXd reference_or_throw(const FPEProblem& problem, const Grid& grid, double t) {
  if (!problem.has_reference())
    throw ConfigError("problem '" + problem.name +
                      "' has no analytic reference for this configuration");
  return problem.reference(grid, t);
}

}  // namespace

void validate_config(const RunConfig& config) {
  if (config.mode != "solve" && config.mode != "converge" && config.mode != "analyze" &&
      config.mode != "emulate")
    throw ConfigError("mode must be one of solve, converge, analyze, emulate (got '" +
                      config.mode + "')");
  if (config.dim < 1) throw ConfigError("dim must be >= 1");
  if (!(config.length > 0.0)) throw ConfigError("length must be positive");
  if (!(config.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (config.out_dir.empty()) throw ConfigError("no output directory configured");

  const bool has_explicit = config.intervals > 0 || config.n_steps > 0;
  const bool has_plan = config.epsilon > 0.0;
  if (config.mode != "converge") {
    if (has_explicit && has_plan)
      throw ConfigError("give either an explicit discretization (intervals, n_steps) or an "
                        "epsilon plan, not both");
    if (!has_plan && (config.intervals < 1 || config.n_steps < 1))
      throw ConfigError("explicit discretization needs intervals >= 1 and n_steps >= 1");
    if (has_plan && config.epsilon > 1.0) throw ConfigError("epsilon must lie in (0, 1]");
  } else {
    if (config.spatial_intervals.empty() && config.temporal_steps.empty())
      throw ConfigError("converge mode needs a spatial or temporal ladder");
  }
  if (config.mode == "emulate" && !has_plan)
    throw ConfigError("emulate mode requires an epsilon plan");
}

void run_solve(const RunConfig& config) {
  const FPEProblem problem = make_problem(config);
  const Discretization disc = resolve_discretization(config, problem);

  SolveOptions options;
  options.tolerance = config.tolerance;
  const Trajectory traj = evolve(problem, disc.grid, disc.dt, disc.n_steps, options);

  {
    std::ofstream out = open_artifact(config, "trajectory.csv");
    if (config.trajectory_format == "wide") {
      out << "step";
      for (std::int64_t p = 0; p < disc.grid.num_points(); ++p) out << ",v" << p;
      out << "\n";
      for (std::size_t n = 0; n < traj.states.size(); ++n) {
        out << n;
        for (std::int64_t p = 0; p < traj.states[n].size(); ++p)
          out << ',' << format_double(traj.states[n][p]);
        out << "\n";
      }
    } else {
      out << "step,linear_index,value\n";
      for (std::size_t n = 0; n < traj.states.size(); ++n)
        for (std::int64_t p = 0; p < traj.states[n].size(); ++p)
          out << n << ',' << p << ',' << format_double(traj.states[n][p]) << "\n";
    }
  }
  {
    std::ofstream out = open_artifact(config, "diagnostics.csv");
    out << "step,time,mass,min_entry,residual\n";
    for (const StepDiagnostics& diag : traj.diagnostics)
      out << diag.step << ',' << format_double(diag.time) << ',' << format_double(diag.mass)
          << ',' << format_double(diag.min_entry) << ',' << format_double(diag.residual)
          << "\n";
  }
  {
    std::ofstream out = open_artifact(config, "summary.txt");
    const double mass0 = traj.diagnostics.front().mass;
    double drift = 0.0, min_entry = 0.0;
    for (const StepDiagnostics& diag : traj.diagnostics) {
      drift = std::max(drift, std::abs(diag.mass - mass0));
      min_entry = std::min(min_entry, diag.min_entry);
    }
    out << "intervals = " << disc.grid.intervals() << "\n"
        << "n_steps = " << disc.n_steps << "\n"
        << "dt = " << format_double(disc.dt) << "\n"
        << "max_mass_drift = " << format_double(drift) << "\n"
        << "min_entry = " << format_double(min_entry) << "\n";
    if (problem.has_reference()) {
      const Eigen::VectorXd ref = problem.reference(disc.grid, config.horizon);
      out << "terminal_l2_error = "
          << format_double((traj.terminal() - ref).norm() / ref.norm()) << "\n";
    }
    for (const std::string& w : traj.warnings) out << "warning: " << w << "\n";
  }
  if (config.export_matrix) export_step_matrix(config, problem, disc.grid, disc.dt);
}

void run_converge(const RunConfig& config) {
  const FPEProblem probe = make_problem(config);
  if (!probe.has_reference())
    throw ConfigError("converge mode needs a problem with an analytic reference");

  std::ofstream out = open_artifact(config, "convergence.csv");
  out << "kind,intervals,n_steps,h,dt,l2_error,observed_order\n";

  SolveOptions options;
  options.tolerance = config.tolerance;

  auto run_ladder = [&](const std::string& kind, const std::vector<std::int64_t>& intervals,
                        const std::vector<std::int64_t>& steps) {
    std::vector<double> log_param, log_error;
    double prev_error = 0.0, prev_param = 0.0;
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      const Grid grid(config.dim, intervals[k], config.length);
      const double dt = config.horizon / static_cast<double>(steps[k]);
      const Trajectory traj = evolve(probe, grid, dt, steps[k], options);
      const Eigen::VectorXd ref = reference_or_throw(probe, grid, config.horizon);
      const double err = (traj.terminal() - ref).norm() / ref.norm();
      const double param = kind == "spatial" ? grid.spacing() : dt;
      out << kind << ',' << intervals[k] << ',' << steps[k] << ','
          << format_double(grid.spacing()) << ',' << format_double(dt) << ','
          << format_double(err) << ',';
      if (k > 0) out << format_double(std::log(prev_error / err) / std::log(prev_param / param));
      out << "\n";
      log_param.push_back(std::log(param));
      log_error.push_back(std::log(err));
      prev_error = err;
      prev_param = param;
    }
    return log_param.size() >= 2 ? fit_slope(log_param, log_error)
                                 : std::numeric_limits<double>::quiet_NaN();
  };

  std::ofstream summary = open_artifact(config, "summary.txt");
  if (!config.spatial_intervals.empty()) {
    std::vector<std::int64_t> steps(config.spatial_intervals.size(),
                                    static_cast<std::int64_t>(
                                        std::llround(config.horizon / config.spatial_dt)));
    const double slope =
        run_ladder("spatial", config.spatial_intervals, steps);
    summary << "spatial_order = " << format_double(slope) << "\n";
  }
  if (!config.temporal_steps.empty()) {
    std::vector<std::int64_t> intervals(config.temporal_steps.size(),
                                        config.temporal_intervals);
    const double slope = run_ladder("temporal", intervals, config.temporal_steps);
    summary << "temporal_order = " << format_double(slope) << "\n";
  }
}

void run_analyze(const RunConfig& config) {
  const FPEProblem problem = make_problem(config);
  const Discretization disc = resolve_discretization(config, problem);

  const AnalysisReport report =
      analyze(problem, disc.grid, disc.dt, disc.n_steps, config.analysis_epsilon);
  {
    std::ofstream out = open_artifact(config, "analysis_report.txt");
    write_report_text(report, out);
  }
  {
    std::ofstream out = open_artifact(config, "analysis_table.csv");
    write_report_table(report, out);
  }
  if (config.export_matrix) {
    const GlobalSystem plain =
        build_global(problem, disc.grid, disc.dt, disc.n_steps, GlobalForm::plain);
    std::ofstream out = open_artifact(config, "global_plain.txt");
    write_coordinate_format(plain.materialize(), out);
  }
}

void run_emulate(const RunConfig& config) {
  const FPEProblem problem = make_problem(config);
  const Discretization disc = resolve_discretization(config, problem);

  EmulateOptions options;
  options.tolerance = config.tolerance;
  options.inject_noise = config.inject_noise;
  options.samples = config.samples;
  options.seed = config.seed;
  const EmulationResult result = emulate(problem, disc.grid, disc.plan, options);

  {
    std::ofstream out = open_artifact(config, "plan.txt");
    const DiscretizationPlan& plan = disc.plan;
    out << "branch = " << plan.branch << "\n"
        << "fallback = " << (plan.fallback ? 1 : 0) << "\n"
        << "q = " << format_double(plan.q) << "\n"
        << "dt_raw = " << format_double(plan.dt_raw) << "\n"
        << "h_raw = " << format_double(plan.h_raw) << "\n"
        << "intervals = " << plan.intervals << "\n"
        << "n_steps = " << plan.n_steps << "\n"
        << "h = " << format_double(plan.h) << "\n"
        << "dt = " << format_double(plan.dt) << "\n"
        << "budget_used = " << format_double(plan.budget_used()) << "\n"
        << "budget_cap = " << format_double(plan.epsilon / 4.0) << "\n";
  }
  {
    std::ofstream out = open_artifact(config, "emulation.txt");
    out << "success_probability = " << format_double(result.success_probability) << "\n"
        << "solve_residual = " << format_double(result.solve_residual) << "\n"
        << "samples = " << result.samples << "\n"
        << "seed = " << result.seed << "\n"
        << "generator = " << result.generator << "\n"
        << "injected_noise = " << format_double(result.injected_noise) << "\n";
    if (problem.has_reference()) {
      const Eigen::VectorXd ref = problem.reference(disc.grid, config.horizon);
      out << "fidelity_error = " << format_double(fidelity_check(result, ref)) << "\n"
          << "epsilon = " << format_double(config.epsilon) << "\n";
    }
  }
  {
    std::ofstream out = open_artifact(config, "histogram.csv");
    out << "block,probability,count\n";
    for (std::size_t nb = 0; nb < result.block_probabilities.size(); ++nb)
      out << nb << ',' << format_double(result.block_probabilities[nb]) << ','
          << (nb < result.block_counts.size() ? result.block_counts[nb] : 0) << "\n";
  }
  {
    std::ofstream out = open_artifact(config, "outcomes.csv");
    out << "flat_index,block,grid_index,count\n";
    for (const auto& [flat, count] : result.outcome_counts)
      out << flat << ',' << flat / result.block_size << ',' << flat % result.block_size << ','
          << count << "\n";
  }
  {
    std::ofstream out = open_artifact(config, "terminal_state.csv");
    out << "grid_index,value\n";
    for (std::int64_t p = 0; p < result.terminal_state.size(); ++p)
      out << p << ',' << format_double(result.terminal_state[p]) << "\n";
  }
}

void run(const RunConfig& config) {
  validate_config(config);
  if (config.mode == "solve") return run_solve(config);
  if (config.mode == "converge") return run_converge(config);
  if (config.mode == "analyze") return run_analyze(config);
  run_emulate(config);
}

}  // namespace fpcc
