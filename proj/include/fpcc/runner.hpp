#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fpcc {

// Resolved run configuration: CLI flags and config-file keys land here.
// Exactly one of the explicit discretization (N, N_t) or the epsilon plan
// must be active for solve/analyze/emulate runs.
struct RunConfig {
  std::string mode;  // solve | converge | analyze | emulate

  std::string problem = "ou";
  std::map<std::string, double> params;  // problem parameters incl. init_* keys
  int dim = 1;
  double length = 8.0;
  double horizon = 0.5;

  std::int64_t intervals = 0;  // N (explicit discretization)
  std::int64_t n_steps = 0;    // N_t

  double epsilon = 0.0;         // > 0 activates the planned discretization
  double error_constant = 1.0;  // C
  double q = 0.0;               // 0 = estimate heuristically

  double tolerance = 1e-12;
  std::uint64_t seed = 42;
  std::string out_dir;
  bool export_matrix = false;
  std::string trajectory_format = "long";  // long | wide

  std::int64_t samples = 100000;  // emulate: measurement draws
  bool inject_noise = false;      // emulate: add the eps/2 solver perturbation

  std::vector<std::int64_t> spatial_intervals;  // converge: N ladder
  double spatial_dt = 1e-4;
  std::vector<std::int64_t> temporal_steps;     // converge: N_t ladder
  std::int64_t temporal_intervals = 512;

  double analysis_epsilon = 0.1;          // epsilon for query estimates in analyze
  std::int64_t max_unknowns = 20000000;   // guard against runaway plans
};

void validate_config(const RunConfig& config);

// Run modes; artifacts land in config.out_dir (created if missing). Throws
// ConfigError for configuration problems and runtime errors otherwise.
void run_solve(const RunConfig& config);
void run_converge(const RunConfig& config);
void run_analyze(const RunConfig& config);
void run_emulate(const RunConfig& config);

// Dispatch on config.mode.
void run(const RunConfig& config);

}  // namespace fpcc
