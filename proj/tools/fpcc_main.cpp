#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "fpcc/errors.hpp"
#include "fpcc/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<std::int64_t> parse_ladder(const std::string& csv) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) out.push_back(std::stoll(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpcc: Chang-Cooper Fokker-Planck solver, global-system analysis, and "
               "quantum-linear-systems pipeline emulation"};
  app.set_config("--config", "", "key = value configuration file with [sections]");

  fpcc::RunConfig config;
  std::string spatial_ladder, temporal_ladder;
  std::map<std::string, double> problem_params;

  app.add_option("--mode", config.mode, "run mode: solve | converge | analyze | emulate")
      ->required();
  app.add_option("--seed", config.seed, "random seed for sampling");
  app.add_option("--out", config.out_dir, "output directory (default env FPCC_OUT_DIR)");
  app.add_flag("--export-matrix", config.export_matrix, "write coordinate-format matrices");

  app.add_option("--problem.name", config.problem, "diffusion | ou | double-well");
  app.add_option("--problem.param", problem_params,
                 "problem parameter (repeatable), e.g. --problem.param theta 1.5");
  app.add_option("--grid.d", config.dim, "state dimension");
  app.add_option("--grid.L", config.length, "axis length of the domain [0, L]^d");
  app.add_option("--grid.N", config.intervals, "intervals per axis");
  app.add_option("--time.T", config.horizon, "time horizon");
  app.add_option("--time.Nt", config.n_steps, "number of time steps");

  app.add_option("--plan.eps", config.epsilon, "target error; activates the planned mesh");
  app.add_option("--plan.C", config.error_constant, "discretization error constant C");
  app.add_option("--plan.q", config.q, "lower bound on ||rho(T)||_2 (0 = estimate)");

  app.add_option("--solver.tolerance", config.tolerance, "relative residual target");
  app.add_option("--output.trajectory-format", config.trajectory_format, "long | wide");

  app.add_option("--emulate.samples", config.samples, "measurement samples to draw");
  app.add_flag("--emulate.noise", config.inject_noise, "inject the eps/2 solver perturbation");

  app.add_option("--converge.spatial-N", spatial_ladder, "comma list of N for the h ladder");
  app.add_option("--converge.spatial-dt", config.spatial_dt, "fixed dt for the h ladder");
  app.add_option("--converge.temporal-Nt", temporal_ladder,
                 "comma list of N_t for the dt ladder");
  app.add_option("--converge.temporal-N", config.temporal_intervals,
                 "fixed N for the dt ladder");
  app.add_option("--analyze.eps", config.analysis_epsilon, "epsilon for query estimates");
  app.add_option("--plan.max-unknowns", config.max_unknowns,
                 "refuse plans larger than this many unknowns");

  try {
    app.parse(argc, argv);
    config.params = problem_params;
    config.spatial_intervals = parse_ladder(spatial_ladder);
    config.temporal_steps = parse_ladder(temporal_ladder);
    if (config.out_dir.empty()) {
      if (const char* env = std::getenv("FPCC_OUT_DIR")) config.out_dir = env;
    }
    if (config.out_dir.empty()) config.out_dir = "fpcc-out";
    fpcc::run(config);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const fpcc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
