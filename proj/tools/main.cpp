// parvi: parallel variational relaxation solver for navigation problems.
//
//   parvi solve  --problem fig3 --out runs/fig3
//   parvi refine --problem fig4 --input runs/fig4/trajectory.csv --out runs/fig4-fine
//   parvi eval   --problem fig3 --input runs/fig3/trajectory.csv

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

namespace {

void add_run_options(CLI::App& cmd, parvi::cli::RunConfig& cfg, std::string& rule) {
  cmd.add_option("--problem", cfg.problem, "Built-in problem: fig2, fig3, fig4, fig4-coarse, free-particle");
  cmd.add_option("--config", cfg.config_path, "YAML problem file");
  cmd.add_option("--N", cfg.N, "Number of segments");
  cmd.add_option("--T", cfg.T, "Horizon T");
  cmd.add_option("--rule", rule, "Update rule: exact | newton")->check(CLI::IsMember({"exact", "newton"}));
  cmd.add_option("--damping", cfg.damping, "Damping delta in [0, 1)");
  cmd.add_option("--tol-factor", cfg.tol_factor, "Stop when max residual < tol-factor * h^2");
  cmd.add_option("--max-iter", cfg.max_iterations, "Iteration cap");
  cmd.add_option("--threads", cfg.threads, "Parallel width");
  cmd.add_option("--out", cfg.out_dir, "Output directory");
  cmd.add_option("--seed", cfg.seed, "Perturb the initial guess with this seed");
  cmd.add_option("--perturb", cfg.perturbation, "Perturbation amplitude used with --seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel relaxation solver for discrete variational boundary-value problems"};
  app.require_subcommand(1);

  parvi::cli::RunConfig cfg;
  std::string rule;
  std::string input;
  bool per_index = false;

  auto* solve = app.add_subcommand("solve", "Solve a problem from its initial guess");
  add_run_options(*solve, cfg, rule);

  auto* refine = app.add_subcommand("refine", "Refine a trajectory (2N, h/2) and re-solve");
  add_run_options(*refine, cfg, rule);
  refine->add_option("--input", input, "Trajectory CSV")->required();

  auto* eval = app.add_subcommand("eval", "Report cost and residual of a trajectory");
  add_run_options(*eval, cfg, rule);
  eval->add_option("--input", input, "Trajectory CSV")->required();
  eval->add_flag("--per-index", per_index, "Write residual_by_index.csv to --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : parvi::cli::kExitError;
  }
  if (!rule.empty()) cfg.rule = parvi::cli::parse_rule(rule);

  if (*solve) return parvi::cli::cmd_solve(cfg, std::cout, std::cerr);
  if (*refine) return parvi::cli::cmd_refine(input, cfg, std::cout, std::cerr);
  return parvi::cli::cmd_eval(input, cfg, per_index, std::cout, std::cerr);
}
