#pragma once

// Run configuration: problem selection (built-in name or YAML file) plus
// command-line overrides.

#include <cstdint>
#include <optional>
#include <string>

#include "parvi/problems.hpp"
#include "parvi/solver.hpp"

namespace parvi::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string problem;      // built-in problem name
  std::string config_path;  // YAML problem file; exclusive with `problem`
  std::optional<std::size_t> N;
  std::optional<double> T;
  std::optional<double> tol_factor;
  std::optional<UpdateRule> rule;
  std::optional<double> damping;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;  // perturbs the initial guess when set
  double perturbation = 1e-2;         // amplitude used with `seed`
  std::string out_dir = ".";
};

struct ResolvedRun {
  ProblemSpec problem;
  SweepConfig sweep;
};

UpdateRule parse_rule(const std::string& s);

// Loads a YAML problem document. Solver settings found in the file are
// applied to `sweep`.
ProblemSpec load_problem_file(const std::string& path, SweepConfig& sweep);
ProblemSpec load_problem_yaml(const std::string& text, SweepConfig& sweep);

// Applies overrides and validates. Throws ConfigError / parvi::Error.
ResolvedRun resolve(const RunConfig& cfg);

}  // namespace parvi::cli
