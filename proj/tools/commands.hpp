#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace parvi::cli {

// Exit codes.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitIterationCap = 2;

// Solves from the problem's initial guess; writes trajectory.csv,
// residuals.csv and summary.json into cfg.out_dir.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Refines an existing trajectory (2N segments, h/2), re-solves, and writes
// outputs as cmd_solve.
int cmd_refine(const std::string& input_csv, const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Reports cost and max residual of an existing trajectory; with
// `per_index` also writes index,residual rows to out_dir/residual_by_index.csv.
int cmd_eval(const std::string& input_csv, const RunConfig& cfg, bool per_index, std::ostream& out,
             std::ostream& err);

}  // namespace parvi::cli
