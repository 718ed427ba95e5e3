#pragma once

// Trajectory and residual-history CSV files.
//
// Trajectory format:
//   # kind=Q N=<segments> h=<step> t0=<start time>
//   t,x,y              (kind=TQ: t,x,y,vx,vy)
//   <one row per sample>
// Reals are written in shortest round-trip form.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>

#include "parvi/errors.hpp"
#include "parvi/solver.hpp"
#include "parvi/trajectory.hpp"

namespace parvi::cli {

class CsvError : public Error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using AnyTrajectory = std::variant<TrajectoryQ, TrajectoryTQ>;

std::string format_real(double v);

void write_trajectory_csv(std::ostream& os, const TrajectoryQ& traj);
void write_trajectory_csv(std::ostream& os, const TrajectoryTQ& traj);
AnyTrajectory read_trajectory_csv(std::istream& is);
AnyTrajectory read_trajectory_file(const std::string& path);

void write_residual_csv(std::ostream& os, const ResidualReport& report);

}  // namespace parvi::cli
