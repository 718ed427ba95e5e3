#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include <json.hpp>

#include "csv.hpp"

namespace parvi::cli {
namespace {

namespace fs = std::filesystem;

// Smooth interior perturbation: per coordinate, sum_{m=1..3} a_m sin(m pi s),
// s = k / N, a_m uniform in [-amplitude, amplitude] / 3. Knots and endpoints
// stay put.
template <std::size_t D>
void perturb(Trajectory<D>& traj, const KnotSet& knots, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-amplitude / 3.0, amplitude / 3.0);
  std::array<std::array<double, 3>, D> a{};
  for (auto& comp : a)
    for (auto& v : comp) v = coef(rng);
  const std::size_t n = traj.segments();
  std::vector<char> fixed(n + 1, 0);
  for (const auto& k : knots) fixed[k.index] = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t c = 0; c < D; ++c) {
      if (fixed[k] && c < 2) continue;
      double d = 0.0;
      for (int m = 0; m < 3; ++m) d += a[c][m] * std::sin((m + 1) * std::numbers::pi * s);
      traj.states[k][c] += d;
    }
  }
}

template <std::size_t D>
ProblemSpec matched_spec(const ProblemSpec& p, const Trajectory<D>& traj) {
  ProblemSpec spec = p;
  spec.N = traj.segments();
  spec.horizon = traj.h * static_cast<double>(traj.segments());
  return spec;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

template <std::size_t D>
int run_and_write(const ProblemSpec& problem, const SweepConfig& sweep, Trajectory<D> guess, const std::string& out_dir,
                  std::ostream& out) {
  const ProblemSpec spec = matched_spec(problem, guess);
  SolveResult<D> result = solve<D>(spec, std::move(guess), sweep);
  const double cost = evaluate_cost<D>(spec, result.trajectory);

  ensure_dir(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "trajectory.csv");
    write_trajectory_csv(f, result.trajectory);
  }
  {
    std::ofstream f(fs::path(out_dir) / "residuals.csv");
    write_residual_csv(f, result.report);
  }
  nlohmann::json summary = {
      {"problem", spec.name},
      {"lagrangian", lagrangian_name(spec.lagrangian)},
      {"kind", kind_name(kind_of<D>)},
      {"N", spec.N},
      {"h", spec.h()},
      {"converged", result.report.converged},
      {"iterations", result.report.iterations},
      {"max_residual", result.report.final_residual()},
      {"tolerance", result.report.tolerance},
      {"cost", cost},
      {"cost_name", spec.lagrangian == LagrangianKind::Zermelo ? "travel_time" : "fuel"},
      {"wall_seconds", result.report.wall_time},
  };
  {
    std::ofstream f(fs::path(out_dir) / "summary.json");
    f << summary.dump(2) << '\n';
  }
  out << "problem     " << spec.name << " (" << lagrangian_name(spec.lagrangian) << ", N=" << spec.N
      << ", h=" << format_real(spec.h()) << ")\n"
      << "converged   " << (result.report.converged ? "yes" : "no") << '\n'
      << "iterations  " << result.report.iterations << '\n'
      << "residual    " << format_real(result.report.final_residual()) << " (tolerance "
      << format_real(result.report.tolerance) << ")\n"
      << "cost        " << format_real(cost) << '\n'
      << "wall time   " << result.report.wall_time << " s\n";
  return result.report.converged ? kExitConverged : kExitIterationCap;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const CsvError& e) {
    err << "error: malformed trajectory CSV, " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

template <std::size_t D>
Trajectory<D> expect_kind(AnyTrajectory any, const ProblemSpec& p) {
  if (auto* t = std::get_if<Trajectory<D>>(&any)) return std::move(*t);
  throw ConfigError(std::string("trajectory kind does not match problem '") + p.name + "' (expected " +
                    kind_name(kind_of<D>) + ")");
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ResolvedRun run = resolve(cfg);
    if (run.problem.kind() == Kind::Q) {
      auto guess = initial_guess<2>(run.problem);
      if (cfg.seed) perturb(guess, {}, *cfg.seed, cfg.perturbation);
      return run_and_write<2>(run.problem, run.sweep, std::move(guess), cfg.out_dir, out);
    }
    auto guess = initial_guess<4>(run.problem);
    if (cfg.seed) perturb(guess, run.problem.knot_set(), *cfg.seed, cfg.perturbation);
    return run_and_write<4>(run.problem, run.sweep, std::move(guess), cfg.out_dir, out);
  });
}

int cmd_refine(const std::string& input_csv, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ResolvedRun run = resolve(cfg);
    AnyTrajectory any = read_trajectory_file(input_csv);
    if (run.problem.kind() == Kind::Q) {
      auto traj = refine(expect_kind<2>(std::move(any), run.problem));
      return run_and_write<2>(run.problem, run.sweep, std::move(traj), cfg.out_dir, out);
    }
    auto traj = refine(expect_kind<4>(std::move(any), run.problem));
    return run_and_write<4>(run.problem, run.sweep, std::move(traj), cfg.out_dir, out);
  });
}

namespace {

template <std::size_t D>
int eval_impl(const ProblemSpec& problem, const SweepConfig& sweep, const Trajectory<D>& traj, bool per_index,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  validate(traj);
  const ProblemSpec spec = matched_spec(problem, traj);
  for (const auto& issue : check_boundary<D>(spec, traj)) err << "warning: " << issue << '\n';
  const double cost = evaluate_cost<D>(spec, traj);
  const KnotSet knots = D == 4 ? spec.knot_set() : KnotSet{};
  const auto norms = residual_norms<D>(*make_discrete<D>(spec), traj, knots);
  double max_res = 0.0;
  for (double r : norms) max_res = std::max(max_res, r);
  const double tol = sweep.tol_factor * traj.h * traj.h;
  out << "cost        " << format_real(cost) << '\n'
      << "residual    " << format_real(max_res) << " (tolerance " << format_real(tol) << ")\n"
      << "satisfied   " << (max_res < tol ? "yes" : "no") << '\n';
  if (per_index) {
    ensure_dir(out_dir);
    std::ofstream f(fs::path(out_dir) / "residual_by_index.csv");
    f << "index,residual\n";
    for (std::size_t k = 0; k < norms.size(); ++k) f << k << ',' << format_real(norms[k]) << '\n';
  }
  return kExitConverged;
}

}  // namespace

int cmd_eval(const std::string& input_csv, const RunConfig& cfg, bool per_index, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    const ResolvedRun run = resolve(cfg);
    AnyTrajectory any = read_trajectory_file(input_csv);
    if (run.problem.kind() == Kind::Q)
      return eval_impl<2>(run.problem, run.sweep, expect_kind<2>(std::move(any), run.problem), per_index,
                          cfg.out_dir, out, err);
    return eval_impl<4>(run.problem, run.sweep, expect_kind<4>(std::move(any), run.problem), per_index, cfg.out_dir,
                        out, err);
  });
}

}  // namespace parvi::cli
