#pragma once

// Nonlinear Jacobi relaxation for discrete Euler-Lagrange boundary-value
// problems.
//
// One sweep moves every interior sample so that the local DEL equation
// holds (approximately) for its two neighbours taken from the previous
// iterate. Endpoints never move; at knots only the velocity moves. Each
// update reads the input trajectory only, so the interior updates are
// independent and run on a WorkerPool.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "parvi/errors.hpp"
#include "parvi/lagrangians.hpp"
#include "parvi/linalg.hpp"
#include "parvi/parallel.hpp"
#include "parvi/trajectory.hpp"

namespace parvi {

enum class UpdateRule {
  ExactParallel,  // solve the parallelized DEL equation at each index
  JacobiNewton,   // one Newton step of it
};

struct InnerNewton {
  double tol = 1e-12;
  std::size_t max_iter = 50;
  std::size_t max_halvings = 30;
};

struct SweepConfig {
  UpdateRule rule = UpdateRule::JacobiNewton;
  double damping = 0.0;  // delta: updates are scaled by (1 - delta)
  double tol_factor = 1e-4;
  std::size_t max_iterations = 500000;
  InnerNewton inner;
  std::size_t parallel_width = 1;

  void validate() const {
    if (!(damping >= 0.0 && damping < 1.0)) throw InvalidArgument("damping must lie in [0, 1)");
    if (!(tol_factor > 0.0)) throw InvalidArgument("tol_factor must be positive");
    if (parallel_width < 1) throw InvalidArgument("parallel_width must be at least 1");
    if (inner.max_iter < 1) throw InvalidArgument("inner Newton needs at least one iteration");
  }
};

struct ResidualReport {
  std::vector<double> max_residual;  // one entry per residual evaluation
  std::vector<double> wall_seconds;  // cumulative, aligned with max_residual
  std::size_t iterations = 0;        // sweeps applied
  bool converged = false;
  double wall_time = 0.0;
  double tolerance = 0.0;

  double final_residual() const { return max_residual.empty() ? INFINITY : max_residual.back(); }
};

template <std::size_t D>
struct SolveResult {
  Trajectory<D> trajectory;
  ResidualReport report;
};

// ---------------------------------------------------------------------------
// Local equations.

inline Vec2 del_residual(const DiscreteLagrangianQ& Ld, const Vec2& q_prev, const Vec2& q, const Vec2& q_next) {
  return Ld.derivatives(q_prev, q).right() + Ld.derivatives(q, q_next).left();
}

// (D3 L_d|k-1 + D1 L_d|k, D4 L_d|k-1 + D2 L_d|k)
inline std::pair<Vec2, Vec2> deloc_residual(const DiscreteLagrangianTQ& Ld, const Vector<4>& s_prev,
                                            const Vector<4>& s, const Vector<4>& s_next) {
  const Vector<4> r = Ld.derivatives(s_prev, s).right() + Ld.derivatives(s, s_next).left();
  return {segment<0, 2>(r), segment<2, 2>(r)};
}

namespace detail {

// Residual and Jacobian of the local equation at a middle state, optionally
// restricted to the velocity block (knots).
template <std::size_t D>
struct LocalSystem {
  Vector<D> residual;
  Matrix<D, D> jacobian;
  double scale = 0.0;  // magnitude of the two gradient contributions
};

template <std::size_t D>
LocalSystem<D> local_system(const SegmentDerivatives<D>& left_seg, const SegmentDerivatives<D>& right_seg) {
  LocalSystem<D> sys;
  const Vector<D> a = left_seg.right();
  const Vector<D> b = right_seg.left();
  sys.residual = a + b;
  sys.jacobian = left_seg.right_right() + right_seg.left_left();
  sys.scale = norm(a) + norm(b);
  return sys;
}

inline double knot_norm(const Vector<4>& r) { return std::hypot(r[2], r[3]); }

// Newton increment; `velocity_only` solves the 2x2 velocity block and leaves
// the position part zero.
template <std::size_t D>
Vector<D> newton_increment(const LocalSystem<D>& sys, bool velocity_only, std::size_t index) {
  try {
    if constexpr (D == 4) {
      if (velocity_only) {
        const Vec2 dv = solve(block<2, 2, 2, 2>(sys.jacobian), -segment<2, 2>(sys.residual));
        return Vector<4>{{0.0, 0.0, dv[0], dv[1]}};
      }
    }
    return solve(sys.jacobian, -sys.residual);
  } catch (const SingularMatrix& e) {
    throw SingularJacobian(std::string("singular local Jacobian (") + e.what() + ")", index);
  }
}

template <std::size_t D>
double local_norm(const Vector<D>& r, bool velocity_only) {
  if constexpr (D == 4)
    if (velocity_only) return knot_norm(r);
  return norm(r);
}

}  // namespace detail

// One Newton step on the parallelized DEL equation at q:
//   q_bar = q - (D22 L_d(q_prev, q) + D11 L_d(q, q_next))^-1 (D2 L_d(q_prev, q) + D1 L_d(q, q_next))
inline Vec2 pdel_step_newton(const DiscreteLagrangianQ& Ld, const Vec2& q_prev, const Vec2& q, const Vec2& q_next,
                             std::size_t index = 0) {
  const auto sys = detail::local_system(Ld.derivatives(q_prev, q), Ld.derivatives(q, q_next));
  return q + detail::newton_increment(sys, false, index);
}

// Same with the 4x4 block matrix of the TQ x TQ equations.
inline std::pair<Vec2, Vec2> deloc_step_newton(const DiscreteLagrangianTQ& Ld, const Vector<4>& s_prev,
                                               const Vector<4>& s, const Vector<4>& s_next, std::size_t index = 0) {
  const auto sys = detail::local_system(Ld.derivatives(s_prev, s), Ld.derivatives(s, s_next));
  const Vector<4> out = s + detail::newton_increment(sys, false, index);
  return {segment<0, 2>(out), segment<2, 2>(out)};
}

// Solves the parallelized local equation for the middle state by Newton's
// method with step halving, starting from `guess`. Converged when the local
// residual norm is at most inner.tol times max(1, gradient scale), or when the
// Newton step stalls at rounding level.
template <std::size_t D>
Vector<D> solve_local_exact(const DiscreteLagrangian<D>& Ld, const Vector<D>& prev, const Vector<D>& guess,
                            const Vector<D>& next, const InnerNewton& inner, bool velocity_only = false,
                            std::size_t index = 0) {
  Vector<D> x = guess;
  auto sys = detail::local_system(Ld.derivatives(prev, x), Ld.derivatives(x, next));
  double rn = detail::local_norm(sys.residual, velocity_only);
  for (std::size_t it = 0; it < inner.max_iter; ++it) {
    if (rn <= inner.tol * std::max(1.0, sys.scale)) return x;
    const Vector<D> dx = detail::newton_increment(sys, velocity_only, index);
    if (norm(dx) <= 1e-15 * (1.0 + norm(x))) return x;
    double t = 1.0;
    bool accepted = false;
    for (std::size_t halving = 0; halving <= inner.max_halvings; ++halving, t *= 0.5) {
      const Vector<D> trial = x + t * dx;
      std::optional<detail::LocalSystem<D>> trial_sys;
      try {
        trial_sys = detail::local_system(Ld.derivatives(prev, trial), Ld.derivatives(trial, next));
      } catch (const Error&) {
        continue;  // trial left the domain of L_d; shorten the step
      }
      const double trial_norm = detail::local_norm(trial_sys->residual, velocity_only);
      if (trial_norm < rn) {
        x = trial;
        sys = *trial_sys;
        rn = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (norm(dx) <= 1e-10 * (1.0 + norm(x))) return x;  // residual at rounding level
      throw InnerNoConvergence("step halving failed in the local solve", index);
    }
  }
  if (rn <= inner.tol * std::max(1.0, sys.scale)) return x;
  throw InnerNoConvergence("local Newton did not converge", index);
}

inline Vec2 pdel_solve_exact(const DiscreteLagrangianQ& Ld, const Vec2& q_prev, const Vec2& q_guess,
                             const Vec2& q_next, const InnerNewton& inner = {}) {
  return solve_local_exact<2>(Ld, q_prev, q_guess, q_next, inner);
}

// ---------------------------------------------------------------------------
// Sweeps.

template <std::size_t D>
struct SweepOutput {
  Trajectory<D> next;
  std::vector<double> residual_norms;  // of the input, per index; 0 at the endpoints
  double max_residual = 0.0;
};

// Reusable sweep engine: owns the worker pool and scratch space.
template <std::size_t D>
class Sweeper {
 public:
  Sweeper(DiscretePtr<D> Ld, SweepConfig cfg, KnotSet knots = {})
      : Ld_(std::move(Ld)), cfg_(cfg), knots_(std::move(knots)), pool_(cfg.parallel_width) {
    cfg_.validate();
    if constexpr (D == 2)
      if (!knots_.empty()) throw InvalidArgument("knots are only supported for TQ trajectories");
  }

  const SweepConfig& config() const { return cfg_; }
  const DiscreteLagrangian<D>& lagrangian() const { return *Ld_; }
  const KnotSet& knots() const { return knots_; }

  SweepOutput<D> sweep(const Trajectory<D>& in) {
    const std::size_t n = in.segments();
    if (n < 2) throw InvalidArgument("sweep needs at least one interior sample");
    validate_knots(knots_, n);
    is_knot_.assign(n + 1, 0);
    for (const auto& k : knots_) is_knot_[k.index] = 1;

    segs_.resize(n);
    pool_.run(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) segs_[k] = Ld_->derivatives(in.states[k], in.states[k + 1]);
    });

    SweepOutput<D> out;
    out.next = in;
    out.residual_norms.assign(n + 1, 0.0);
    const double keep = 1.0 - cfg_.damping;
    pool_.run(n - 1, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const std::size_t k = j + 1;
        const bool knot = is_knot_[k] != 0;
        const auto sys = detail::local_system(segs_[k - 1], segs_[k]);
        out.residual_norms[k] = detail::local_norm(sys.residual, knot);
        Vector<D> delta;
        if (cfg_.rule == UpdateRule::JacobiNewton) {
          delta = detail::newton_increment(sys, knot, k);
        } else {
          delta = solve_local_exact<D>(*Ld_, in.states[k - 1], in.states[k], in.states[k + 1], cfg_.inner, knot, k) -
                  in.states[k];
          if constexpr (D == 4)
            if (knot) delta[0] = delta[1] = 0.0;
        }
        out.next.states[k] = in.states[k] + keep * delta;
      }
    });
    for (double r : out.residual_norms) out.max_residual = std::max(out.max_residual, r);
    return out;
  }

  // Max residual norm of a trajectory without updating it.
  double max_residual(const Trajectory<D>& in) {
    const std::size_t n = in.segments();
    std::vector<double> norms(n + 1, 0.0);
    is_knot_.assign(n + 1, 0);
    for (const auto& k : knots_) is_knot_[k.index] = 1;
    pool_.run(n - 1, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const std::size_t k = j + 1;
        const auto sys = detail::local_system(Ld_->derivatives(in.states[k - 1], in.states[k]),
                                              Ld_->derivatives(in.states[k], in.states[k + 1]));
        norms[k] = detail::local_norm(sys.residual, is_knot_[k] != 0);
      }
    });
    double m = 0.0;
    for (double r : norms) m = std::max(m, r);
    return m;
  }

 private:
  DiscretePtr<D> Ld_;
  SweepConfig cfg_;
  KnotSet knots_;
  WorkerPool pool_;
  std::vector<SegmentDerivatives<D>> segs_;
  std::vector<char> is_knot_;
};

template <std::size_t D>
Trajectory<D> sweep(const Trajectory<D>& traj, DiscretePtr<D> Ld, const SweepConfig& cfg, const KnotSet& knots = {}) {
  Sweeper<D> s(std::move(Ld), cfg, knots);
  return s.sweep(traj).next;
}

// Per-index residual norms (velocity part only at knots).
template <std::size_t D>
std::vector<double> residual_norms(const DiscreteLagrangian<D>& Ld, const Trajectory<D>& traj,
                                   const KnotSet& knots = {}) {
  const std::size_t n = traj.segments();
  std::vector<double> out(n + 1, 0.0);
  std::vector<char> is_knot(n + 1, 0);
  for (const auto& k : knots) is_knot.at(k.index) = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const auto sys = detail::local_system(Ld.derivatives(traj.states[k - 1], traj.states[k]),
                                          Ld.derivatives(traj.states[k], traj.states[k + 1]));
    out[k] = detail::local_norm(sys.residual, is_knot[k] != 0);
  }
  return out;
}

// Called after every residual evaluation with (sweeps applied so far, max residual).
using IterationObserver = std::function<void(std::size_t, double)>;

// Sweeps until max_k ||residual_k|| < tol_factor * h^2 or the iteration cap.
// The returned trajectory is the last one whose residual was evaluated.
template <std::size_t D>
SolveResult<D> solve(DiscretePtr<D> Ld, Trajectory<D> guess, const SweepConfig& cfg, const KnotSet& knots = {},
                     const IterationObserver& observer = {}) {
  validate(guess);
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  Sweeper<D> sweeper(std::move(Ld), cfg, knots);
  SolveResult<D> result;
  ResidualReport& report = result.report;
  report.tolerance = cfg.tol_factor * guess.h * guess.h;
  Trajectory<D> traj = std::move(guess);
  for (;;) {
    SweepOutput<D> step = sweeper.sweep(traj);
    report.max_residual.push_back(step.max_residual);
    report.wall_seconds.push_back(elapsed());
    if (observer) observer(report.iterations, step.max_residual);
    if (step.max_residual < report.tolerance) {
      report.converged = true;
      break;
    }
    if (report.iterations >= cfg.max_iterations) break;
    ++report.iterations;
    for (std::size_t k = 0; k < step.next.states.size(); ++k)
      if (!all_finite(step.next.states[k])) throw NonFiniteState(report.iterations, k);
    traj = std::move(step.next);
  }
  report.wall_time = elapsed();
  result.trajectory = std::move(traj);
  return result;
}

// ---------------------------------------------------------------------------
// Mesh refinement and initial guesses.

// Doubles the number of segments and halves h. Positions at new midpoints
// are linear interpolants (Q) or cubic Hermite values with Hermite
// derivatives as velocities (TQ).
template <std::size_t D>
Trajectory<D> refine(const Trajectory<D>& traj) {
  validate(traj);
  Trajectory<D> out;
  out.h = 0.5 * traj.h;
  out.t0 = traj.t0;
  out.states.reserve(2 * traj.segments() + 1);
  for (std::size_t k = 0; k < traj.segments(); ++k) {
    const auto& a = traj.states[k];
    const auto& b = traj.states[k + 1];
    out.states.push_back(a);
    if constexpr (D == 2) {
      out.states.push_back(0.5 * (a + b));
    } else {
      const Vec2 q0 = segment<0, 2>(a), v0 = segment<2, 2>(a);
      const Vec2 q1 = segment<0, 2>(b), v1 = segment<2, 2>(b);
      const double h = traj.h;
      const Vec2 q = 0.5 * (q0 + q1) + (h / 8.0) * (v0 - v1);
      const Vec2 v = (1.5 / h) * (q1 - q0) - 0.25 * (v0 + v1);
      out.states.push_back(tq_state(q, v));
    }
  }
  out.states.push_back(traj.states.back());
  return out;
}

inline KnotSet refine(const KnotSet& knots) {
  KnotSet out = knots;
  for (auto& k : out) k.index *= 2;
  return out;
}

namespace detail {

inline void check_guess_args(std::size_t n_segments, double h) {
  if (n_segments < 2) throw InvalidArgument("N must be at least 2");
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
}

// Clamped cubic spline through (t_i, y_i) with end slopes; returns node slopes.
inline std::vector<double> clamped_slopes(const std::vector<double>& t, const std::vector<double>& y, double s0,
                                          double sn) {
  const std::size_t n = t.size() - 1;
  std::vector<double> m(n + 1, 0.0);
  m[0] = s0;
  m[n] = sn;
  if (n < 2) return m;
  // Tridiagonal system for m_1..m_{n-1}.
  const std::size_t unknowns = n - 1;
  std::vector<double> lower(unknowns), diag(unknowns), upper(unknowns), rhs(unknowns);
  for (std::size_t i = 1; i < n; ++i) {
    const double dl = t[i] - t[i - 1], dr = t[i + 1] - t[i];
    const double sl = (y[i] - y[i - 1]) / dl, sr = (y[i + 1] - y[i]) / dr;
    const std::size_t r = i - 1;
    lower[r] = dr;
    diag[r] = 2.0 * (dl + dr);
    upper[r] = dl;
    rhs[r] = 3.0 * (dr * sl + dl * sr);
  }
  rhs.front() -= lower.front() * s0;
  rhs.back() -= upper.back() * sn;
  for (std::size_t r = 1; r < unknowns; ++r) {
    const double f = lower[r] / diag[r - 1];
    diag[r] -= f * upper[r - 1];
    rhs[r] -= f * rhs[r - 1];
  }
  m[unknowns] = rhs[unknowns - 1] / diag[unknowns - 1];
  for (std::size_t r = unknowns - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
  return m;
}

}  // namespace detail

// Straight line from `start` to `end` with equally spaced samples. For TQ the
// interior velocities are the constant chord velocity and the endpoint states
// are copied verbatim.
template <std::size_t D>
Trajectory<D> straight_line(const Vector<D>& start, const Vector<D>& end, std::size_t n_segments, double h,
                            double t0 = 0.0) {
  detail::check_guess_args(n_segments, h);
  Trajectory<D> out;
  out.h = h;
  out.t0 = t0;
  const Vec2 q0 = segment<0, 2>(start), q1 = segment<0, 2>(end);
  const Vec2 chord = (1.0 / (static_cast<double>(n_segments) * h)) * (q1 - q0);
  out.states.resize(n_segments + 1);
  for (std::size_t k = 0; k <= n_segments; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n_segments);
    const Vec2 q = q0 + s * (q1 - q0);
    if constexpr (D == 2)
      out.states[k] = q;
    else
      out.states[k] = tq_state(q, chord);
  }
  out.states.front() = start;
  out.states.back() = end;
  return out;
}

// Piecewise-linear guess through waypoints placed at given sample indices.
template <std::size_t D>
Trajectory<D> piecewise_linear(const Vector<D>& start, const Vector<D>& end, const KnotSet& waypoints,
                               std::size_t n_segments, double h, double t0 = 0.0) {
  detail::check_guess_args(n_segments, h);
  validate_knots(waypoints, n_segments);
  std::vector<std::size_t> idx{0};
  std::vector<Vec2> pos{segment<0, 2>(start)};
  for (const auto& w : waypoints) {
    idx.push_back(w.index);
    pos.push_back(w.position);
  }
  idx.push_back(n_segments);
  pos.push_back(segment<0, 2>(end));

  Trajectory<D> out;
  out.h = h;
  out.t0 = t0;
  out.states.resize(n_segments + 1);
  for (std::size_t piece = 0; piece + 1 < idx.size(); ++piece) {
    const std::size_t a = idx[piece], b = idx[piece + 1];
    const Vec2 slope = (1.0 / (static_cast<double>(b - a) * h)) * (pos[piece + 1] - pos[piece]);
    for (std::size_t k = a; k <= b; ++k) {
      const Vec2 q = k == a   ? pos[piece]
                     : k == b ? pos[piece + 1]
                              : pos[piece] + (static_cast<double>(k - a) / static_cast<double>(b - a)) *
                                                 (pos[piece + 1] - pos[piece]);
      if constexpr (D == 2)
        out.states[k] = q;
      else
        out.states[k] = tq_state(q, slope);
    }
  }
  out.states.front() = start;
  out.states.back() = end;
  return out;
}

// Piecewise-linear guess through waypoints given as positions only; sample
// indices are assigned in proportion to arc length.
template <std::size_t D>
Trajectory<D> polyline_guess(const Vector<D>& start, const Vector<D>& end, const std::vector<Vec2>& via,
                             std::size_t n_segments, double h, double t0 = 0.0) {
  std::vector<Vec2> pts{segment<0, 2>(start)};
  pts.insert(pts.end(), via.begin(), via.end());
  pts.push_back(segment<0, 2>(end));
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + norm(pts[i] - pts[i - 1]));
  if (!(cum.back() > 0.0)) throw InconsistentWaypoints("polyline has zero length");
  KnotSet waypoints;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    auto idx = static_cast<std::size_t>(std::lround(cum[i] / cum.back() * static_cast<double>(n_segments)));
    waypoints.push_back({idx, pts[i]});
  }
  return piecewise_linear<D>(start, end, waypoints, n_segments, h, t0);
}

// C^2 cubic spline through the boundary points and knots (at their sample
// times) with clamped end velocities, sampled at every t_k. TQ velocities are
// the spline derivative.
template <std::size_t D>
Trajectory<D> cubic_spline(const Vec2& q_start, const Vec2& v_start, const Vec2& q_end, const Vec2& v_end,
                           const KnotSet& knots, std::size_t n_segments, double h, double t0 = 0.0) {
  detail::check_guess_args(n_segments, h);
  validate_knots(knots, n_segments);
  std::vector<std::size_t> idx{0};
  std::vector<Vec2> pos{q_start};
  for (const auto& k : knots) {
    idx.push_back(k.index);
    pos.push_back(k.position);
  }
  idx.push_back(n_segments);
  pos.push_back(q_end);
  std::vector<double> t(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = static_cast<double>(idx[i]) * h;

  std::array<std::vector<double>, 2> slopes;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> y(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) y[i] = pos[i][c];
    slopes[c] = detail::clamped_slopes(t, y, v_start[c], v_end[c]);
  }

  Trajectory<D> out;
  out.h = h;
  out.t0 = t0;
  out.states.resize(n_segments + 1);
  for (std::size_t piece = 0; piece + 1 < idx.size(); ++piece) {
    const std::size_t a = idx[piece], b = idx[piece + 1];
    const double len = t[piece + 1] - t[piece];
    for (std::size_t k = a; k <= b; ++k) {
      const double s = static_cast<double>(k - a) / static_cast<double>(b - a);
      const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
      const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
      const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
      const double d01 = -d00, d11 = 3 * s * s - 2 * s;
      Vec2 q, v;
      for (std::size_t c = 0; c < 2; ++c) {
        const double y0 = pos[piece][c], y1 = pos[piece + 1][c];
        const double m0 = slopes[c][piece], m1 = slopes[c][piece + 1];
        q[c] = h00 * y0 + h10 * len * m0 + h01 * y1 + h11 * len * m1;
        v[c] = (d00 * y0 + d10 * len * m0 + d01 * y1 + d11 * len * m1) / len;
      }
      if (k == a) q = pos[piece];
      if (k == b) q = pos[piece + 1];
      if constexpr (D == 2)
        out.states[k] = q;
      else
        out.states[k] = tq_state(q, v);
    }
  }
  if constexpr (D == 4) {
    out.states.front() = tq_state(q_start, v_start);
    out.states.back() = tq_state(q_end, v_end);
  }
  return out;
}

}  // namespace parvi
