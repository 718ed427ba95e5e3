#pragma once

// Problem registry: boundary data, wind, Lagrangian choice and initial guess
// for the built-in navigation problems and user-defined ones.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "parvi/errors.hpp"
#include "parvi/geometry.hpp"
#include "parvi/lagrangians.hpp"
#include "parvi/solver.hpp"
#include "parvi/trajectory.hpp"

namespace parvi {

enum class LagrangianKind {
  Zermelo,        // F^2 of the Randers metric; cost = travel time
  Fuel,           // 1/2 |v - W|^2; cost = discrete action
  SecondOrderTV,  // fuel plus c-weighted control variation; cost = discrete action
};

inline const char* lagrangian_name(LagrangianKind k) {
  switch (k) {
    case LagrangianKind::Zermelo: return "zermelo";
    case LagrangianKind::Fuel: return "fuel";
    case LagrangianKind::SecondOrderTV: return "tv";
  }
  return "?";
}

// Interpolation constraint given by time rather than index so it survives
// changes of N.
struct TimedKnot {
  double time = 0.0;
  Vec2 position;
};

struct StraightLineGuess {};
struct PolylineGuess {
  std::vector<Vec2> via;
};
struct SplineGuess {};
using GuessSpec = std::variant<StraightLineGuess, PolylineGuess, SplineGuess>;

struct ProblemSpec {
  std::string name;
  LagrangianKind lagrangian = LagrangianKind::Fuel;
  WindPtr wind;
  double horizon = 1.0;  // T
  std::size_t N = 2;
  double t0 = 0.0;
  Vec2 start;
  Vec2 end;
  Vec2 start_velocity;  // second-order problems only
  Vec2 end_velocity;
  std::vector<TimedKnot> knots;  // second-order problems only
  double weight = 0.0;           // c of the TV Lagrangian
  GuessSpec guess = StraightLineGuess{};

  Kind kind() const { return lagrangian == LagrangianKind::SecondOrderTV ? Kind::TQ : Kind::Q; }
  double h() const { return horizon / static_cast<double>(N); }

  // Knot sample indices for the current N; each knot time must fall on a
  // sample strictly inside (t0, t0 + T).
  KnotSet knot_set() const {
    KnotSet out;
    const double step = h();
    for (const auto& k : knots) {
      const double rel = (k.time - t0) / step;
      const double idx = std::round(rel);
      if (std::abs(rel - idx) > 1e-9 * std::max(1.0, std::abs(rel)))
        throw InconsistentWaypoints("knot time " + std::to_string(k.time) + " is not on the sample grid");
      if (idx <= 0.0 || idx >= static_cast<double>(N))
        throw InconsistentWaypoints("knot time " + std::to_string(k.time) + " is not strictly inside the horizon");
      out.push_back({static_cast<std::size_t>(idx), k.position});
    }
    validate_knots(out, N);
    return out;
  }

  void validate() const {
    if (!wind) throw InvalidArgument("problem has no wind field");
    if (N < 2) throw InvalidArgument("N must be at least 2");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon T must be positive");
    for (const Vec2& p : {start, end, start_velocity, end_velocity})
      if (!all_finite(p)) throw InvalidArgument("boundary data must be finite");
    if (lagrangian == LagrangianKind::SecondOrderTV) {
      if (!(weight > 0.0)) throw InvalidArgument("weight c must be positive");
      (void)knot_set();
    } else if (!knots.empty()) {
      throw InvalidArgument("knots require a second-order problem");
    }
    if (std::holds_alternative<SplineGuess>(guess) && kind() != Kind::TQ && !knots.empty())
      throw InvalidArgument("spline guess with knots requires a second-order problem");
  }

  ProblemSpec with_N(std::size_t n) const {
    ProblemSpec p = *this;
    p.N = n;
    return p;
  }
};

// Zermelo problem: four-bump wind, (0,0) -> (6,2), N = 80.
// The functional is reparametrization invariant; T only fixes the time scale.
inline ProblemSpec build_fig2_problem() {
  ProblemSpec p;
  p.name = "fig2";
  p.lagrangian = LagrangianKind::Zermelo;
  p.wind = zermelo_wind();
  p.horizon = 8.0;
  p.N = 80;
  p.start = vec2(0, 0);
  p.end = vec2(6, 2);
  return p;
}

// Fuel-optimal problem: T = 30, N = 200, (0,0) -> (6,5).
inline ProblemSpec build_fig3_problem() {
  ProblemSpec p;
  p.name = "fig3";
  p.lagrangian = LagrangianKind::Fuel;
  p.wind = fuel_wind();
  p.horizon = 30.0;
  p.N = 200;
  p.start = vec2(0, 0);
  p.end = vec2(6, 5);
  return p;
}

// Second-order interpolation problem: T = 60, c = 50, (0,0) -> (3,5) at rest,
// through (1,3) at t = 20 and (5,2) at t = 40. N = 240 by default; N = 120 is
// the coarse starting mesh.
inline ProblemSpec build_fig4_problem(std::size_t n = 240) {
  ProblemSpec p;
  p.name = "fig4";
  p.lagrangian = LagrangianKind::SecondOrderTV;
  p.wind = fuel_wind();
  p.horizon = 60.0;
  p.N = n;
  p.start = vec2(0, 0);
  p.end = vec2(3, 5);
  p.start_velocity = vec2(0, 0);
  p.end_velocity = vec2(0, 0);
  p.knots = {{20.0, vec2(1, 3)}, {40.0, vec2(5, 2)}};
  p.weight = 50.0;
  p.guess = SplineGuess{};
  return p;
}

// L = 1/2 |v|^2 between two points; the discrete solution is the straight,
// equally spaced line.
inline ProblemSpec build_free_particle_problem(std::size_t n = 10) {
  ProblemSpec p;
  p.name = "free-particle";
  p.lagrangian = LagrangianKind::Fuel;
  p.wind = zero_wind();
  p.horizon = 1.0;
  p.N = n;
  p.start = vec2(0, 0);
  p.end = vec2(1, 2);
  return p;
}

inline std::vector<std::string> builtin_problem_names() { return {"fig2", "fig3", "fig4", "fig4-coarse", "free-particle"}; }

inline ProblemSpec builtin_problem(const std::string& name) {
  if (name == "fig2") return build_fig2_problem();
  if (name == "fig3") return build_fig3_problem();
  if (name == "fig4") return build_fig4_problem(240);
  if (name == "fig4-coarse") {
    ProblemSpec p = build_fig4_problem(120);
    p.name = "fig4-coarse";
    return p;
  }
  if (name == "free-particle") return build_free_particle_problem();
  std::string known;
  for (const auto& n : builtin_problem_names()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown problem '" + name + "'; available problems: " + known);
}

inline DiscretePtr<2> make_discrete_q(const ProblemSpec& p) {
  FirstOrderPtr L;
  switch (p.lagrangian) {
    case LagrangianKind::Zermelo: L = std::make_shared<ZermeloLagrangian>(RandersData{p.wind}); break;
    case LagrangianKind::Fuel: L = std::make_shared<FuelLagrangian>(p.wind); break;
    case LagrangianKind::SecondOrderTV: throw InvalidArgument("second-order problem has a TQ discrete Lagrangian");
  }
  return discretize_trapezoidal(std::move(L), p.h());
}

inline DiscretePtr<4> make_discrete_tq(const ProblemSpec& p) {
  if (p.lagrangian != LagrangianKind::SecondOrderTV) throw InvalidArgument("first-order problem has a Q discrete Lagrangian");
  return discretize_lobatto2(std::make_shared<TotalVariationLagrangian>(p.wind, p.weight), p.h());
}

template <std::size_t D>
DiscretePtr<D> make_discrete(const ProblemSpec& p) {
  if constexpr (D == 2)
    return make_discrete_q(p);
  else
    return make_discrete_tq(p);
}

template <std::size_t D>
Vector<D> boundary_state(const ProblemSpec& p, bool at_end) {
  const Vec2 q = at_end ? p.end : p.start;
  if constexpr (D == 2)
    return q;
  else
    return tq_state(q, at_end ? p.end_velocity : p.start_velocity);
}

template <std::size_t D>
Trajectory<D> initial_guess(const ProblemSpec& p) {
  p.validate();
  const auto a = boundary_state<D>(p, false);
  const auto b = boundary_state<D>(p, true);
  return std::visit(
      [&](const auto& g) -> Trajectory<D> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, StraightLineGuess>) {
          if (!p.knots.empty()) return piecewise_linear<D>(a, b, p.knot_set(), p.N, p.h(), p.t0);
          return straight_line<D>(a, b, p.N, p.h(), p.t0);
        } else if constexpr (std::is_same_v<G, PolylineGuess>) {
          return polyline_guess<D>(a, b, g.via, p.N, p.h(), p.t0);
        } else {
          return cubic_spline<D>(p.start, p.start_velocity, p.end, p.end_velocity, p.knot_set(), p.N, p.h(), p.t0);
        }
      },
      p.guess);
}

// Zermelo: navigation time. Fuel and TV: the discrete action, which is the
// discretized control cost since the Lagrangians equal the cost integrands
// once the control equations are substituted.
template <std::size_t D>
double evaluate_cost(const ProblemSpec& p, const Trajectory<D>& traj) {
  if (p.lagrangian == LagrangianKind::Zermelo) return travel_time(RandersData{p.wind}, traj);
  auto spec = p;
  spec.N = traj.segments();
  spec.horizon = traj.h * static_cast<double>(traj.segments());
  return action(*make_discrete<D>(spec), traj);
}

// Checks that the trajectory matches the problem's boundary data and knots;
// returns human-readable problems (empty when consistent).
template <std::size_t D>
std::vector<std::string> check_boundary(const ProblemSpec& p, const Trajectory<D>& traj) {
  std::vector<std::string> issues;
  if (traj.states.empty()) return {"trajectory is empty"};
  if (!(traj.states.front() == boundary_state<D>(p, false))) issues.push_back("first state differs from the start boundary");
  if (!(traj.states.back() == boundary_state<D>(p, true))) issues.push_back("last state differs from the end boundary");
  if constexpr (D == 4) {
    auto spec = p;
    spec.N = traj.segments();
    spec.horizon = traj.h * static_cast<double>(traj.segments());
    for (const auto& k : spec.knot_set())
      if (!(traj.position(k.index) == k.position))
        issues.push_back("knot position differs at index " + std::to_string(k.index));
  }
  return issues;
}

template <std::size_t D>
SolveResult<D> solve(const ProblemSpec& p, Trajectory<D> guess, const SweepConfig& cfg,
                     const IterationObserver& observer = {}) {
  p.validate();
  auto spec = p;
  spec.N = guess.segments();
  spec.horizon = guess.h * static_cast<double>(guess.segments());
  const KnotSet knots = D == 4 ? spec.knot_set() : KnotSet{};
  return solve<D>(make_discrete<D>(spec), std::move(guess), cfg, knots, observer);
}

}  // namespace parvi
