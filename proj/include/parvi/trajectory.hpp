#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "parvi/errors.hpp"
#include "parvi/linalg.hpp"

namespace parvi {

// State dimension: 2 for positions (Q), 4 for position-velocity pairs (TQ).
enum class Kind { Q, TQ };

template <std::size_t D>
inline constexpr Kind kind_of = D == 2 ? Kind::Q : Kind::TQ;

inline const char* kind_name(Kind k) { return k == Kind::Q ? "Q" : "TQ"; }

// Uniformly sampled discrete curve q_0..q_N (or (q_k, v_k) for D = 4).
template <std::size_t D>
struct Trajectory {
  static_assert(D == 2 || D == 4);
  using State = Vector<D>;

  std::vector<State> states;
  double h = 1.0;
  double t0 = 0.0;

  std::size_t segments() const { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * h; }

  Vec2 position(std::size_t k) const { return segment<0, 2>(states[k]); }
  Vec2 velocity(std::size_t k) const requires(D == 4) { return segment<2, 2>(states[k]); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using TrajectoryQ = Trajectory<2>;
using TrajectoryTQ = Trajectory<4>;

inline Vector<4> tq_state(const Vec2& q, const Vec2& v) { return concat(q, v); }

template <std::size_t D>
void validate(const Trajectory<D>& traj) {
  if (traj.states.size() < 2) throw InvalidArgument("trajectory needs at least two samples");
  if (!(traj.h > 0.0) || !std::isfinite(traj.h)) throw InvalidArgument("trajectory step h must be positive");
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    if (!all_finite(traj.states[k])) throw InvalidArgument("non-finite state at index " + std::to_string(k));
}

// Interior sample constrained to a prescribed position.
struct Knot {
  std::size_t index = 0;
  Vec2 position;
  friend bool operator==(const Knot&, const Knot&) = default;
};

using KnotSet = std::vector<Knot>;

inline void validate_knots(const KnotSet& knots, std::size_t n_segments) {
  for (std::size_t a = 0; a < knots.size(); ++a) {
    if (knots[a].index == 0 || knots[a].index >= n_segments)
      throw InconsistentWaypoints("knot index " + std::to_string(knots[a].index) + " is not interior");
    if (a > 0 && knots[a].index <= knots[a - 1].index)
      throw InconsistentWaypoints("knot indices must be strictly increasing");
  }
}

}  // namespace parvi
