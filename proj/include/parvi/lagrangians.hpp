#pragma once

// Continuous Lagrangians for the navigation problems and their discretizations.
//
// Continuous first-order Lagrangians L(q, v) report derivatives over the
// stacked variable z = (q, v) in R^4; second-order ones L(q, v, a) over
// z = (q, v, a) in R^6. Discrete Lagrangians L_d(s0, s1) report derivatives
// over (s0, s1), assembled from the continuous ones by the chain rule through
// the (linear) stage maps of each quadrature.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>

#include "parvi/autodiff.hpp"
#include "parvi/errors.hpp"
#include "parvi/geometry.hpp"
#include "parvi/linalg.hpp"
#include "parvi/trajectory.hpp"

namespace parvi {

template <std::size_t N>
struct LagrangianDerivatives {
  double value = 0.0;
  Vector<N> grad;
  Matrix<N, N> hess;
};

template <std::size_t N>
LagrangianDerivatives<N> to_derivatives(const Jet<N>& j) {
  LagrangianDerivatives<N> d;
  d.value = j.v;
  for (std::size_t i = 0; i < N; ++i) d.grad[i] = j.g[i];
  for (std::size_t i = 0; i < N * N; ++i) d.hess.a[i] = j.h[i];
  return d;
}

// (W_1, W_2) at the position held in jet slots `offset`, `offset + 1`.
template <std::size_t N>
std::array<Jet<N>, 2> wind_jet(const WindDerivatives& w, std::size_t offset = 0) {
  std::array<Jet<N>, 2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    out[i].v = w.value[i];
    for (std::size_t j = 0; j < 2; ++j) {
      out[i].g[offset + j] = w.jacobian(i, j);
      for (std::size_t k = 0; k < 2; ++k) out[i].h[(offset + j) * N + offset + k] = w.second[i](j, k);
    }
  }
  return out;
}

// Entries dW_i/dx_j of the wind Jacobian as jets in the position slots.
template <std::size_t N>
std::array<std::array<Jet<N>, 2>, 2> wind_jacobian_jet(const WindDerivatives& w, std::size_t offset = 0) {
  std::array<std::array<Jet<N>, 2>, 2> out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      auto& e = out[i][j];
      e.v = w.jacobian(i, j);
      for (std::size_t k = 0; k < 2; ++k) {
        e.g[offset + k] = w.second[i](j, k);
        for (std::size_t l = 0; l < 2; ++l) e.h[(offset + k) * N + offset + l] = w.third[i][j](k, l);
      }
    }
  return out;
}

template <std::size_t N>
std::array<Jet<N>, 2> variable_pair(const Vec2& p, std::size_t offset) {
  return {Jet<N>::variable(offset, p.x()), Jet<N>::variable(offset + 1, p.y())};
}

inline std::array<double, 2> as_array(const Vec2& p) { return {p.x(), p.y()}; }

// ---------------------------------------------------------------------------
// Randers metric of the Zermelo problem.

struct RandersData {
  WindPtr wind;

  double alpha(const Vec2& q) const {
    const Vec2 w = wind->eval(q);
    return 1.0 - dot(w, w);
  }
};

// F(q, v) = sqrt(a(v, v)) + <b, v> with
//   a(v, v) = |v|^2 / alpha + <W, v>^2 / alpha^2,  <b, v> = -<W, v> / alpha,
//   alpha = 1 - |W|^2.
template <class S>
S randers_metric(const std::array<S, 2>& w, const std::array<S, 2>& v) {
  using std::sqrt;
  const S alpha = 1.0 - (w[0] * w[0] + w[1] * w[1]);
  const double alpha_value = [&] {
    if constexpr (std::is_same_v<S, double>)
      return alpha;
    else
      return alpha.v;
  }();
  if (!(alpha_value > 0.0)) throw AlphaNonPositive(alpha_value);
  const S inv_alpha = 1.0 / alpha;
  const S wv = w[0] * v[0] + w[1] * v[1];
  const S a = (v[0] * v[0] + v[1] * v[1]) * inv_alpha + wv * wv * (inv_alpha * inv_alpha);
  return sqrt(a) - wv * inv_alpha;
}

inline double randers_F(const RandersData& rd, const Vec2& q, const Vec2& v) {
  return randers_metric(as_array(rd.wind->eval(q)), as_array(v));
}

// ---------------------------------------------------------------------------
// Continuous Lagrangians.

class FirstOrderLagrangian {
 public:
  virtual ~FirstOrderLagrangian() = default;
  virtual double value(const Vec2& q, const Vec2& v) const = 0;
  // Derivatives over z = (q, v).
  virtual LagrangianDerivatives<4> derivatives(const Vec2& q, const Vec2& v) const = 0;
  virtual std::string name() const = 0;
};

class SecondOrderLagrangian {
 public:
  virtual ~SecondOrderLagrangian() = default;
  virtual double value(const Vec2& q, const Vec2& v, const Vec2& a) const = 0;
  // Derivatives over z = (q, v, a).
  virtual LagrangianDerivatives<6> derivatives(const Vec2& q, const Vec2& v, const Vec2& a) const = 0;
  virtual std::string name() const = 0;
};

using FirstOrderPtr = std::shared_ptr<const FirstOrderLagrangian>;
using SecondOrderPtr = std::shared_ptr<const SecondOrderLagrangian>;

// Velocities below this norm make F^2 non-smooth; evaluation is refused.
inline constexpr double kMinZermeloSpeed = 1e-8;

// L(q, v) = F(q, v)^2.
class ZermeloLagrangian final : public FirstOrderLagrangian {
 public:
  explicit ZermeloLagrangian(RandersData rd) : rd_(std::move(rd)) {}

  double value(const Vec2& q, const Vec2& v) const override {
    check_speed(v);
    const double f = randers_metric(as_array(rd_.wind->eval(q)), as_array(v));
    return f * f;
  }

  LagrangianDerivatives<4> derivatives(const Vec2& q, const Vec2& v) const override {
    check_speed(v);
    const auto w = wind_jet<4>(rd_.wind->derivatives(q, 2));
    const Jet<4> f = randers_metric(w, variable_pair<4>(v, 2));
    return to_derivatives(f * f);
  }

  std::string name() const override { return "zermelo[" + rd_.wind->name() + "]"; }
  const RandersData& randers() const { return rd_; }

 private:
  static void check_speed(const Vec2& v) {
    const double s = norm(v);
    if (s < kMinZermeloSpeed) throw DegenerateVelocity(s);
  }
  RandersData rd_;
};

// L(q, v) = 1/2 |v - W(q)|^2.
class FuelLagrangian final : public FirstOrderLagrangian {
 public:
  explicit FuelLagrangian(WindPtr wind) : wind_(std::move(wind)) {}

  double value(const Vec2& q, const Vec2& v) const override {
    const Vec2 r = v - wind_->eval(q);
    return 0.5 * dot(r, r);
  }

  LagrangianDerivatives<4> derivatives(const Vec2& q, const Vec2& v) const override {
    const auto w = wind_jet<4>(wind_->derivatives(q, 2));
    const auto vj = variable_pair<4>(v, 2);
    const Jet<4> r0 = vj[0] - w[0];
    const Jet<4> r1 = vj[1] - w[1];
    return to_derivatives(0.5 * (r0 * r0 + r1 * r1));
  }

  std::string name() const override { return "fuel[" + wind_->name() + "]"; }

 private:
  WindPtr wind_;
};

// L(q, v, a) = 1/2 ( |v - W(q)|^2 + c |a - DW(q) v|^2 ).
class TotalVariationLagrangian final : public SecondOrderLagrangian {
 public:
  TotalVariationLagrangian(WindPtr wind, double c) : wind_(std::move(wind)), c_(c) {
    if (!(c > 0.0)) throw InvalidArgument("total-variation weight c must be positive");
  }

  double value(const Vec2& q, const Vec2& v, const Vec2& a) const override {
    const WindDerivatives w = wind_->derivatives(q, 1);
    const Vec2 r = v - w.value;
    const Vec2 s = a - w.jacobian * v;
    return 0.5 * (dot(r, r) + c_ * dot(s, s));
  }

  LagrangianDerivatives<6> derivatives(const Vec2& q, const Vec2& v, const Vec2& a) const override {
    const WindDerivatives wd = wind_->derivatives(q, 3);
    const auto w = wind_jet<6>(wd);
    const auto dw = wind_jacobian_jet<6>(wd);
    const auto vj = variable_pair<6>(v, 2);
    const auto aj = variable_pair<6>(a, 4);
    const Jet<6> r0 = vj[0] - w[0];
    const Jet<6> r1 = vj[1] - w[1];
    const Jet<6> s0 = aj[0] - (dw[0][0] * vj[0] + dw[0][1] * vj[1]);
    const Jet<6> s1 = aj[1] - (dw[1][0] * vj[0] + dw[1][1] * vj[1]);
    return to_derivatives(0.5 * (r0 * r0 + r1 * r1) + (0.5 * c_) * (s0 * s0 + s1 * s1));
  }

  std::string name() const override { return "tv[" + wind_->name() + ", c=" + std::to_string(c_) + "]"; }
  double weight() const { return c_; }

 private:
  WindPtr wind_;
  double c_;
};

// L(q, v, a) = 1/2 |a|^2; the cubic-spline energy.
class AccelerationLagrangian final : public SecondOrderLagrangian {
 public:
  double value(const Vec2&, const Vec2&, const Vec2& a) const override { return 0.5 * dot(a, a); }
  LagrangianDerivatives<6> derivatives(const Vec2&, const Vec2&, const Vec2& a) const override {
    LagrangianDerivatives<6> d;
    d.value = 0.5 * dot(a, a);
    d.grad[4] = a.x();
    d.grad[5] = a.y();
    d.hess(4, 4) = d.hess(5, 5) = 1.0;
    return d;
  }
  std::string name() const override { return "acceleration"; }
};

// ---------------------------------------------------------------------------
// Discrete Lagrangians.

// Derivatives of L_d(s0, s1) over the stacked (s0, s1) in R^(2D). Argument
// numbering follows the usual convention: for D = 2 arguments 1, 2 are q0, q1;
// for D = 4 arguments 1..4 are q0, v0, q1, v1.
template <std::size_t D>
struct SegmentDerivatives {
  double value = 0.0;
  Vector<2 * D> grad;
  Matrix<2 * D, 2 * D> hess;

  Vector<D> left() const { return segment<0, D>(grad); }
  Vector<D> right() const { return segment<D, D>(grad); }
  Matrix<D, D> left_left() const { return block<0, 0, D, D>(hess); }
  Matrix<D, D> right_right() const { return block<D, D, D, D>(hess); }

  // D_i L_d, 1-based argument index.
  Vec2 partial(std::size_t i) const {
    const std::size_t o = 2 * (i - 1);
    return vec2(grad[o], grad[o + 1]);
  }
  // D_ij L_d = D_j(D_i L_d); entry (r, s) = d^2 L_d / d(arg i)_r d(arg j)_s.
  Mat2 partial(std::size_t i, std::size_t j) const {
    const std::size_t oi = 2 * (i - 1), oj = 2 * (j - 1);
    Mat2 m;
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t s = 0; s < 2; ++s) m(r, s) = hess(oi + r, oj + s);
    return m;
  }
};

template <std::size_t D>
class DiscreteLagrangian {
 public:
  using State = Vector<D>;
  virtual ~DiscreteLagrangian() = default;
  virtual double value(const State& s0, const State& s1) const = 0;
  virtual SegmentDerivatives<D> derivatives(const State& s0, const State& s1) const = 0;
  virtual double step() const = 0;
  virtual std::string name() const = 0;
};

using DiscreteLagrangianQ = DiscreteLagrangian<2>;
using DiscreteLagrangianTQ = DiscreteLagrangian<4>;
template <std::size_t D>
using DiscretePtr = std::shared_ptr<const DiscreteLagrangian<D>>;

namespace detail {

// grad += scale * A^T g ;  hess += scale * A^T H A
template <std::size_t M, std::size_t N>
void pull_back(const Matrix<M, N>& A, const LagrangianDerivatives<M>& d, double scale, Vector<N>& grad,
               Matrix<N, N>& hess) {
  grad += scale * transpose_times(A, d.grad);
  hess = hess + scale * (transpose(A) * (d.hess * A));
}

}  // namespace detail

// L_d(q0, q1) = h/2 [ L(q0, (q1-q0)/h) + L(q1, (q1-q0)/h) ].
class TrapezoidalLagrangian final : public DiscreteLagrangianQ {
 public:
  TrapezoidalLagrangian(FirstOrderPtr lagrangian, double h) : L_(std::move(lagrangian)), h_(h) {
    if (!(h > 0.0)) throw InvalidArgument("step h must be positive");
    for (std::size_t stage = 0; stage < 2; ++stage) {
      auto& A = stage_map_[stage];
      A(0, 2 * stage) = 1.0;
      A(1, 2 * stage + 1) = 1.0;
      A(2, 0) = A(3, 1) = -1.0 / h;
      A(2, 2) = A(3, 3) = 1.0 / h;
    }
  }

  double value(const Vec2& q0, const Vec2& q1) const override {
    const Vec2 v = (1.0 / h_) * (q1 - q0);
    return 0.5 * h_ * (L_->value(q0, v) + L_->value(q1, v));
  }

  SegmentDerivatives<2> derivatives(const Vec2& q0, const Vec2& q1) const override {
    const Vec2 v = (1.0 / h_) * (q1 - q0);
    const auto d0 = L_->derivatives(q0, v);
    const auto d1 = L_->derivatives(q1, v);
    SegmentDerivatives<2> out;
    out.value = 0.5 * h_ * (d0.value + d1.value);
    detail::pull_back(stage_map_[0], d0, 0.5 * h_, out.grad, out.hess);
    detail::pull_back(stage_map_[1], d1, 0.5 * h_, out.grad, out.hess);
    return out;
  }

  double step() const override { return h_; }
  std::string name() const override { return "trapezoidal(" + L_->name() + ")"; }
  const FirstOrderLagrangian& continuous() const { return *L_; }

 private:
  FirstOrderPtr L_;
  double h_;
  std::array<Matrix<4, 4>, 2> stage_map_{};
};

// Two-stage Lobatto discretization of a second-order Lagrangian:
//   L_d = h/2 [ L(q0, v0, A+) + L(q1, v1, A-) ]
//   A+ =  (2/h^2)(3(q1 - q0) - h(v1 + 2 v0))
//   A- = -(2/h^2)(3(q1 - q0) - h(2 v1 + v0))
// i.e. the end accelerations of the cubic Hermite interpolant.
class LobattoLagrangian final : public DiscreteLagrangianTQ {
 public:
  LobattoLagrangian(SecondOrderPtr lagrangian, double h) : L_(std::move(lagrangian)), h_(h) {
    if (!(h > 0.0)) throw InvalidArgument("step h must be positive");
    const double p = 6.0 / (h * h), f = 4.0 / h, g = 2.0 / h;
    // Columns: q0 (0,1), v0 (2,3), q1 (4,5), v1 (6,7). Rows: q, v, a.
    auto& A = stage_map_[0];
    auto& B = stage_map_[1];
    for (std::size_t c = 0; c < 2; ++c) {
      A(c, c) = 1.0;
      A(2 + c, 2 + c) = 1.0;
      A(4 + c, c) = -p;
      A(4 + c, 2 + c) = -f;
      A(4 + c, 4 + c) = p;
      A(4 + c, 6 + c) = -g;
      B(c, 4 + c) = 1.0;
      B(2 + c, 6 + c) = 1.0;
      B(4 + c, c) = p;
      B(4 + c, 2 + c) = g;
      B(4 + c, 4 + c) = -p;
      B(4 + c, 6 + c) = f;
    }
  }

  struct Stages {
    Vec2 accel_start;
    Vec2 accel_end;
  };

  Stages stage_accelerations(const Vector<4>& s0, const Vector<4>& s1) const {
    const Vec2 dq = segment<0, 2>(s1) - segment<0, 2>(s0);
    const Vec2 v0 = segment<2, 2>(s0), v1 = segment<2, 2>(s1);
    const double k = 2.0 / (h_ * h_);
    return {k * (3.0 * dq - h_ * (v1 + 2.0 * v0)), -k * (3.0 * dq - h_ * (2.0 * v1 + v0))};
  }

  double value(const Vector<4>& s0, const Vector<4>& s1) const override {
    const Stages st = stage_accelerations(s0, s1);
    return 0.5 * h_ *
           (L_->value(segment<0, 2>(s0), segment<2, 2>(s0), st.accel_start) +
            L_->value(segment<0, 2>(s1), segment<2, 2>(s1), st.accel_end));
  }

  SegmentDerivatives<4> derivatives(const Vector<4>& s0, const Vector<4>& s1) const override {
    const Stages st = stage_accelerations(s0, s1);
    const auto d0 = L_->derivatives(segment<0, 2>(s0), segment<2, 2>(s0), st.accel_start);
    const auto d1 = L_->derivatives(segment<0, 2>(s1), segment<2, 2>(s1), st.accel_end);
    SegmentDerivatives<4> out;
    out.value = 0.5 * h_ * (d0.value + d1.value);
    detail::pull_back(stage_map_[0], d0, 0.5 * h_, out.grad, out.hess);
    detail::pull_back(stage_map_[1], d1, 0.5 * h_, out.grad, out.hess);
    return out;
  }

  double step() const override { return h_; }
  std::string name() const override { return "lobatto2(" + L_->name() + ")"; }

 private:
  SecondOrderPtr L_;
  double h_;
  std::array<Matrix<6, 8>, 2> stage_map_{};
};

inline DiscretePtr<2> discretize_trapezoidal(FirstOrderPtr L, double h) {
  return std::make_shared<TrapezoidalLagrangian>(std::move(L), h);
}

inline DiscretePtr<4> discretize_lobatto2(SecondOrderPtr L, double h) {
  return std::make_shared<LobattoLagrangian>(std::move(L), h);
}

// ---------------------------------------------------------------------------
// Cost functionals.

// Sum of L_d over consecutive samples.
template <std::size_t D>
double action(const DiscreteLagrangian<D>& Ld, const Trajectory<D>& traj) {
  if (traj.states.size() < 2) throw InvalidArgument("action needs at least two samples");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) sum += Ld.value(traj.states[k], traj.states[k + 1]);
  return sum;
}

// Navigation time: per segment, trapezoid in q with the velocity frozen at the
// forward difference, sum_k h/2 [F(q_k, d_k) + F(q_{k+1}, d_k)].
template <std::size_t D>
double travel_time(const RandersData& rd, const Trajectory<D>& traj) {
  if (traj.states.size() < 2) throw InvalidArgument("travel time needs at least two samples");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const Vec2 q0 = traj.position(k), q1 = traj.position(k + 1);
    const Vec2 d = (1.0 / traj.h) * (q1 - q0);
    sum += 0.5 * traj.h * (randers_F(rd, q0, d) + randers_F(rd, q1, d));
  }
  return sum;
}

}  // namespace parvi
