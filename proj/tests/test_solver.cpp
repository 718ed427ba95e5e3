#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <numeric>
#include <random>

#include "parvi/problems.hpp"
#include "parvi/solver.hpp"
#include "test_support.hpp"

namespace parvi {
namespace {

using testing::Probe;
using testing::rel_error;

template <std::size_t D>
bool bitwise_equal(const Trajectory<D>& a, const Trajectory<D>& b) {
  if (a.states.size() != b.states.size() || a.h != b.h || a.t0 != b.t0) return false;
  return std::memcmp(a.states.data(), b.states.data(), a.states.size() * sizeof(Vector<D>)) == 0;
}

bool bitwise_equal(const Vec2& a, const Vec2& b) { return std::memcmp(&a, &b, sizeof(Vec2)) == 0; }

DiscretePtr<2> free_particle(double h) { return discretize_trapezoidal(std::make_shared<FuelLagrangian>(zero_wind()), h); }
DiscretePtr<2> fuel(double h) { return discretize_trapezoidal(std::make_shared<FuelLagrangian>(fuel_wind()), h); }
DiscretePtr<4> spline_energy(double h) { return discretize_lobatto2(std::make_shared<AccelerationLagrangian>(), h); }
DiscretePtr<4> tv(double h) {
  return discretize_lobatto2(std::make_shared<TotalVariationLagrangian>(fuel_wind(), 50.0), h);
}

TrajectoryQ make_q(std::vector<Vec2> pts, double h) {
  TrajectoryQ t;
  t.h = h;
  t.states = std::move(pts);
  return t;
}

// Smoothly perturbed straight line with fixed endpoints.
TrajectoryQ wiggly(Vec2 a, Vec2 b, std::size_t n, double h, double amp, std::uint64_t seed) {
  auto t = straight_line<2>(a, b, n, h);
  Probe probe(seed);
  const double p1 = probe.uniform(-1, 1), p2 = probe.uniform(-1, 1);
  for (std::size_t k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n);
    t.states[k] = t.states[k] + amp * vec2(p1 * std::sin(M_PI * s), p2 * std::sin(2 * M_PI * s));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Local equations.

TEST(DelResidual, FreeParticleExamples) {
  const auto Ld = free_particle(0.1);
  EXPECT_EQ(del_residual(*Ld, vec2(0, 0), vec2(1, 0), vec2(2, 0)), vec2(0, 0));
  const Vec2 r = del_residual(*Ld, vec2(0, 0), vec2(1, 0), vec2(4, 0));
  EXPECT_NEAR(r.x(), -20.0, 1e-12);
  EXPECT_EQ(r.y(), 0.0);
}

TEST(DelocResidual, UniformMotionOfSplineEnergy) {
  const double h = 0.5;
  const auto Ld = spline_energy(h);
  const Vec2 v = vec2(1, 2), q = vec2(0.5, 1);
  const auto [rq, rv] = deloc_residual(*Ld, tq_state(q - h * v, v), tq_state(q, v), tq_state(q + h * v, v));
  EXPECT_EQ(rq, vec2(0, 0));
  EXPECT_EQ(rv, vec2(0, 0));
}

TEST(DelocResidual, AssembledFromIndividualPartials) {
  const auto Ld = tv(0.25);
  Probe probe(30);
  for (int i = 0; i < 50; ++i) {
    const auto s0 = tq_state(probe.point(0, 6, 0, 5), probe.point(-1, 1, -1, 1));
    const auto s1 = tq_state(probe.point(0, 6, 0, 5), probe.point(-1, 1, -1, 1));
    const auto s2 = tq_state(probe.point(0, 6, 0, 5), probe.point(-1, 1, -1, 1));
    const auto left = Ld->derivatives(s0, s1), right = Ld->derivatives(s1, s2);
    const auto [rq, rv] = deloc_residual(*Ld, s0, s1, s2);
    EXPECT_LT(max_abs(rq - (left.partial(3) + right.partial(1))), 1e-12 * std::max(1.0, max_abs(rq)));
    EXPECT_LT(max_abs(rv - (left.partial(4) + right.partial(2))), 1e-12 * std::max(1.0, max_abs(rv)));
  }
}

TEST(PdelStepNewton, FreeParticleLandsOnMidpoint) {
  const auto Ld = free_particle(0.1);
  const Vec2 q = pdel_step_newton(*Ld, vec2(0, 0), vec2(1, 0), vec2(4, 0));
  EXPECT_NEAR(q.x(), 2.0, 1e-14);
  EXPECT_EQ(q.y(), 0.0);
}

TEST(PdelStepNewton, ZeroResidualIsFixedPoint) {
  const auto Ld = free_particle(0.25);
  const Vec2 q = pdel_step_newton(*Ld, vec2(0, 0), vec2(1, 0.5), vec2(2, 1));
  EXPECT_TRUE(bitwise_equal(q, vec2(1, 0.5)));
}

TEST(PdelSolveExact, FreeParticleMidpointFromAnyGuess) {
  const auto Ld = free_particle(0.1);
  Probe probe(31);
  for (int i = 0; i < 20; ++i) {
    const Vec2 q = pdel_solve_exact(*Ld, vec2(0, 0), probe.point(-10, 10, -10, 10), vec2(4, 0));
    EXPECT_NEAR(q.x(), 2.0, 1e-12);
    EXPECT_NEAR(q.y(), 0.0, 1e-12);
  }
}

TEST(PdelSolveExact, AgreesWithNewtonStepWhenQuadratic) {
  const auto Ld = free_particle(0.2);
  Probe probe(32);
  for (int i = 0; i < 50; ++i) {
    const Vec2 a = probe.point(-5, 5, -5, 5), q = probe.point(-5, 5, -5, 5), b = probe.point(-5, 5, -5, 5);
    EXPECT_LT(max_abs(pdel_solve_exact(*Ld, a, q, b) - pdel_step_newton(*Ld, a, q, b)), 1e-10);
  }
}

TEST(PdelSolveExact, ResidualBelowInnerToleranceForFuel) {
  const double h = 0.15;
  const auto Ld = fuel(h);
  Probe probe(33);
  const InnerNewton inner;
  for (int i = 0; i < 100; ++i) {
    const Vec2 q = probe.point(0, 6, 0, 5);
    const Vec2 a = q + h * probe.point(-1.5, 1.5, -1.5, 1.5), b = q + h * probe.point(-1.5, 1.5, -1.5, 1.5);
    const Vec2 x = pdel_solve_exact(*Ld, a, q, b, inner);
    const auto l = Ld->derivatives(a, x), r = Ld->derivatives(x, b);
    const double scale = norm(l.right()) + norm(r.left());
    EXPECT_LE(norm(del_residual(*Ld, a, x, b)), inner.tol * std::max(1.0, scale));
  }
}

TEST(PdelStepNewton, ReducesResidualInsideBasin) {
  const double h = 0.15;
  const auto Ld = fuel(h);
  Probe probe(34);
  for (int i = 0; i < 100; ++i) {
    const Vec2 q = probe.point(0, 6, 0, 5);
    const Vec2 a = q + h * probe.point(-1, 1, -1, 1), b = q + h * probe.point(-1, 1, -1, 1);
    const Vec2 exact = pdel_solve_exact(*Ld, a, q, b);
    const Vec2 start = exact + 0.05 * h * probe.point(-1, 1, -1, 1);
    const double before = norm(del_residual(*Ld, a, start, b));
    const double after = norm(del_residual(*Ld, a, pdel_step_newton(*Ld, a, start, b), b));
    EXPECT_LE(after, 0.5 * before);
  }
}

TEST(DelocStepNewton, ZeroResidualIsFixedPoint) {
  const double h = 0.5;
  const auto Ld = spline_energy(h);
  const Vec2 v = vec2(1, 2), q = vec2(0.5, 1);
  const auto s = tq_state(q, v);
  const auto [qn, vn] = deloc_step_newton(*Ld, tq_state(q - h * v, v), s, tq_state(q + h * v, v));
  EXPECT_TRUE(bitwise_equal(qn, q));
  EXPECT_TRUE(bitwise_equal(vn, v));
}

TEST(DelocStepNewton, QuadraticLagrangianLandsOnExactSolution) {
  const auto Ld = spline_energy(0.3);
  Probe probe(35);
  for (int i = 0; i < 30; ++i) {
    const auto s0 = tq_state(probe.point(-2, 2, -2, 2), probe.point(-2, 2, -2, 2));
    const auto s1 = tq_state(probe.point(-2, 2, -2, 2), probe.point(-2, 2, -2, 2));
    const auto s2 = tq_state(probe.point(-2, 2, -2, 2), probe.point(-2, 2, -2, 2));
    const auto [q, v] = deloc_step_newton(*Ld, s0, s1, s2);
    const auto exact = solve_local_exact<4>(*Ld, s0, s1, s2, InnerNewton{});
    EXPECT_LT(max_abs(tq_state(q, v) - exact), 1e-10 * std::max(1.0, max_abs(exact)));
    const auto [rq, rv] = deloc_residual(*Ld, s0, tq_state(q, v), s2);
    EXPECT_LT(max_abs(concat(rq, rv)), 1e-9);
  }
}

TEST(DelocStepNewton, BlockMatrixMatchesFiniteDifferences) {
  const auto Ld = tv(0.25);
  Probe probe(36);
  for (int i = 0; i < 100; ++i) {
    const Vec2 q = probe.point(0, 6, 0, 5);
    const auto s0 = tq_state(q - 0.25 * probe.point(-1, 1, -1, 1), probe.point(-1, 1, -1, 1));
    const auto s1 = tq_state(q, probe.point(-1, 1, -1, 1));
    const auto s2 = tq_state(q + 0.25 * probe.point(-1, 1, -1, 1), probe.point(-1, 1, -1, 1));
    const auto sys = detail::local_system(Ld->derivatives(s0, s1), Ld->derivatives(s1, s2));
    const Matrix<4, 4> fd = testing::fd_jacobian<4, 4>(
        [&](const Vector<4>& s) {
          const auto [rq, rv] = deloc_residual(*Ld, s0, s, s2);
          return concat(rq, rv);
        },
        s1);
    EXPECT_LT(rel_error(sys.jacobian, fd, 1e-3), 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Sweeps.

TEST(Sweep, JacobiMidpointAveraging) {
  const auto Ld = free_particle(1.0);
  const auto out = sweep<2>(make_q({vec2(0, 0), vec2(1, 0), vec2(4, 0), vec2(6, 0)}, 1.0), Ld, SweepConfig{});
  EXPECT_DOUBLE_EQ(out.states[1].x(), 2.0);
  EXPECT_DOUBLE_EQ(out.states[2].x(), 3.5);
  EXPECT_TRUE(bitwise_equal(out.states[0], vec2(0, 0)));
  EXPECT_TRUE(bitwise_equal(out.states[3], vec2(6, 0)));
}

TEST(Sweep, ExactSolutionIsBitwiseFixedPoint) {
  // Dyadic samples: the residual is exactly zero in floating point.
  std::vector<Vec2> pts;
  for (int k = 0; k <= 8; ++k) pts.push_back(vec2(0.5 * k, -0.25 * k));
  const auto traj = make_q(pts, 0.125);
  for (UpdateRule rule : {UpdateRule::JacobiNewton, UpdateRule::ExactParallel}) {
    SweepConfig cfg;
    cfg.rule = rule;
    EXPECT_TRUE(bitwise_equal(sweep<2>(traj, free_particle(0.125), cfg), traj));
  }
}

TEST(Sweep, OrderIndependence) {
  const double h = 0.15;
  const auto Ld = fuel(h);
  const auto traj = wiggly(vec2(0, 0), vec2(6, 5), 40, h, 0.3, 1);
  const auto out = sweep<2>(traj, Ld, SweepConfig{});
  std::vector<std::size_t> order(39);
  std::iota(order.begin(), order.end(), 1);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    auto manual = traj;
    for (std::size_t k : order)
      manual.states[k] = pdel_step_newton(*Ld, traj.states[k - 1], traj.states[k], traj.states[k + 1]);
    EXPECT_TRUE(bitwise_equal(manual, out));
  }
}

TEST(Sweep, OrderIndependenceWithKnots) {
  auto p = build_fig4_problem(120);
  const auto Ld = make_discrete_tq(p);
  const auto traj = initial_guess<4>(p);
  const KnotSet knots = p.knot_set();
  const auto out = sweep<4>(traj, Ld, SweepConfig{}, knots);
  auto manual = traj;
  for (std::size_t k = 119; k >= 1; --k) {
    const bool knot = k == 40 || k == 80;
    const auto sys = detail::local_system(Ld->derivatives(traj.states[k - 1], traj.states[k]),
                                          Ld->derivatives(traj.states[k], traj.states[k + 1]));
    manual.states[k] = traj.states[k] + detail::newton_increment(sys, knot, k);
  }
  EXPECT_TRUE(bitwise_equal(manual, out));
}

TEST(Sweep, ParallelWidthDoesNotChangeOutput) {
  const double h = 0.15;
  const auto traj = wiggly(vec2(0, 0), vec2(6, 5), 200, h, 0.5, 2);
  auto p = build_fig4_problem(120);
  const auto tq = initial_guess<4>(p);
  for (UpdateRule rule : {UpdateRule::JacobiNewton, UpdateRule::ExactParallel}) {
    SweepConfig cfg;
    cfg.rule = rule;
    cfg.damping = 0.05;
    Sweeper<2> ref(fuel(h), cfg);
    Sweeper<4> ref_tq(make_discrete_tq(p), cfg, p.knot_set());
    auto a = traj;
    auto a_tq = tq;
    std::vector<TrajectoryQ> ra;
    std::vector<TrajectoryTQ> ra_tq;
    for (int i = 0; i < 5; ++i) {
      a = ref.sweep(a).next;
      a_tq = ref_tq.sweep(a_tq).next;
      ra.push_back(a);
      ra_tq.push_back(a_tq);
    }
    for (std::size_t width : {2u, 3u, 8u}) {
      cfg.parallel_width = width;
      Sweeper<2> s(fuel(h), cfg);
      Sweeper<4> s_tq(make_discrete_tq(p), cfg, p.knot_set());
      auto b = traj;
      auto b_tq = tq;
      for (int i = 0; i < 5; ++i) {
        const auto o = s.sweep(b);
        b = o.next;
        b_tq = s_tq.sweep(b_tq).next;
        EXPECT_TRUE(bitwise_equal(b, ra[i])) << "width " << width;
        EXPECT_TRUE(bitwise_equal(b_tq, ra_tq[i])) << "width " << width;
      }
    }
  }
}

TEST(Sweep, BoundaryAndKnotPreservation) {
  auto p = build_fig4_problem(120);
  auto traj = initial_guess<4>(p);
  const auto first = traj.states.front(), last = traj.states.back();
  SweepConfig cfg;
  cfg.damping = 0.05;
  Sweeper<4> s(make_discrete_tq(p), cfg, p.knot_set());
  for (int i = 0; i < 200; ++i) {
    traj = s.sweep(traj).next;
    ASSERT_EQ(std::memcmp(&traj.states.front(), &first, sizeof first), 0);
    ASSERT_EQ(std::memcmp(&traj.states.back(), &last, sizeof last), 0);
    ASSERT_TRUE(bitwise_equal(traj.position(40), vec2(1, 3)));
    ASSERT_TRUE(bitwise_equal(traj.position(80), vec2(5, 2)));
  }
}

TEST(Sweep, KnotVelocityResidualDecreases) {
  auto p = build_fig4_problem(120);
  const auto Ld = make_discrete_tq(p);
  const KnotSet knots = p.knot_set();
  const auto traj = initial_guess<4>(p);
  // Update the knot velocity alone, holding the neighbours fixed.
  for (const auto& k : knots) {
    auto next = traj;
    const auto sys = detail::local_system(Ld->derivatives(traj.states[k.index - 1], traj.states[k.index]),
                                          Ld->derivatives(traj.states[k.index], traj.states[k.index + 1]));
    next.states[k.index] = traj.states[k.index] + detail::newton_increment(sys, true, k.index);
    const auto before = residual_norms(*Ld, traj, knots)[k.index];
    const auto after = residual_norms(*Ld, next, knots)[k.index];
    EXPECT_TRUE(bitwise_equal(next.position(k.index), k.position));
    EXPECT_LT(after, before);
  }
  // The exact rule leaves knot positions alone too.
  SweepConfig cfg;
  cfg.rule = UpdateRule::ExactParallel;
  const auto out = sweep<4>(traj, Ld, cfg, knots);
  for (const auto& k : knots) EXPECT_TRUE(bitwise_equal(out.position(k.index), k.position));
}

TEST(Sweep, DampingScalesTheIncrement) {
  const double h = 0.15;
  const auto Ld = fuel(h);
  const auto traj = wiggly(vec2(0, 0), vec2(6, 5), 30, h, 0.4, 3);
  SweepConfig undamped;
  const auto plain = sweep<2>(traj, Ld, undamped);
  SweepConfig zero;
  zero.damping = 0.0;
  EXPECT_TRUE(bitwise_equal(sweep<2>(traj, Ld, zero), plain));
  for (std::size_t k = 1; k < 30; ++k) {
    const Vec2 step = pdel_step_newton(*Ld, traj.states[k - 1], traj.states[k], traj.states[k + 1]);
    EXPECT_TRUE(bitwise_equal(plain.states[k], step));
  }
  SweepConfig damped;
  damped.damping = 0.25;
  const auto out = sweep<2>(traj, Ld, damped);
  for (std::size_t k = 1; k < 30; ++k) {
    const Vec2 delta = plain.states[k] - traj.states[k];
    EXPECT_LT(max_abs(out.states[k] - (traj.states[k] + 0.75 * delta)), 1e-14);
  }
}

TEST(Sweep, ResidualNormsReportTheInput) {
  const double h = 0.15;
  const auto Ld = fuel(h);
  const auto traj = wiggly(vec2(0, 0), vec2(6, 5), 30, h, 0.4, 4);
  Sweeper<2> s(Ld, SweepConfig{});
  const auto out = s.sweep(traj);
  const auto norms = residual_norms(*Ld, traj);
  ASSERT_EQ(out.residual_norms.size(), norms.size());
  for (std::size_t k = 0; k < norms.size(); ++k) EXPECT_EQ(out.residual_norms[k], norms[k]);
  EXPECT_EQ(out.max_residual, *std::max_element(norms.begin(), norms.end()));
  EXPECT_EQ(s.max_residual(traj), out.max_residual);
  EXPECT_EQ(norms.front(), 0.0);
  EXPECT_EQ(norms.back(), 0.0);
}

// ---------------------------------------------------------------------------
// Error paths.

// Discrete Lagrangian with prescribed segment derivatives.
class StubLagrangian final : public DiscreteLagrangianQ {
 public:
  using Fn = std::function<SegmentDerivatives<2>(const Vec2&, const Vec2&)>;
  explicit StubLagrangian(Fn fn) : fn_(std::move(fn)) {}
  double value(const Vec2&, const Vec2&) const override { return 0.0; }
  SegmentDerivatives<2> derivatives(const Vec2& a, const Vec2& b) const override { return fn_(a, b); }
  double step() const override { return 1.0; }
  std::string name() const override { return "stub"; }

 private:
  Fn fn_;
};

TEST(SweepErrors, SingularJacobianNamesTheIndex) {
  // Zero Hessian except on segments touching index 0.
  auto Ld = std::make_shared<StubLagrangian>([](const Vec2& a, const Vec2&) {
    SegmentDerivatives<2> d;
    d.grad[2] = 1.0;
    if (a.x() < 0.5) d.hess = Matrix<4, 4>::identity();
    return d;
  });
  const auto traj = make_q({vec2(0, 0), vec2(1, 0), vec2(2, 0), vec2(3, 0)}, 1.0);
  try {
    sweep<2>(traj, Ld, SweepConfig{});
    FAIL();
  } catch (const SingularJacobian& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(SweepErrors, InnerNoConvergence) {
  // Constant residual: no step can reduce it.
  auto Ld = std::make_shared<StubLagrangian>([](const Vec2&, const Vec2&) {
    SegmentDerivatives<2> d;
    d.grad[0] = d.grad[2] = 1.0;
    d.hess = Matrix<4, 4>::identity();
    return d;
  });
  SweepConfig cfg;
  cfg.rule = UpdateRule::ExactParallel;
  const auto traj = make_q({vec2(0, 0), vec2(1, 0), vec2(2, 0)}, 1.0);
  try {
    sweep<2>(traj, Ld, cfg);
    FAIL();
  } catch (const InnerNoConvergence& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  // Too few inner iterations on a genuine problem.
  SweepConfig short_cfg;
  short_cfg.rule = UpdateRule::ExactParallel;
  short_cfg.inner.max_iter = 1;
  EXPECT_THROW(sweep<2>(wiggly(vec2(0, 0), vec2(6, 5), 10, 0.15, 2.0, 5), fuel(0.15), short_cfg), InnerNoConvergence);
}

TEST(SolveErrors, NonFiniteStateStopsTheIteration) {
  auto Ld = std::make_shared<StubLagrangian>([](const Vec2&, const Vec2&) {
    SegmentDerivatives<2> d;
    d.grad[0] = 1e300;
    d.hess = 1e-300 * Matrix<4, 4>::identity();
    return d;
  });
  try {
    solve<2>(Ld, make_q({vec2(0, 0), vec2(1, 0), vec2(2, 0)}, 1.0), SweepConfig{});
    FAIL();
  } catch (const NonFiniteState& e) {
    EXPECT_EQ(e.iteration(), 1u);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(SweepErrors, InvalidConfigurationAndKnots) {
  SweepConfig cfg;
  cfg.damping = 1.0;
  EXPECT_THROW(Sweeper<2>(fuel(0.1), cfg), InvalidArgument);
  cfg = {};
  cfg.tol_factor = 0.0;
  EXPECT_THROW(Sweeper<2>(fuel(0.1), cfg), InvalidArgument);
  cfg = {};
  cfg.parallel_width = 0;
  EXPECT_THROW(Sweeper<2>(fuel(0.1), cfg), InvalidArgument);
  EXPECT_THROW(Sweeper<2>(fuel(0.1), SweepConfig{}, KnotSet{{1, vec2(0, 0)}}), InvalidArgument);
  const auto guess = straight_line<4>(tq_state(vec2(0, 0), vec2(0, 0)), tq_state(vec2(1, 1), vec2(0, 0)), 4, 0.5);
  EXPECT_THROW(sweep<4>(guess, spline_energy(0.5), SweepConfig{}, KnotSet{{4, vec2(1, 1)}}), InconsistentWaypoints);
  EXPECT_THROW(sweep<4>(guess, spline_energy(0.5), SweepConfig{}, KnotSet{{2, vec2(1, 1)}, {2, vec2(1, 1)}}),
               InconsistentWaypoints);
  EXPECT_THROW(sweep<2>(make_q({vec2(0, 0), vec2(1, 0)}, 1.0), fuel(1.0), SweepConfig{}), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Solve.

TEST(Solve, FreeParticleMatchesTridiagonalOracle) {
  Probe probe(40);
  for (std::size_t n : {2u, 3u, 5u, 8u}) {
    const double h = 1.0 / static_cast<double>(n);
    const Vec2 a = probe.point(-5, 5, -5, 5), b = probe.point(-5, 5, -5, 5);
    auto guess = straight_line<2>(a, b, n, h);
    for (std::size_t k = 1; k < n; ++k) guess.states[k] = guess.states[k] + probe.point(-1, 1, -1, 1);
    SweepConfig cfg;
    cfg.tol_factor = 1e-10;
    const auto res = solve<2>(free_particle(h), guess, cfg);
    ASSERT_TRUE(res.report.converged);
    // (2 q_k - q_{k-1} - q_{k+1}) / h = 0 with q_0 = a, q_N = b.
    for (std::size_t c = 0; c < 2; ++c) {
      const std::size_t m = n - 1;
      std::vector<double> lo(m, -1.0 / h), di(m, 2.0 / h), up(m, -1.0 / h), rhs(m, 0.0);
      rhs.front() += a[c] / h;
      rhs.back() += b[c] / h;
      const auto x = testing::solve_tridiagonal(lo, di, up, rhs);
      for (std::size_t k = 1; k < n; ++k) EXPECT_NEAR(res.trajectory.states[k][c], x[k - 1], 1e-10);
    }
  }
}

TEST(Solve, ReportIsConsistent) {
  const double h = 0.1;
  const auto guess = wiggly(vec2(0, 0), vec2(1, 2), 10, h, 0.5, 6);
  std::vector<double> seen;
  const auto res = solve<2>(free_particle(h), guess, SweepConfig{}, {}, [&](std::size_t it, double r) {
    EXPECT_EQ(it, seen.size());
    seen.push_back(r);
  });
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.report.max_residual.size(), res.report.iterations + 1);
  EXPECT_EQ(res.report.wall_seconds.size(), res.report.max_residual.size());
  EXPECT_EQ(seen, res.report.max_residual);
  EXPECT_DOUBLE_EQ(res.report.tolerance, 1e-4 * h * h);
  EXPECT_LT(res.report.final_residual(), res.report.tolerance);
  EXPECT_TRUE(std::is_sorted(res.report.wall_seconds.begin(), res.report.wall_seconds.end()));
  // The returned trajectory is the one whose residual was reported last.
  EXPECT_EQ(Sweeper<2>(free_particle(h), SweepConfig{}).max_residual(res.trajectory), res.report.final_residual());
  // A converged trajectory barely moves under one more sweep.
  const auto again = sweep<2>(res.trajectory, free_particle(h), SweepConfig{});
  for (std::size_t k = 0; k < again.states.size(); ++k)
    EXPECT_LT(norm(again.states[k] - res.trajectory.states[k]), res.report.tolerance);
}

TEST(Solve, IterationCap) {
  const double h = 0.01;
  SweepConfig cfg;
  cfg.max_iterations = 3;
  const auto res = solve<2>(free_particle(h), wiggly(vec2(0, 0), vec2(1, 2), 100, h, 0.5, 7), cfg);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 3u);
  EXPECT_EQ(res.report.max_residual.size(), 4u);
}

TEST(Solve, ExactRuleReachesSameFuelSolution) {
  // Short horizon so both rules converge quickly.
  auto p = build_fig3_problem();
  p.horizon = 5.0;
  p.N = 20;
  SweepConfig newton, exact;
  exact.rule = UpdateRule::ExactParallel;
  const auto a = solve<2>(p, initial_guess<2>(p), newton);
  const auto b = solve<2>(p, initial_guess<2>(p), exact);
  ASSERT_TRUE(a.report.converged);
  ASSERT_TRUE(b.report.converged);
  for (std::size_t k = 0; k <= p.N; ++k) EXPECT_LT(norm(a.trajectory.states[k] - b.trajectory.states[k]), 1e-5);
}

// ---------------------------------------------------------------------------
// Refinement and guesses.

TEST(Refine, StraightLineStaysStraight) {
  const auto line = straight_line<2>(vec2(0, 0), vec2(4, 2), 4, 0.5);
  const auto fine = refine(line);
  EXPECT_EQ(fine.segments(), 8u);
  EXPECT_EQ(fine.h, 0.25);
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_TRUE(bitwise_equal(fine.states[k], vec2(0.5 * k, 0.25 * k)));
}

TEST(Refine, EndpointsPreservedBitwise) {
  auto p = build_fig4_problem(120);
  const auto traj = initial_guess<4>(p);
  const auto fine = refine(traj);
  EXPECT_EQ(fine.segments(), 240u);
  EXPECT_EQ(std::memcmp(&fine.states.front(), &traj.states.front(), sizeof(Vector<4>)), 0);
  EXPECT_EQ(std::memcmp(&fine.states.back(), &traj.states.back(), sizeof(Vector<4>)), 0);
  for (std::size_t k = 0; k <= 120; ++k)
    EXPECT_EQ(std::memcmp(&fine.states[2 * k], &traj.states[k], sizeof(Vector<4>)), 0);
}

TEST(Refine, FreeParticleSolutionStaysFixedPoint) {
  std::vector<Vec2> pts;
  for (int k = 0; k <= 4; ++k) pts.push_back(vec2(1.0 * k, 0.5 * k));
  const auto fine = refine(make_q(pts, 0.5));
  const auto norms = residual_norms(*free_particle(0.25), fine);
  for (double r : norms) EXPECT_EQ(r, 0.0);
  EXPECT_TRUE(bitwise_equal(sweep<2>(fine, free_particle(0.25), SweepConfig{}), fine));
}

TEST(Refine, HermiteMidpointsOfCubicAreExact) {
  // q(t) = t^3 - t, v = 3t^2 - 1 sampled at t = 0, 0.5, 1.
  auto q = [](double t) { return vec2(t * t * t - t, 2 * t); };
  auto v = [](double t) { return vec2(3 * t * t - 1, 2); };
  TrajectoryTQ traj;
  traj.h = 0.5;
  for (double t : {0.0, 0.5, 1.0}) traj.states.push_back(tq_state(q(t), v(t)));
  const auto fine = refine(traj);
  for (std::size_t k = 0; k <= 4; ++k) {
    const double t = 0.25 * k;
    EXPECT_LT(max_abs(fine.position(k) - q(t)), 1e-14);
    EXPECT_LT(max_abs(fine.velocity(k) - v(t)), 1e-14);
  }
}

TEST(Refine, KnotIndicesDouble) {
  const KnotSet coarse = build_fig4_problem(120).knot_set();
  const KnotSet fine = build_fig4_problem(240).knot_set();
  EXPECT_EQ(refine(coarse), fine);
  EXPECT_EQ(fine[0].index, 80u);
  EXPECT_EQ(fine[1].index, 160u);
}

TEST(Guess, StraightLineMidpoint) {
  const auto t = straight_line<2>(vec2(0, 0), vec2(6, 2), 2, 1.0);
  EXPECT_TRUE(bitwise_equal(t.states[1], vec2(3, 1)));
}

TEST(Guess, PiecewiseLinearReproducesWaypoints) {
  const KnotSet via = {{3, vec2(1.1, 3.3)}, {7, vec2(5.5, -2.2)}};
  const auto t = piecewise_linear<2>(vec2(0, 0), vec2(6, 2), via, 10, 0.1);
  for (const auto& w : via) EXPECT_TRUE(bitwise_equal(t.states[w.index], w.position));
  EXPECT_TRUE(bitwise_equal(t.states.front(), vec2(0, 0)));
  EXPECT_TRUE(bitwise_equal(t.states.back(), vec2(6, 2)));
  EXPECT_THROW(piecewise_linear<2>(vec2(0, 0), vec2(6, 2), KnotSet{{7, vec2(0, 0)}, {3, vec2(0, 0)}}, 10, 0.1),
               InconsistentWaypoints);
  EXPECT_THROW(piecewise_linear<2>(vec2(0, 0), vec2(6, 2), KnotSet{{10, vec2(0, 0)}}, 10, 0.1), InconsistentWaypoints);
}

TEST(Guess, PolylineAssignsIndicesByArcLength) {
  const auto t = polyline_guess<2>(vec2(0, 0), vec2(2, 0), {vec2(1, 0)}, 10, 0.1);
  EXPECT_TRUE(bitwise_equal(t.states[5], vec2(1, 0)));
}

TEST(Guess, CubicSplineEndpointsOnlyIsHermite) {
  const auto t = cubic_spline<4>(vec2(0, 0), vec2(0, 0), vec2(2, 4), vec2(0, 0), {}, 2, 1.0);
  EXPECT_LT(max_abs(t.position(1) - vec2(1, 2)), 1e-15);
  // Velocity of the clamped cubic at the middle: 1.5 (q1 - q0) / T.
  EXPECT_LT(max_abs(t.velocity(1) - vec2(1.5, 3)), 1e-15);
}

TEST(Guess, CubicSplineInterpolatesKnotsAndClampsEnds) {
  auto p = build_fig4_problem(120);
  const auto t = initial_guess<4>(p);
  EXPECT_TRUE(bitwise_equal(t.position(40), vec2(1, 3)));
  EXPECT_TRUE(bitwise_equal(t.position(80), vec2(5, 2)));
  EXPECT_EQ(t.velocity(0), vec2(0, 0));
  EXPECT_EQ(t.velocity(120), vec2(0, 0));
  // C^1 across the knots: one-sided difference quotients agree.
  for (std::size_t k : {40u, 80u}) {
    const Vec2 left = (1.0 / t.h) * (t.position(k) - t.position(k - 1));
    const Vec2 right = (1.0 / t.h) * (t.position(k + 1) - t.position(k));
    EXPECT_LT(max_abs(left - right), 0.05);
    EXPECT_LT(max_abs(0.5 * (left + right) - t.velocity(k)), 1e-3);
  }
}

TEST(Guess, CubicSplineMatchesIndependentSolve) {
  // Clamped spline through (0,0), (1,1), (3,0) with zero end slopes: the node
  // slope solves 2(h0+h1) m1 = 3(h1 s0 + h0 s1) with h0=1, h1=2; per
  // component (s0, s1) = (1, 1) for x and (1, -0.5) for y.
  const double m1 = 3.0 * (2.0 * 1.0 + 1.0 * -0.5) / (2.0 * 3.0);
  const auto t = cubic_spline<4>(vec2(0, 0), vec2(0, 0), vec2(3, 0), vec2(0, 0), KnotSet{{1, vec2(1, 1)}}, 3, 1.0);
  EXPECT_NEAR(t.velocity(1).y(), m1, 1e-14);
  EXPECT_NEAR(t.velocity(1).x(), 1.5, 1e-14);
}

}  // namespace
}  // namespace parvi
