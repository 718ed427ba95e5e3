#pragma once

// Two forward-mode differentiation types.
//
// BiTaylor: truncated Taylor polynomial in the two plane coordinates, up to
// total degree 3. Wind fields and wind expressions are evaluated on it to get
// value, Jacobian, second and third partials in one pass.
//
// Jet<N>: value, gradient and Hessian with respect to N independent inputs.
// Continuous Lagrangians are evaluated on it over (q, v) or (q, v, a).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace parvi {

class BiTaylor {
 public:
  static constexpr int kMaxDegree = 3;
  static constexpr int kSize = 10;

  BiTaylor() = default;
  BiTaylor(double value, int degree) : degree_(degree) { c_[0] = value; }

  // Independent coordinate: which = 0 for x, 1 for y.
  static BiTaylor variable(int which, double value, int degree) {
    BiTaylor t(value, degree);
    if (degree >= 1) t.c_[which == 0 ? 1 : 2] = 1.0;
    return t;
  }

  static constexpr int index(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }

  int degree() const { return degree_; }
  double value() const { return c_[0]; }
  double coeff(int i, int j) const { return c_[index(i, j)]; }
  double& coeff(int i, int j) { return c_[index(i, j)]; }

  // Partial derivative d^(i+j) / dx^i dy^j at the expansion point.
  double derivative(int i, int j) const {
    static constexpr double fact[] = {1.0, 1.0, 2.0, 6.0};
    return fact[i] * fact[j] * coeff(i, j);
  }

  BiTaylor& operator+=(const BiTaylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  BiTaylor& operator-=(const BiTaylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  BiTaylor& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend BiTaylor operator+(BiTaylor a, const BiTaylor& b) { return a += b; }
  friend BiTaylor operator-(BiTaylor a, const BiTaylor& b) { return a -= b; }
  friend BiTaylor operator-(BiTaylor a) { return a *= -1.0; }
  friend BiTaylor operator+(BiTaylor a, double s) { a.c_[0] += s; return a; }
  friend BiTaylor operator+(double s, BiTaylor a) { a.c_[0] += s; return a; }
  friend BiTaylor operator-(BiTaylor a, double s) { a.c_[0] -= s; return a; }
  friend BiTaylor operator-(double s, const BiTaylor& a) { return s + (-a); }
  friend BiTaylor operator*(BiTaylor a, double s) { return a *= s; }
  friend BiTaylor operator*(double s, BiTaylor a) { return a *= s; }
  friend BiTaylor operator/(BiTaylor a, double s) { return a *= 1.0 / s; }

  friend BiTaylor operator*(const BiTaylor& a, const BiTaylor& b) {
    const int deg = std::min(a.degree_, b.degree_);
    BiTaylor out(0.0, deg);
    for (const auto& t : products(deg)) out.c_[t.out] += a.c_[t.lhs] * b.c_[t.rhs];
    return out;
  }

  friend BiTaylor operator/(const BiTaylor& a, const BiTaylor& b) { return a * reciprocal(b); }
  friend BiTaylor operator/(double s, const BiTaylor& b) { return s * reciprocal(b); }

  // f(a) given f and its derivatives f^(n)(a0), n = 0..degree.
  static BiTaylor compose(const BiTaylor& a, const std::array<double, kMaxDegree + 1>& d) {
    static constexpr double inv_fact[] = {1.0, 1.0, 0.5, 1.0 / 6.0};
    BiTaylor da = a;
    da.c_[0] = 0.0;
    BiTaylor out(d[0], a.degree_);
    BiTaylor power = da;
    for (int n = 1; n <= a.degree_; ++n) {
      BiTaylor term = power;
      term *= d[n] * inv_fact[n];
      out += term;
      if (n < a.degree_) power = power * da;
    }
    return out;
  }

  friend BiTaylor reciprocal(const BiTaylor& a) {
    const double u = 1.0 / a.value();
    return compose(a, {u, -u * u, 2.0 * u * u * u, -6.0 * u * u * u * u});
  }
  friend BiTaylor sin(const BiTaylor& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return compose(a, {s, c, -s, -c});
  }
  friend BiTaylor cos(const BiTaylor& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return compose(a, {c, -s, -c, s});
  }
  friend BiTaylor tan(const BiTaylor& a) {
    const double t = std::tan(a.value());
    const double s2 = 1.0 + t * t;
    return compose(a, {t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t)});
  }
  friend BiTaylor exp(const BiTaylor& a) {
    const double e = std::exp(a.value());
    return compose(a, {e, e, e, e});
  }
  friend BiTaylor log(const BiTaylor& a) {
    const double u = 1.0 / a.value();
    return compose(a, {std::log(a.value()), u, -u * u, 2.0 * u * u * u});
  }
  friend BiTaylor sqrt(const BiTaylor& a) {
    const double s = std::sqrt(a.value());
    const double u = 1.0 / a.value();
    return compose(a, {s, 0.5 * s * u, -0.25 * s * u * u, 0.375 * s * u * u * u});
  }
  friend BiTaylor abs(const BiTaylor& a) {
    const double sg = a.value() < 0.0 ? -1.0 : 1.0;
    return compose(a, {std::abs(a.value()), sg, 0.0, 0.0});
  }
  // a^p for a constant exponent.
  friend BiTaylor pow(const BiTaylor& a, double p) {
    const double u = a.value();
    return compose(a, {std::pow(u, p), p * std::pow(u, p - 1.0), p * (p - 1.0) * std::pow(u, p - 2.0),
                       p * (p - 1.0) * (p - 2.0) * std::pow(u, p - 3.0)});
  }
  friend BiTaylor pow(const BiTaylor& a, const BiTaylor& b) { return exp(b * log(a)); }

 private:
  struct Term {
    int lhs, rhs, out;
  };

  static const std::vector<Term>& products(int deg) {
    static const std::array<std::vector<Term>, kMaxDegree + 1> tables = [] {
      std::array<std::vector<Term>, kMaxDegree + 1> t;
      for (int deg = 0; deg <= kMaxDegree; ++deg)
        for (int d1 = 0; d1 <= deg; ++d1)
          for (int j1 = 0; j1 <= d1; ++j1)
            for (int d2 = 0; d1 + d2 <= deg; ++d2)
              for (int j2 = 0; j2 <= d2; ++j2)
                t[deg].push_back({index(d1 - j1, j1), index(d2 - j2, j2), index(d1 + d2 - j1 - j2, j1 + j2)});
      return t;
    }();
    return tables[deg];
  }

  int degree_ = 0;
  std::array<double, kSize> c_{};
};

// Scalar helpers so generic field code can be instantiated with double.
inline double reciprocal(double a) { return 1.0 / a; }

template <std::size_t N>
struct Jet {
  double v = 0.0;
  std::array<double, N> g{};
  std::array<double, N * N> h{};

  Jet() = default;
  explicit Jet(double value) : v(value) {}

  static Jet variable(std::size_t i, double value) {
    Jet j(value);
    j.g[i] = 1.0;
    return j;
  }

  double hess(std::size_t i, std::size_t k) const { return h[i * N + k]; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) g[i] += o.g[i];
    for (std::size_t i = 0; i < N * N; ++i) h[i] += o.h[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) g[i] -= o.g[i];
    for (std::size_t i = 0; i < N * N; ++i) h[i] -= o.h[i];
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    for (auto& x : g) x *= s;
    for (auto& x : h) x *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator+(Jet a, double s) { a.v += s; return a; }
  friend Jet operator+(double s, Jet a) { a.v += s; return a; }
  friend Jet operator-(Jet a, double s) { a.v -= s; return a; }
  friend Jet operator-(double s, const Jet& a) { return s + (-a); }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out;
    out.v = a.v * b.v;
    for (std::size_t i = 0; i < N; ++i) out.g[i] = a.v * b.g[i] + b.v * a.g[i];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k)
        out.h[i * N + k] = a.v * b.h[i * N + k] + b.v * a.h[i * N + k] + a.g[i] * b.g[k] + b.g[i] * a.g[k];
    return out;
  }

  // f(a) given f(a0), f'(a0), f''(a0).
  friend Jet chain(const Jet& a, double f0, double f1, double f2) {
    Jet out;
    out.v = f0;
    for (std::size_t i = 0; i < N; ++i) out.g[i] = f1 * a.g[i];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) out.h[i * N + k] = f1 * a.h[i * N + k] + f2 * a.g[i] * a.g[k];
    return out;
  }

  friend Jet reciprocal(const Jet& a) {
    const double u = 1.0 / a.v;
    return chain(a, u, -u * u, 2.0 * u * u * u);
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

  friend Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
  }
  friend Jet square(const Jet& a) { return a * a; }
};

inline double square(double a) { return a * a; }

}  // namespace parvi
