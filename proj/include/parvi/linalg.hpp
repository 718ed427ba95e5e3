#pragma once

// Fixed-size vectors and matrices for the 2x2 / 4x4 / 8x8 systems the
// relaxation solver works with. Storage is plain std::array, row major.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "parvi/errors.hpp"

namespace parvi {

template <std::size_t N>
struct Vector {
  std::array<double, N> c{};

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }
  static constexpr std::size_t size() { return N; }

  constexpr double& x() requires(N >= 1) { return c[0]; }
  constexpr double& y() requires(N >= 2) { return c[1]; }
  constexpr double x() const requires(N >= 1) { return c[0]; }
  constexpr double y() const requires(N >= 2) { return c[1]; }

  friend constexpr bool operator==(const Vector&, const Vector&) = default;
};

// Points and velocities in the plane.
using Vec2 = Vector<2>;

constexpr Vec2 vec2(double x, double y) { return Vec2{{x, y}}; }

template <std::size_t N>
constexpr Vector<N> operator+(Vector<N> a, const Vector<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
constexpr Vector<N> operator-(Vector<N> a, const Vector<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}

template <std::size_t N>
constexpr Vector<N> operator-(Vector<N> a) {
  for (auto& v : a.c) v = -v;
  return a;
}

template <std::size_t N>
constexpr Vector<N> operator*(double s, Vector<N> a) {
  for (auto& v : a.c) v *= s;
  return a;
}

template <std::size_t N>
constexpr Vector<N>& operator+=(Vector<N>& a, const Vector<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
constexpr double dot(const Vector<N>& a, const Vector<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vector<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
double max_abs(const Vector<N>& a) {
  double m = 0.0;
  for (double v : a.c) m = std::max(m, std::abs(v));
  return m;
}

template <std::size_t N>
bool all_finite(const Vector<N>& a) {
  return std::all_of(a.c.begin(), a.c.end(), [](double v) { return std::isfinite(v); });
}

template <std::size_t Offset, std::size_t M, std::size_t N>
constexpr Vector<M> segment(const Vector<N>& a) {
  static_assert(Offset + M <= N);
  Vector<M> out;
  for (std::size_t i = 0; i < M; ++i) out[i] = a[Offset + i];
  return out;
}

template <std::size_t M, std::size_t N>
constexpr Vector<M + N> concat(const Vector<M>& a, const Vector<N>& b) {
  Vector<M + N> out;
  for (std::size_t i = 0; i < M; ++i) out[i] = a[i];
  for (std::size_t i = 0; i < N; ++i) out[M + i] = b[i];
  return out;
}

template <std::size_t R, std::size_t C>
struct Matrix {
  std::array<double, R * C> a{};

  constexpr double& operator()(std::size_t i, std::size_t j) { return a[i * C + j]; }
  constexpr double operator()(std::size_t i, std::size_t j) const { return a[i * C + j]; }

  static constexpr Matrix identity() requires(R == C) {
    Matrix m;
    for (std::size_t i = 0; i < R; ++i) m(i, i) = 1.0;
    return m;
  }

  friend constexpr bool operator==(const Matrix&, const Matrix&) = default;
};

using Mat2 = Matrix<2, 2>;

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator+(Matrix<R, C> a, const Matrix<R, C>& b) {
  for (std::size_t i = 0; i < R * C; ++i) a.a[i] += b.a[i];
  return a;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator-(Matrix<R, C> a, const Matrix<R, C>& b) {
  for (std::size_t i = 0; i < R * C; ++i) a.a[i] -= b.a[i];
  return a;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator*(double s, Matrix<R, C> a) {
  for (auto& v : a.a) v *= s;
  return a;
}

template <std::size_t R, std::size_t K, std::size_t C>
constexpr Matrix<R, C> operator*(const Matrix<R, K>& a, const Matrix<K, C>& b) {
  Matrix<R, C> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < C; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

template <std::size_t R, std::size_t C>
constexpr Vector<R> operator*(const Matrix<R, C>& a, const Vector<C>& x) {
  Vector<R> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[i] += a(i, j) * x[j];
  return out;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<C, R> transpose(const Matrix<R, C>& a) {
  Matrix<C, R> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out(j, i) = a(i, j);
  return out;
}

// Transpose-times-vector without materialising the transpose.
template <std::size_t R, std::size_t C>
constexpr Vector<C> transpose_times(const Matrix<R, C>& a, const Vector<R>& x) {
  Vector<C> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[j] += a(i, j) * x[i];
  return out;
}

template <std::size_t R0, std::size_t C0, std::size_t R, std::size_t C, std::size_t N, std::size_t M>
constexpr Matrix<R, C> block(const Matrix<N, M>& a) {
  static_assert(R0 + R <= N && C0 + C <= M);
  Matrix<R, C> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out(i, j) = a(R0 + i, C0 + j);
  return out;
}

template <std::size_t R, std::size_t C>
double max_abs(const Matrix<R, C>& m) {
  double s = 0.0;
  for (double v : m.a) s = std::max(s, std::abs(v));
  return s;
}

// Relative pivot threshold below which a dense solve reports singularity.
inline constexpr double kSingularPivotTolerance = 1e-12;

// Solves A x = b by Gaussian elimination with partial pivoting. Throws
// SingularMatrix when a pivot falls below kSingularPivotTolerance times the
// largest entry of A.
template <std::size_t N>
Vector<N> solve(Matrix<N, N> A, Vector<N> b) {
  const double scale = max_abs(A);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw SingularMatrix("matrix is zero or non-finite");
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
    if (std::abs(A(piv, col)) <= kSingularPivotTolerance * scale)
      throw SingularMatrix("pivot below tolerance in column " + std::to_string(col));
    if (piv != col) {
      for (std::size_t j = 0; j < N; ++j) std::swap(A(col, j), A(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = A(r, col) / A(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < N; ++j) A(r, j) -= f * A(col, j);
      b[r] -= f * b[col];
    }
  }
  Vector<N> x;
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < N; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x;
}

}  // namespace parvi
