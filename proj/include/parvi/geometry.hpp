#pragma once

// Wind (drift) vector fields on the plane with derivatives up to third
// order. Built-in fields are written once as generic functions and evaluated
// on BiTaylor to obtain their partials.

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "parvi/autodiff.hpp"
#include "parvi/linalg.hpp"

namespace parvi {

// All partials of a wind field at one point. Component index first:
// jacobian(i, j) = dW_i/dx_j, second[i](j, k) = d2W_i/dx_j dx_k,
// third[i][j](k, l) = d3W_i/dx_j dx_k dx_l.
struct WindDerivatives {
  Vec2 value;
  Mat2 jacobian;
  std::array<Mat2, 2> second;
  std::array<std::array<Mat2, 2>, 2> third;
};

class WindField {
 public:
  virtual ~WindField() = default;

  // Taylor expansion of (W_1, W_2) about p, truncated at total degree `degree` (0..3).
  virtual std::array<BiTaylor, 2> expand(const Vec2& p, int degree) const = 0;
  virtual Vec2 eval(const Vec2& p) const = 0;
  virtual std::string name() const = 0;

  Vec2 operator()(const Vec2& p) const { return eval(p); }

  // Fills the blocks up to `order`; higher blocks stay zero.
  WindDerivatives derivatives(const Vec2& p, int order) const {
    const auto t = expand(p, order);
    WindDerivatives d;
    for (int i = 0; i < 2; ++i) {
      d.value[i] = t[i].value();
      if (order >= 1) {
        d.jacobian(i, 0) = t[i].derivative(1, 0);
        d.jacobian(i, 1) = t[i].derivative(0, 1);
      }
      if (order >= 2) {
        d.second[i](0, 0) = t[i].derivative(2, 0);
        d.second[i](0, 1) = d.second[i](1, 0) = t[i].derivative(1, 1);
        d.second[i](1, 1) = t[i].derivative(0, 2);
      }
      if (order >= 3) {
        // third[i][j](k, l) depends only on how many of j, k, l are the y index.
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
              const int ny = j + k + l;
              d.third[i][j](k, l) = t[i].derivative(3 - ny, ny);
            }
      }
    }
    return d;
  }

  Mat2 jacobian(const Vec2& p) const { return derivatives(p, 1).jacobian; }
  std::array<Mat2, 2> second_partials(const Vec2& p) const { return derivatives(p, 2).second; }
  std::array<std::array<Mat2, 2>, 2> third_partials(const Vec2& p) const { return derivatives(p, 3).third; }
};

using WindPtr = std::shared_ptr<const WindField>;

// Adapts a generic callable `fn(x, y) -> std::array<S, 2>` (instantiated for
// double and BiTaylor) to a WindField.
template <class Fn>
class AnalyticWind final : public WindField {
 public:
  AnalyticWind(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  std::array<BiTaylor, 2> expand(const Vec2& p, int degree) const override {
    return fn_(BiTaylor::variable(0, p.x(), degree), BiTaylor::variable(1, p.y(), degree));
  }
  Vec2 eval(const Vec2& p) const override {
    const auto w = fn_(p.x(), p.y());
    return vec2(w[0], w[1]);
  }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

template <class Fn>
WindPtr make_wind(std::string name, Fn fn) {
  return std::make_shared<AnalyticWind<Fn>>(std::move(name), std::move(fn));
}

// Rotational bump centred at (a, b):
//   (-(y-b), x-a) / (3((x-a)^2 + (y-b)^2) + 1)
template <class S>
std::array<S, 2> rotational_bump(double a, double b, const S& x, const S& y) {
  const S dx = x - a;
  const S dy = y - b;
  const S inv = 1.0 / (3.0 * (dx * dx + dy * dy) + 1.0);
  return {-(dy * inv), dx * inv};
}

inline Vec2 rotational_bump(double a, double b, const Vec2& p) {
  const auto w = rotational_bump(a, b, p.x(), p.y());
  return vec2(w[0], w[1]);
}

// Four counter-rotating bumps scaled so that max |W| stays just below 1.
template <class S>
std::array<S, 2> zermelo_paper_field(const S& x, const S& y) {
  const auto r22 = rotational_bump(2.0, 2.0, x, y);
  const auto r44 = rotational_bump(4.0, 4.0, x, y);
  const auto r25 = rotational_bump(2.0, 5.0, x, y);
  const auto r51 = rotational_bump(5.0, 1.0, x, y);
  return {1.7 * (r51[0] - r22[0] - r44[0] - r25[0]), 1.7 * (r51[1] - r22[1] - r44[1] - r25[1])};
}

inline Vec2 zermelo_paper_field(const Vec2& p) {
  const auto w = zermelo_paper_field(p.x(), p.y());
  return vec2(w[0], w[1]);
}

template <class S>
std::array<S, 2> fuel_paper_field(const S& x, const S& y) {
  using std::cos;
  using std::sin;
  return {cos(2.0 * x - y - 6.0), (2.0 / 3.0) * sin(y) + x - 3.0};
}

inline Vec2 fuel_paper_field(const Vec2& p) {
  const auto w = fuel_paper_field(p.x(), p.y());
  return vec2(w[0], w[1]);
}

inline WindPtr zero_wind() {
  return make_wind("zero", [](const auto& x, const auto&) {
    auto z = x * 0.0;
    return std::array{z, z};
  });
}

inline WindPtr constant_wind(Vec2 w) {
  return make_wind("constant(" + std::to_string(w.x()) + "," + std::to_string(w.y()) + ")",
                   [w](const auto& x, const auto&) {
                     auto z = x * 0.0;
                     return std::array{z + w.x(), z + w.y()};
                   });
}

inline WindPtr zermelo_wind() {
  return make_wind("zermelo", [](const auto& x, const auto& y) { return zermelo_paper_field(x, y); });
}

inline WindPtr fuel_wind() {
  return make_wind("fuel", [](const auto& x, const auto& y) { return fuel_paper_field(x, y); });
}

}  // namespace parvi
