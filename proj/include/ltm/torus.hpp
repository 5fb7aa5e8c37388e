#pragma once

// Torus geometry and the two twist maps.
//
// Coordinates live in [0,2) with opposite ends identified. P is the horizontal
// annulus S^1 x [p0,p1], Q the vertical annulus [q0,q1] x S^1, S = P n Q and
// R = P u Q. F shears P horizontally, G shears Q vertically; each is the
// identity off its own annulus.

#include "ltm/errors.hpp"
#include "ltm/scalar.hpp"

#include <compare>
#include <cstdint>
#include <string>

namespace ltm {

template <Scalar T>
struct Point {
  T x{};
  T y{};

  friend bool operator==(const Point&, const Point&) = default;
};

/// v mod 2 in [0,2). The closed circle [0,2] is canonicalised by sending 2 to 0.
inline double wrap(double v) {
  double r = v - 2.0 * std::floor(v * 0.5);
  if (r >= 2.0) r -= 2.0;  // v = -tiny rounds to exactly 2
  if (r < 0.0) r = 0.0;
  return r;
}
inline Rational wrap(const Rational& v) {
  Rational half = v / 2;
  return v - 2 * floor_of(half);
}

template <Scalar T>
struct LtmSpec {
  T p0 = from_ratio<T>(0);
  T p1 = from_ratio<T>(1);
  T q0 = from_ratio<T>(0);
  T q1 = from_ratio<T>(1);
  int wrap_f = 1;
  int wrap_g = 1;

  /// P = Q' = [0,1], unit wrapping numbers: F(x,y)=(x+2y,y), G(x,y)=(x,y+2x).
  static LtmSpec canonical() { return LtmSpec{}; }

  bool is_canonical() const {
    return p0 == 0 && p1 == 1 && q0 == 0 && q1 == 1 && wrap_f == 1 && wrap_g == 1;
  }

  void validate() const {
    if (!(p0 >= 0 && p0 < p1 && p1 <= 2)) throw ConfigError("need 0 <= p0 < p1 <= 2");
    if (!(q0 >= 0 && q0 < q1 && q1 <= 2)) throw ConfigError("need 0 <= q0 < q1 <= 2");
    if (wrap_f < 1 || wrap_g < 1) throw ConfigError("wrapping numbers must be positive");
  }

  /// Slope of the horizontal shear on P, 2*wrap_f/(p1-p0).
  T shear_f() const { return T(2 * wrap_f) / (p1 - p0); }
  T shear_g() const { return T(2 * wrap_g) / (q1 - q0); }

  template <Scalar U>
  LtmSpec<U> convert() const {
    if constexpr (std::same_as<T, U>) {
      return *this;
    } else if constexpr (std::same_as<U, double>) {
      return LtmSpec<U>{to_double(p0), to_double(p1), to_double(q0), to_double(q1), wrap_f, wrap_g};
    } else {
      return LtmSpec<U>{Rational(p0), Rational(p1), Rational(q0), Rational(q1), wrap_f, wrap_g};
    }
  }
};

template <Scalar T>
bool in_P(const Point<T>& z, const LtmSpec<T>& spec) {
  return z.y >= spec.p0 && z.y <= spec.p1;
}
template <Scalar T>
bool in_Q(const Point<T>& z, const LtmSpec<T>& spec) {
  return z.x >= spec.q0 && z.x <= spec.q1;
}
template <Scalar T>
bool in_S(const Point<T>& z, const LtmSpec<T>& spec) {
  return in_P(z, spec) && in_Q(z, spec);
}
template <Scalar T>
bool in_R(const Point<T>& z, const LtmSpec<T>& spec) {
  return in_P(z, spec) || in_Q(z, spec);
}

template <Scalar T>
Point<T> wrap(const Point<T>& z) {
  return {wrap(z.x), wrap(z.y)};
}

template <Scalar T>
std::string to_string(const Point<T>& z) {
  return "(" + to_string(z.x) + ", " + to_string(z.y) + ")";
}

}  // namespace ltm
