#pragma once

#include "ltm/scalar.hpp"

#include <cmath>
#include <string>

namespace ltm {

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <class T>
struct Mat2 {
  T a{}, b{}, c{}, d{};

  static Mat2 identity() { return Mat2{T(1), T(0), T(0), T(1)}; }

  T det() const { return a * d - b * c; }
  T trace() const { return a + d; }

  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return Mat2{m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

template <class T>
struct Vec2 {
  T u{}, v{};
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

template <class T>
Vec2<T> operator*(const Mat2<T>& m, const Vec2<T>& w) {
  return {m.a * w.u + m.b * w.v, m.c * w.u + m.d * w.v};
}

template <class T>
T norm_sq(const Vec2<T>& w) {
  return w.u * w.u + w.v * w.v;
}

inline double norm(const Vec2<double>& w) { return std::hypot(w.u, w.v); }

template <class T>
Mat2<double> to_double_mat(const Mat2<T>& m) {
  if constexpr (std::same_as<T, double>) {
    return m;
  } else if constexpr (std::same_as<T, BigInt>) {
    return {m.a.get_d(), m.b.get_d(), m.c.get_d(), m.d.get_d()};
  } else {
    return {to_double(m.a), to_double(m.b), to_double(m.c), to_double(m.d)};
  }
}

template <class T>
std::string to_string(const Mat2<T>& m) {
  auto s = [](const T& v) {
    if constexpr (std::same_as<T, BigInt>) return v.get_str();
    else return ltm::to_string(v);
  };
  return "[[" + s(m.a) + ", " + s(m.b) + "], [" + s(m.c) + ", " + s(m.d) + "]]";
}

}  // namespace ltm
