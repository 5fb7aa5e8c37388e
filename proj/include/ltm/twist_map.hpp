#pragma once

// The linked-twist map H = G o F and its first-return maps to S.
//
// F_S and G_S are first returns of a circle rotation to an interval, so the
// return time has a closed form whenever the per-step displacement (or its
// complement) is no wider than the window. The closed form is always checked
// against its neighbours m-1 and m+1 before being accepted; plain iteration is
// kept as the reference path.

#include "ltm/errors.hpp"
#include "ltm/mat2.hpp"
#include "ltm/torus.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ltm {

inline constexpr std::int64_t kDefaultReturnCap = 10'000'000;

enum class ReturnMethod { FastSkip, Iterate };

template <Scalar T>
struct TwistReturn {
  T coord{};               // returned coordinate, inside the window
  std::int64_t steps = 0;  // m >= 1
  std::int64_t lift = 0;   // floor((u + m*shift)/2)
};

/// Affine piece z -> A z + offset of a return map (unwrapped coordinates).
template <Scalar T>
struct AffineBranch {
  Mat2<T> A;
  Point<T> offset;

  Point<T> apply(const Point<T>& z) const {
    return {A.a * z.x + A.b * z.y + offset.x, A.c * z.x + A.d * z.y + offset.y};
  }
};

template <Scalar T>
struct ReturnOutcome {
  Point<T> image;
  std::int64_t j = 0;  // F-steps
  std::int64_t k = 0;  // G-steps
  std::int64_t n = 0;  // H-steps, j + k - 1
  std::int64_t lift_f = 0;
  std::int64_t lift_g = 0;
  Mat2<T> deriv;
  Point<T> offset;

  AffineBranch<T> branch() const { return {deriv, offset}; }
};

enum class MapKind { F, G, H, HS };

template <Scalar T>
class LinkedTwistMap {
 public:
  explicit LinkedTwistMap(LtmSpec<T> spec = LtmSpec<T>::canonical(),
                          std::int64_t cap = kDefaultReturnCap)
      : spec_(std::move(spec)), cap_(cap) {
    spec_.validate();
    if (cap_ < 1) throw ConfigError("return cap must be >= 1");
    shear_f_ = spec_.shear_f();
    shear_g_ = spec_.shear_g();
  }

  const LtmSpec<T>& spec() const { return spec_; }
  std::int64_t cap() const { return cap_; }
  const T& shear_f() const { return shear_f_; }
  const T& shear_g() const { return shear_g_; }

  bool in_P(const Point<T>& z) const { return ltm::in_P(z, spec_); }
  bool in_Q(const Point<T>& z) const { return ltm::in_Q(z, spec_); }
  bool in_S(const Point<T>& z) const { return ltm::in_S(z, spec_); }
  bool in_R(const Point<T>& z) const { return ltm::in_R(z, spec_); }

  /// Horizontal displacement of one F step at height y.
  T shift_f(const T& y) const { return shear_f_ * (y - spec_.p0); }
  T shift_g(const T& x) const { return shear_g_ * (x - spec_.q0); }

  Point<T> apply_f(const Point<T>& z) const {
    if (!in_P(z)) return z;
    return {wrap(T(z.x + shift_f(z.y))), z.y};
  }
  Point<T> apply_g(const Point<T>& z) const {
    if (!in_Q(z)) return z;
    return {z.x, wrap(T(z.y + shift_g(z.x)))};
  }
  Point<T> apply_h(const Point<T>& z) const { return apply_g(apply_f(z)); }

  Point<T> apply_f_inv(const Point<T>& z) const {
    if (!in_P(z)) return z;
    return {wrap(T(z.x - shift_f(z.y))), z.y};
  }
  Point<T> apply_g_inv(const Point<T>& z) const {
    if (!in_Q(z)) return z;
    return {z.x, wrap(T(z.y - shift_g(z.x)))};
  }
  Point<T> apply_h_inv(const Point<T>& z) const { return apply_f_inv(apply_g_inv(z)); }

  /// Smallest m >= 1 with wrap(u + m*shift) in [lo, hi].
  TwistReturn<T> circle_return(const T& u, const T& shift, const T& lo, const T& hi,
                               ReturnMethod method) const {
    if (method == ReturnMethod::Iterate) return circle_return_iterate(u, shift, lo, hi);
    return circle_return_fast(u, shift, lo, hi);
  }

  /// Rtn(z; F, S).
  std::int64_t return_time_f(const Point<T>& z, ReturnMethod method = ReturnMethod::FastSkip) const {
    require_in_S(z, "return_time_f");
    return circle_return(z.x, shift_f(z.y), spec_.q0, spec_.q1, method).steps;
  }

  /// F_S(z) together with its return time and lift.
  std::pair<Point<T>, TwistReturn<T>> apply_f_s(const Point<T>& z,
                                                ReturnMethod method = ReturnMethod::FastSkip) const {
    require_in_S(z, "apply_f_s");
    auto r = circle_return(z.x, shift_f(z.y), spec_.q0, spec_.q1, method);
    return {Point<T>{r.coord, z.y}, r};
  }
  std::pair<Point<T>, TwistReturn<T>> apply_g_s(const Point<T>& z,
                                                ReturnMethod method = ReturnMethod::FastSkip) const {
    require_in_S(z, "apply_g_s");
    auto r = circle_return(z.y, shift_g(z.x), spec_.p0, spec_.p1, method);
    return {Point<T>{z.x, r.coord}, r};
  }

  /// H_S = G_S o F_S with branch data. Derivative is DG^k DF^j.
  ReturnOutcome<T> apply_h_s(const Point<T>& z, ReturnMethod method = ReturnMethod::FastSkip) const {
    require_in_S(z, "apply_h_s");
    const auto rf = circle_return(z.x, shift_f(z.y), spec_.q0, spec_.q1, method);
    const Point<T> mid{rf.coord, z.y};
    const auto rg = circle_return(mid.y, shift_g(mid.x), spec_.p0, spec_.p1, method);
    ReturnOutcome<T> out;
    out.image = {mid.x, rg.coord};
    out.j = rf.steps;
    out.k = rg.steps;
    out.n = rf.steps + rg.steps - 1;
    out.lift_f = rf.lift;
    out.lift_g = rg.lift;
    const T aj = shear_f_ * T(rf.steps);
    const T bk = shear_g_ * T(rg.steps);
    out.deriv = Mat2<T>{T(1), aj, bk, T(aj * bk + 1)};
    // x' = x + aj (y - p0) - 2 l1 ; y' = y + bk (x' - q0) - 2 l2
    const T off_x = -aj * spec_.p0 - T(2 * rf.lift);
    const T off_y = bk * off_x - bk * spec_.q0 - T(2 * rg.lift);
    out.offset = {off_x, off_y};
    return out;
  }

  /// H_S^{-1} = F_S^{-1} o G_S^{-1}; j, k count F^{-1} and G^{-1} steps.
  ReturnOutcome<T> apply_h_s_inv(const Point<T>& z, ReturnMethod method = ReturnMethod::FastSkip) const {
    require_in_S(z, "apply_h_s_inv");
    const auto rg = circle_return(z.y, T(-shift_g(z.x)), spec_.p0, spec_.p1, method);
    const Point<T> mid{z.x, rg.coord};
    const auto rf = circle_return(mid.x, T(-shift_f(mid.y)), spec_.q0, spec_.q1, method);
    ReturnOutcome<T> out;
    out.image = {rf.coord, mid.y};
    out.j = rf.steps;
    out.k = rg.steps;
    out.n = rf.steps + rg.steps - 1;
    out.lift_f = rf.lift;
    out.lift_g = rg.lift;
    const T aj = shear_f_ * T(rf.steps);
    const T bk = shear_g_ * T(rg.steps);
    out.deriv = Mat2<T>{T(aj * bk + 1), T(-aj), T(-bk), T(1)};
    // y1 = y - bk (x - q0) - 2 l2 ; x1 = x - aj (y1 - p0) - 2 l1
    const T off_y = bk * spec_.q0 - T(2 * rg.lift);
    const T off_x = -aj * off_y + aj * spec_.p0 - T(2 * rf.lift);
    out.offset = {off_x, off_y};
    return out;
  }

  /// Rtn(z; H, S) by literally iterating H. Reference path for tests.
  std::int64_t return_time_h_iterated(const Point<T>& z) const {
    Point<T> w = z;
    for (std::int64_t m = 1; m <= cap_; ++m) {
      w = apply_h(w);
      if (in_S(w)) return m;
    }
    throw ReturnTimeOverflow(cap_, "H iteration");
  }

  /// Steps m >= 1 until H^m(z) enters S, for any z in R, and H^m(z).
  std::pair<std::int64_t, Point<T>> next_visit(const Point<T>& z) const {
    if (in_S(z)) {
      auto o = apply_h_s(z);
      return {o.n, o.image};
    }
    if (in_P(z)) {
      // Drift under F in P\S until x enters [q0,q1], then G takes over.
      auto rf = circle_return(z.x, shift_f(z.y), spec_.q0, spec_.q1, ReturnMethod::FastSkip);
      Point<T> mid{rf.coord, z.y};
      auto rg = circle_return(mid.y, shift_g(mid.x), spec_.p0, spec_.p1, ReturnMethod::FastSkip);
      return {rf.steps + rg.steps - 1, Point<T>{mid.x, rg.coord}};
    }
    if (in_Q(z)) {
      auto rg = circle_return(z.y, shift_g(z.x), spec_.p0, spec_.p1, ReturnMethod::FastSkip);
      return {rg.steps, Point<T>{z.x, rg.coord}};
    }
    throw std::invalid_argument("next_visit: point outside R");
  }

  std::vector<Point<T>> orbit(const Point<T>& z, MapKind kind, std::int64_t steps) const {
    if (steps < 0) throw std::invalid_argument("orbit: steps must be >= 0");
    std::vector<Point<T>> out;
    out.reserve(static_cast<std::size_t>(steps));
    Point<T> w = z;
    for (std::int64_t i = 0; i < steps; ++i) {
      switch (kind) {
        case MapKind::F: w = apply_f(w); break;
        case MapKind::G: w = apply_g(w); break;
        case MapKind::H: w = apply_h(w); break;
        case MapKind::HS: w = apply_h_s(w).image; break;
      }
      out.push_back(w);
    }
    return out;
  }

 private:
  void require_in_S(const Point<T>& z, const char* where) const {
    if (!in_S(z)) throw std::invalid_argument(std::string(where) + ": point not in S");
  }

  static bool in_window(const T& c, const T& lo, const T& hi) { return c >= lo && c <= hi; }

  TwistReturn<T> evaluate(const T& u, const T& shift, std::int64_t m) const {
    T raw = u + T(m) * shift;
    T lift = floor_of(T(raw / 2));
    TwistReturn<T> r;
    r.coord = raw - 2 * lift;
    if constexpr (std::same_as<T, double>) {
      if (r.coord >= 2.0) {
        r.coord -= 2.0;
        lift += 1.0;
      }
    }
    r.steps = m;
    r.lift = to_int64(lift);
    return r;
  }

  TwistReturn<T> circle_return_iterate(const T& u, const T& shift, const T& lo, const T& hi) const {
    T c = u;
    std::int64_t lift = 0;
    for (std::int64_t m = 1; m <= cap_; ++m) {
      T raw = c + shift;
      T l = floor_of(T(raw / 2));
      c = raw - 2 * l;
      if constexpr (std::same_as<T, double>) {
        if (c >= 2.0) {
          c -= 2.0;
          l += 1.0;
        }
      }
      lift += to_int64(l);
      if (in_window(c, lo, hi)) return TwistReturn<T>{c, m, lift};
    }
    throw ReturnTimeOverflow(cap_, "circle iteration");
  }

  TwistReturn<T> circle_return_fast(const T& u, const T& shift, const T& lo, const T& hi) const {
    const T width = hi - lo;
    const T rel = wrap(T(u - lo));
    const T d = wrap(shift);
    const T two(2);

    T candidate;
    if (d == 0) {
      if (rel <= width) return evaluate(u, shift, 1);
      throw ReturnTimeOverflow(cap_, "rigid circle outside window");
    }
    const T first = wrap(T(rel + d));
    if (first <= width) {
      candidate = T(1);
    } else if (d <= width) {
      candidate = ceil_of(T((two - rel) / d));
    } else if (two - d <= width) {
      const T e = two - d;
      candidate = rel <= width ? ceil_of(T((rel + two - width) / e)) : ceil_of(T((rel - width) / e));
    } else {
      return circle_return_iterate(u, shift, lo, hi);
    }
    if (!(candidate <= T(cap_ + 1))) throw ReturnTimeOverflow(cap_, "closed-form return");
    std::int64_t m = to_int64(candidate);
    if (m < 1) m = 1;

    // Off-by-one guard around the closed form.
    for (int guard = 0; guard < 4 && m > 1; ++guard) {
      auto prev = evaluate(u, shift, m - 1);
      if (!in_window(prev.coord, lo, hi)) break;
      --m;
    }
    for (int guard = 0; guard < 4; ++guard) {
      auto here = evaluate(u, shift, m);
      if (in_window(here.coord, lo, hi)) {
        if (m > cap_) throw ReturnTimeOverflow(cap_, "closed-form return");
        return here;
      }
      ++m;
    }
    return circle_return_iterate(u, shift, lo, hi);
  }

  LtmSpec<T> spec_;
  std::int64_t cap_;
  T shear_f_{};
  T shear_g_{};
};

}  // namespace ltm
