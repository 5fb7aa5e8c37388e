#pragma once

// Counter-based sampling. Every random draw is a pure function of
// (seed, stream, index), so a Monte Carlo run gives the same samples no matter
// how the index range is sharded across threads.

#include "ltm/torus.hpp"

#include <cstdint>

namespace ltm {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : state_(splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) ^ splitmix64(stream + 0x14057b7ef767814fULL)) ^
               splitmix64(index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL)) {}

  constexpr std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform dyadic rational k / 2^bits on [0,1).
  Rational uniform_dyadic(unsigned bits = 30) {
    const std::uint64_t k = next_u64() >> (64 - bits);
    Rational r{BigInt(static_cast<unsigned long>(k)), BigInt(1) << bits};
    r.canonicalize();
    return r;
  }

  template <Scalar T>
  T uniform_scalar() {
    if constexpr (std::same_as<T, double>) return uniform();
    else return uniform_dyadic();
  }

 private:
  std::uint64_t state_;
};

/// Streams keep independent estimators from sharing samples under one seed.
enum class Stream : std::uint64_t {
  CellMeasure = 1,
  Neighborhood = 2,
  Correlation = 3,
  CorrelationNull = 4,
  CorrelationHS = 5,
  Lyapunov = 6,
  Markarian = 7,
  Isolation = 8,
  Tail = 9,
  Segments = 10,
  Properties = 11,
};

inline CounterRng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return CounterRng(seed, static_cast<std::uint64_t>(stream), index);
}

/// Uniform point of S = [q0,q1] x [p0,p1].
template <Scalar T>
Point<T> sample_S(CounterRng& rng, const LtmSpec<T>& spec) {
  T ux = rng.uniform_scalar<T>();
  T uy = rng.uniform_scalar<T>();
  return {spec.q0 + ux * (spec.q1 - spec.q0), spec.p0 + uy * (spec.p1 - spec.p0)};
}

/// Uniform point of R = P u Q with respect to Lebesgue measure.
template <Scalar T>
Point<T> sample_R(CounterRng& rng, const LtmSpec<T>& spec) {
  const T hp = spec.p1 - spec.p0;
  const T wq = spec.q1 - spec.q0;
  const T area_p = 2 * hp;
  const T area_q_only = wq * (2 - hp);
  for (;;) {
    T pick = rng.uniform_scalar<T>() * (area_p + area_q_only);
    T u = rng.uniform_scalar<T>();
    if (pick < area_p) {
      return {wrap(T(spec.q0 + pick / hp)), spec.p0 + u * hp};
    }
    // Q minus S: x in [q0,q1], y in the complementary arc of [p0,p1].
    T rest = (pick - area_p) / wq;  // in [0, 2 - hp)
    Point<T> z{spec.q0 + u * wq, wrap(T(spec.p1 + rest))};
    if (!in_P(z, spec)) return z;
  }
}

}  // namespace ltm
