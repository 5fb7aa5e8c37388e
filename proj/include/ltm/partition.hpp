#pragma once

// Return-time cells S_n (and Sigma_n for H_S^2), the explicit singularity line
// families near the corners p = (1,0) and q = (0,1), boundary localisation by
// bisection, and Monte Carlo measures of cells and singularity neighbourhoods.

#include "ltm/twist_map.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ltm {

struct BranchLabel {
  std::int64_t j = 0, k = 0, n = 0;
  friend bool operator==(const BranchLabel&, const BranchLabel&) = default;
};

struct Branch2Label {
  std::int64_t j1 = 0, k1 = 0, j2 = 0, k2 = 0, n = 0;
  friend bool operator==(const Branch2Label&, const Branch2Label&) = default;
};

/// Identity of the affine piece of H_S^power containing a point: return times
/// plus lifts, so two points share a key iff the same affine formula maps them.
struct BranchKey {
  std::array<std::int64_t, 8> v{};
  int power = 1;
  friend bool operator==(const BranchKey&, const BranchKey&) = default;

  BranchLabel label() const { return {v[0], v[1], v[0] + v[1] - 1}; }
  Branch2Label label2() const {
    return {v[0], v[1], v[4], v[5], v[0] + v[1] + v[4] + v[5] - 3};
  }
  /// n of S_n (power 1) or Sigma_n (power 2).
  std::int64_t cell_index() const { return power == 1 ? label().n : label2().n; }
};

template <Scalar T>
BranchLabel classify_S(const LinkedTwistMap<T>& map, const Point<T>& z);

template <Scalar T>
Branch2Label classify_sigma2(const LinkedTwistMap<T>& map, const Point<T>& z);

/// power 1 -> H_S, power 2 -> H_S^2, power -1 -> H_S^{-1}.
template <Scalar T>
BranchKey branch_key(const LinkedTwistMap<T>& map, const Point<T>& z, int power);

/// Affine piece of H_S^power at z (power 1 or 2).
template <Scalar T>
AffineBranch<T> affine_branch(const LinkedTwistMap<T>& map, const Point<T>& z, int power);

enum class LineFamily { FLower, FUpper, GLower, GUpper };

std::string family_name(LineFamily f);

template <Scalar T>
struct SingularLine {
  Point<T> a;
  Point<T> b;
  LineFamily family = LineFamily::FLower;
  std::int64_t index = 2;
};

/// Singular lines of F_S for 2 <= n <= n_max. Lower lines run from
/// 2y = 1 - x to x = 1 along x + 2ny = 2; upper lines are their images under
/// the half-turn about (1/2,1/2).
template <Scalar T>
std::vector<SingularLine<T>> sigmaF_lines(std::int64_t n_max);

/// Singular lines of G_S: sigmaF_lines reflected through y = 1 - x.
template <Scalar T>
std::vector<SingularLine<T>> sigmaG_lines(std::int64_t n_max);

/// Reflection through x + y = 1.
template <Scalar T>
Point<T> reflect_tau(const Point<T>& z) {
  return {T(1) - z.y, T(1) - z.x};
}

/// Half-turn about c = (1/2,1/2); commutes with F and G.
template <Scalar T>
Point<T> half_turn(const Point<T>& z) {
  return {T(1) - z.x, T(1) - z.y};
}

/// Bisects [z0, z1] on the H_S branch key until the bracket is shorter than
/// tol. Throws NoCrossingFound when both ends carry the same key.
template <Scalar T>
Point<T> locate_boundary(const LinkedTwistMap<T>& map, const Point<T>& z0, const Point<T>& z1,
                         double tol);

/// Exact variant: bisect a few times, then snap to the unique candidate line
/// crossing the bracket, and check the labels on both sides.
Point<Rational> locate_boundary_exact(const LinkedTwistMap<Rational>& map, const Point<Rational>& z0,
                                      const Point<Rational>& z1,
                                      std::span<const SingularLine<Rational>> candidates);

struct MeasureEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;

  static MeasureEstimate from_hits(std::uint64_t hits, std::uint64_t samples);
};

/// Counts of H_S return-time labels over uniform samples of S.
struct CellHistogram {
  std::vector<std::uint64_t> counts;  // counts[n], 1 <= n <= n_max; counts[0] unused
  std::uint64_t beyond = 0;           // label > n_max
  std::uint64_t overflow = 0;         // ReturnTimeOverflow
  std::uint64_t samples = 0;

  std::int64_t n_max() const { return static_cast<std::int64_t>(counts.size()) - 1; }
  MeasureEstimate cell(std::int64_t n) const;
  /// mu_S{label > n}.
  MeasureEstimate tail(std::int64_t n) const;
  CellHistogram& merge(const CellHistogram& other);
};

CellHistogram cell_histogram(const LinkedTwistMap<double>& map, std::uint64_t samples, std::uint64_t seed,
                             std::int64_t n_max);

MeasureEstimate estimate_cell_measure(const LinkedTwistMap<double>& map, std::int64_t n, std::uint64_t samples,
                                      std::uint64_t seed);

MeasureEstimate tail_measure_H(const LinkedTwistMap<double>& map, std::int64_t n, std::uint64_t samples,
                               std::uint64_t seed);

/// Distance from z to the explicit corner families of sigma (valid within
/// `corner_radius` of p or q); +inf elsewhere.
double corner_sigma_distance(const Point<double>& z, double corner_radius = 0.1);

/// True when some point of sigma lies within eps of z: eight ray probes on the
/// branch key, plus explicit line distances near the corners.
bool near_sigma(const LinkedTwistMap<double>& map, const Point<double>& z, double eps);

MeasureEstimate neighborhood_measure(const LinkedTwistMap<double>& map, double eps, std::uint64_t samples,
                                     std::uint64_t seed);

namespace serial {

CellHistogram cell_histogram(const LinkedTwistMap<double>& map, std::uint64_t samples, std::uint64_t seed,
                             std::int64_t n_max);

MeasureEstimate neighborhood_measure(const LinkedTwistMap<double>& map, double eps, std::uint64_t samples,
                                     std::uint64_t seed);

}  // namespace serial

}  // namespace ltm
