#pragma once

// Derivative cocycle of H_S: integer branch matrices, cone fields, Lyapunov
// exponents and the one-step expansion sum over cut unstable segments.

#include "ltm/manifold.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ltm {

using IntMat2 = Mat2<BigInt>;

/// DH_S on the canonical cell (j,k): [[1, 2j], [2k, 4jk+1]].
IntMat2 dH_S(std::int64_t j, std::int64_t k);

IntMat2 dF_pow(std::int64_t n);  // [[1, 2n], [0, 1]]
IntMat2 dG_pow(std::int64_t n);  // [[1, 0], [2n, 1]]
IntMat2 dH_unit();               // DG DF = [[1, 2], [2, 5]]

/// Central differences of the unwrapped H_S image. Throws BranchMismatch if
/// any probe point leaves z's branch.
Mat2<double> finite_diff_jacobian(const LinkedTwistMap<double>& map, const Point<double>& z, double h);

/// Exact Jacobian from three points z, z + h e1, z + h e2 of one affine branch.
Mat2<Rational> affine_fit_jacobian(const LinkedTwistMap<Rational>& map, const Point<Rational>& z,
                                   const Rational& h);

template <Scalar T>
bool in_unstable_cone(const Vec2<T>& w) {
  if (w.u == 0) return w.v != 0;
  return w.u > 0 ? w.v >= w.u : w.v <= w.u;
}

template <Scalar T>
bool in_stable_cone(const Vec2<T>& w) {
  if (w.v == 0) return w.u != 0;
  return w.v > 0 ? -w.u >= w.v : -w.u <= w.v;
}

enum class Direction { Forward, Backward };

template <Scalar T>
struct ConeStep {
  Point<T> image;
  Vec2<T> w;
  bool in_cone = false;   // image vector in the cone matching the direction
  bool expands = false;   // |w'|^2 > 5 |w|^2, exact for rationals
  double ratio = 0;       // |w'| / |w|
};

/// Forward: w' = DH_S(z) w, checked against the unstable cone. Backward:
/// w' = DH_S^{-1}(z) w using the inverse branch at z, checked against the
/// stable cone.
template <Scalar T>
ConeStep<T> cone_step(const LinkedTwistMap<T>& map, const Point<T>& z, const Vec2<T>& w, Direction dir);

/// Larger |eigenvalue| of a real 2x2 matrix with |trace| > 2 and det = 1.
double spectral_radius(const IntMat2& m);
double spectral_radius(const Mat2<double>& m);

/// Largest eigenvalue of DG^n DF DH: 12n + 5 + sqrt(144n^2 + 120n + 24).
double lambda_sigma2_branch(std::int64_t n);

/// The four large-n shapes of DH_S^2.
enum class Sigma2Form { GnFH, GFnH, HGnF, HGFn };

std::string form_name(Sigma2Form f);
IntMat2 sigma2_form_matrix(Sigma2Form f, std::int64_t n);

/// Which large-n form a Sigma_n itinerary realises, if any. Matches
/// (1,1 | 1,n), (1,1 | n,1), (1,n | 1,1), (n,1 | 1,1).
std::optional<Sigma2Form> classify_form(const Branch2Label& label);

/// Exact DH_S^2 of a canonical two-step itinerary.
IntMat2 dH_S2(const Branch2Label& label);

enum class LyapunovMap { H, HS };

/// Mean log growth of a unit unstable-cone vector per step (per H step for
/// LyapunovMap::H, per return for HS), renormalised every step.
double lyapunov_estimate(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t iterations,
                         LyapunovMap which);

struct EnsembleEstimate {
  double mean = 0, std_err = 0, min = 0, max = 0;
  std::uint64_t count = 0;
  std::uint64_t overflow = 0;
};

EnsembleEstimate lyapunov_ensemble(const LinkedTwistMap<double>& map, LyapunovMap which, std::uint64_t points,
                                   std::int64_t iterations, std::uint64_t seed);

namespace serial {
EnsembleEstimate lyapunov_ensemble(const LinkedTwistMap<double>& map, LyapunovMap which, std::uint64_t points,
                                   std::int64_t iterations, std::uint64_t seed);
}

enum class ExpansionMode { Eigenvalue, Directional };

struct ExpansionComponent {
  BranchKey key;
  double lambda = 0;
  double length = 0;
};

struct ExpansionReport {
  std::vector<ExpansionComponent> components;  // first keep_components pieces
  std::uint64_t n_components = 0;
  double sum_inv = 0;
  double delta = 0;  // segment length
  int power = 2;
  ExpansionMode mode = ExpansionMode::Eigenvalue;
};

struct OneStepOptions {
  int power = 2;
  ExpansionMode mode = ExpansionMode::Eigenvalue;
  double tol = 0;  // 0 picks a resolution relative to the segment length
  std::size_t keep_components = 100000;
  SplitOptions split;
};

ExpansionReport one_step_sum(const LinkedTwistMap<double>& map, const Segment<double>& seg,
                             const OneStepOptions& opt = {});

/// sum_{n=N}^{ceil((3+2 sqrt2) N)} 1/(24 n)
double one_step_partial_series(std::int64_t N);

/// Unstable direction at z obtained by pulling z back `steps` returns and
/// pushing the vector (0,1) forward along the orbit; returns v/u.
double transported_slope(const LinkedTwistMap<double>& map, const Point<double>& z, int steps);

}  // namespace ltm
