#pragma once

// Straight unstable segments under H_S (or H_S^2): cut at the singularity set,
// push each piece through its affine branch, repeat.

#include "ltm/partition.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ltm {

template <Scalar T>
struct Segment {
  Point<T> a;
  Point<T> b;
  int generation = 0;
  std::int64_t parent = -1;

  double length() const { return std::hypot(to_double(T(b.x - a.x)), to_double(T(b.y - a.y))); }
  double l_h() const { return std::abs(to_double(T(b.x - a.x))); }
  double l_v() const { return std::abs(to_double(T(b.y - a.y))); }
  Point<T> at(const T& t) const { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }
  Vec2<T> direction() const { return {b.x - a.x, b.y - a.y}; }
};

template <Scalar T>
struct CutResult {
  std::vector<Segment<T>> components;  // ordered by t
  std::vector<BranchKey> keys;         // branch of each component's interior
  std::vector<T> crossings;            // cut parameters in (0,1)
  std::vector<T> witnesses;            // a parameter inside each component carrying its key
  std::int64_t parent = -1;
  int samples = 0;                     // final sampling density along the segment
};

struct SplitOptions {
  int initial_samples = 64;
  int max_samples = 1 << 12;
};

/// Receives each piece of a cut segment in order: parameter range, branch key,
/// and a parameter known to carry that key.
template <Scalar T>
using PieceVisitor = std::function<void(const T& t0, const T& t1, const BranchKey& key, const T& witness)>;

/// Streaming form of split_at_sigma; returns the sampling density used.
template <Scalar T>
std::int64_t for_each_piece(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt, const PieceVisitor<T>& visit);

/// Cuts seg at sigma (power 1) or sigma^2 (power 2) by sampling branch keys
/// and bisecting every change down to tol (Euclidean length along seg).
template <Scalar T>
CutResult<T> split_at_sigma(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt = {});

/// split_at_sigma, then each piece through the affine branch of its interior.
/// The returned components are the images, in the same order.
template <Scalar T>
CutResult<T> evolve_segment(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt = {});

struct LengthStats {
  double l_v = 0, l_h = 0, length = 0;
};

template <Scalar T>
std::vector<LengthStats> length_stats(const CutResult<T>& cut);

struct Generation {
  int index = 0;
  std::vector<Segment<double>> components;
  std::vector<BranchKey> keys;  // branch the component is about to be mapped by (empty for the last)
  double total_length = 0;
  std::uint64_t pruned_count = 0;
  double pruned_length = 0;
  /// Worst ratio l_v(image)/l_v(piece) over pieces mapped out of this generation.
  double min_vertical_growth = 0;
  /// Pieces whose image failed l_v(image) > 2 l_v(piece).
  std::uint64_t doubling_violations = 0;
  std::uint64_t unresolved = 0;  // components dropped on ResolutionExceeded
};

struct IterateOptions {
  int power = 1;
  double tol = 1e-12;
  std::size_t budget = 4096;
  SplitOptions split;
};

/// Generation 0 is the seed. Above `budget` components, the shortest are
/// dropped and their total length recorded.
std::vector<Generation> iterate_segments(const LinkedTwistMap<double>& map, const Segment<double>& seed, int n_iter,
                                         const IterateOptions& opt = {});

/// Local stable segment of the fixed point c of H_S, clipped to c's branch
/// cell and the box |x - 1/2|, |y - 1/2| <= half_width.
Segment<double> local_stable_segment(const LinkedTwistMap<double>& map, double half_width = 0.1);

/// Stable eigen-slope of DH_S at c.
double stable_slope_at_c(const LinkedTwistMap<double>& map);

struct HeteroclinicResult {
  std::optional<int> first_generation;
  Point<double> point{};
  std::vector<bool> crossed;  // per generation 0..max_gen
  Segment<double> stable;
};

/// Crossings of already iterated generations with a stable segment.
HeteroclinicResult heteroclinic_scan(const std::vector<Generation>& gens, const Segment<double>& stable);

HeteroclinicResult heteroclinic_probe(const LinkedTwistMap<double>& map, const Segment<double>& seed, int max_gen,
                                      const IterateOptions& opt = {}, double half_width = 0.1);

/// Intersection of two closed segments, if any.
std::optional<Point<double>> segment_intersection(const Segment<double>& s, const Segment<double>& t);

/// Extends a line through z with the given direction both ways to the
/// boundary of z's H_S cell (bisection to tol).
Segment<double> cell_spanning_segment(const LinkedTwistMap<double>& map, const Point<double>& z,
                                      const Vec2<double>& dir, double tol = 1e-14);

/// Seed used for the manifold-growth experiments: a segment of slope 1+sqrt2
/// spanning one return cell inside [0.9,1] x [0,0.1].
Segment<double> figure5_seed(const LinkedTwistMap<double>& map);

/// True if some component joins y = p0 to y = p1 (within tol).
bool has_vertical_crossing(const std::vector<Segment<double>>& comps, const LtmSpec<double>& spec, double tol = 1e-9);

}  // namespace ltm
