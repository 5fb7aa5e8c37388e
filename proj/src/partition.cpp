#include "ltm/partition.hpp"

#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ltm {

template <Scalar T>
BranchLabel classify_S(const LinkedTwistMap<T>& map, const Point<T>& z) {
  const auto o = map.apply_h_s(z);
  return {o.j, o.k, o.n};
}

template <Scalar T>
Branch2Label classify_sigma2(const LinkedTwistMap<T>& map, const Point<T>& z) {
  const auto o1 = map.apply_h_s(z);
  const auto o2 = map.apply_h_s(o1.image);
  return {o1.j, o1.k, o2.j, o2.k, o1.j + o1.k + o2.j + o2.k - 3};
}

template <Scalar T>
BranchKey branch_key(const LinkedTwistMap<T>& map, const Point<T>& z, int power) {
  BranchKey key;
  key.power = power;
  if (power == -1) {
    const auto o = map.apply_h_s_inv(z);
    key.v = {o.j, o.k, o.lift_f, o.lift_g, 0, 0, 0, 0};
    return key;
  }
  const auto o1 = map.apply_h_s(z);
  key.v[0] = o1.j;
  key.v[1] = o1.k;
  key.v[2] = o1.lift_f;
  key.v[3] = o1.lift_g;
  if (power == 2) {
    const auto o2 = map.apply_h_s(o1.image);
    key.v[4] = o2.j;
    key.v[5] = o2.k;
    key.v[6] = o2.lift_f;
    key.v[7] = o2.lift_g;
  } else if (power != 1) {
    throw std::invalid_argument("branch_key: power must be 1, 2 or -1");
  }
  return key;
}

template <Scalar T>
AffineBranch<T> affine_branch(const LinkedTwistMap<T>& map, const Point<T>& z, int power) {
  const auto o1 = map.apply_h_s(z);
  if (power == 1) return o1.branch();
  if (power != 2) throw std::invalid_argument("affine_branch: power must be 1 or 2");
  const auto o2 = map.apply_h_s(o1.image);
  const Mat2<T>& A2 = o2.deriv;
  AffineBranch<T> out;
  out.A = A2 * o1.deriv;
  out.offset = {A2.a * o1.offset.x + A2.b * o1.offset.y + o2.offset.x,
                A2.c * o1.offset.x + A2.d * o1.offset.y + o2.offset.y};
  return out;
}

std::string family_name(LineFamily f) {
  switch (f) {
    case LineFamily::FLower: return "F-lower";
    case LineFamily::FUpper: return "F-upper";
    case LineFamily::GLower: return "G-lower";
    case LineFamily::GUpper: return "G-upper";
  }
  return "?";
}

template <Scalar T>
std::vector<SingularLine<T>> sigmaF_lines(std::int64_t n_max) {
  if (n_max < 2) throw std::invalid_argument("sigmaF_lines: n_max must be >= 2");
  std::vector<SingularLine<T>> out;
  out.reserve(static_cast<std::size_t>(2 * (n_max - 1)));
  for (std::int64_t n = 2; n <= n_max; ++n) {
    SingularLine<T> lower;
    lower.family = LineFamily::FLower;
    lower.index = n;
    lower.a = {from_ratio<T>(n - 2, n - 1), from_ratio<T>(1, 2 * (n - 1))};
    lower.b = {T(1), from_ratio<T>(1, 2 * n)};
    SingularLine<T> upper;
    upper.family = LineFamily::FUpper;
    upper.index = n;
    upper.a = half_turn(lower.a);
    upper.b = half_turn(lower.b);
    out.push_back(lower);
    out.push_back(upper);
  }
  return out;
}

template <Scalar T>
std::vector<SingularLine<T>> sigmaG_lines(std::int64_t n_max) {
  auto out = sigmaF_lines<T>(n_max);
  for (auto& line : out) {
    line.a = reflect_tau(line.a);
    line.b = reflect_tau(line.b);
    line.family = line.family == LineFamily::FLower ? LineFamily::GLower : LineFamily::GUpper;
  }
  return out;
}

namespace {

template <Scalar T>
Point<T> lerp(const Point<T>& a, const Point<T>& b, const T& t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

template <Scalar T>
double chord(const Point<T>& a, const Point<T>& b) {
  return std::max(std::abs(to_double(T(b.x - a.x))), std::abs(to_double(T(b.y - a.y))));
}

}  // namespace

template <Scalar T>
Point<T> locate_boundary(const LinkedTwistMap<T>& map, const Point<T>& z0, const Point<T>& z1, double tol) {
  auto k0 = branch_key(map, z0, 1);
  const auto k1 = branch_key(map, z1, 1);
  if (k0 == k1) throw NoCrossingFound("locate_boundary: both ends share one branch");
  Point<T> lo = z0, hi = z1;
  const T half = from_ratio<T>(1, 2);
  for (int it = 0; it < 4096 && chord(lo, hi) >= tol; ++it) {
    const Point<T> mid = lerp(lo, hi, half);
    if (branch_key(map, mid, 1) == k0) lo = mid;
    else hi = mid;
    if constexpr (std::same_as<T, double>) {
      if (mid == lo && mid == hi) break;
    }
  }
  return lerp(lo, hi, half);
}

Point<Rational> locate_boundary_exact(const LinkedTwistMap<Rational>& map, const Point<Rational>& z0,
                                      const Point<Rational>& z1,
                                      std::span<const SingularLine<Rational>> candidates) {
  const auto k0 = branch_key(map, z0, 1);
  const auto k1 = branch_key(map, z1, 1);
  if (k0 == k1) throw NoCrossingFound("locate_boundary_exact: both ends share one branch");

  // Narrow to a parameter bracket [t_lo, t_hi] first so that at most one
  // family member can cross it.
  Rational t_lo(0), t_hi(1);
  for (int it = 0; it < 24; ++it) {
    Rational t_mid = (t_lo + t_hi) / 2;
    if (branch_key(map, lerp(z0, z1, t_mid), 1) == k0) t_lo = t_mid;
    else t_hi = t_mid;
  }

  const Rational dx = z1.x - z0.x, dy = z1.y - z0.y;
  std::vector<Point<Rational>> hits;
  for (const auto& line : candidates) {
    const Rational nx = -(line.b.y - line.a.y), ny = line.b.x - line.a.x;
    const Rational denom = nx * dx + ny * dy;
    if (denom == 0) continue;
    const Rational t = (nx * (line.a.x - z0.x) + ny * (line.a.y - z0.y)) / denom;
    if (t < t_lo || t > t_hi) continue;
    const Point<Rational> p = lerp(z0, z1, t);
    // Must lie within the segment, not just on its supporting line.
    const Rational ex = line.b.x - line.a.x, ey = line.b.y - line.a.y;
    const Rational s = ((p.x - line.a.x) * ex + (p.y - line.a.y) * ey) / (ex * ex + ey * ey);
    if (s < 0 || s > 1) continue;
    if (std::find(hits.begin(), hits.end(), p) == hits.end()) hits.push_back(p);
  }
  if (hits.size() != 1) {
    throw NoCrossingFound("locate_boundary_exact: " + std::to_string(hits.size()) +
                          " candidate lines cross the bracket");
  }
  const auto kp = branch_key(map, hits.front(), 1);
  if (!(kp == k0) && !(kp == branch_key(map, lerp(z0, z1, t_hi), 1))) {
    throw BranchMismatch("locate_boundary_exact: snapped point belongs to neither side");
  }
  return hits.front();
}

MeasureEstimate MeasureEstimate::from_hits(std::uint64_t hits, std::uint64_t samples) {
  MeasureEstimate m;
  m.hits = hits;
  m.samples = samples;
  if (samples == 0) return m;
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  m.value = p;
  m.std_err = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return m;
}

MeasureEstimate CellHistogram::cell(std::int64_t n) const {
  if (n < 1 || n > n_max()) throw std::out_of_range("CellHistogram::cell: n outside histogram");
  return MeasureEstimate::from_hits(counts[static_cast<std::size_t>(n)], samples);
}

MeasureEstimate CellHistogram::tail(std::int64_t n) const {
  if (n < 0 || n > n_max()) throw std::out_of_range("CellHistogram::tail: n outside histogram");
  std::uint64_t hits = beyond + overflow;
  for (std::int64_t m = n + 1; m <= n_max(); ++m) hits += counts[static_cast<std::size_t>(m)];
  return MeasureEstimate::from_hits(hits, samples);
}

CellHistogram& CellHistogram::merge(const CellHistogram& other) {
  if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0);
  for (std::size_t i = 0; i < other.counts.size(); ++i) counts[i] += other.counts[i];
  beyond += other.beyond;
  overflow += other.overflow;
  samples += other.samples;
  return *this;
}

namespace {

void histogram_range(const LinkedTwistMap<double>& map, std::uint64_t seed, std::uint64_t begin, std::uint64_t end,
                     CellHistogram& h) {
  for (std::uint64_t i = begin; i < end; ++i) {
    auto rng = make_rng(seed, Stream::CellMeasure, i);
    const auto z = sample_S(rng, map.spec());
    ++h.samples;
    try {
      const auto n = classify_S(map, z).n;
      if (n <= h.n_max()) ++h.counts[static_cast<std::size_t>(n)];
      else ++h.beyond;
    } catch (const ReturnTimeOverflow&) {
      ++h.overflow;
    }
  }
}

CellHistogram empty_histogram(std::int64_t n_max) {
  if (n_max < 1) throw std::invalid_argument("cell histogram: n_max must be >= 1");
  CellHistogram h;
  h.counts.assign(static_cast<std::size_t>(n_max + 1), 0);
  return h;
}

}  // namespace

CellHistogram cell_histogram(const LinkedTwistMap<double>& map, std::uint64_t samples, std::uint64_t seed,
                             std::int64_t n_max) {
  const CellHistogram init = empty_histogram(n_max);
  return sharded_reduce(
      samples, init,
      [&](std::uint64_t b, std::uint64_t e) {
        CellHistogram h = init;
        histogram_range(map, seed, b, e, h);
        return h;
      },
      [](CellHistogram& acc, const CellHistogram& part) { acc.merge(part); });
}

MeasureEstimate estimate_cell_measure(const LinkedTwistMap<double>& map, std::int64_t n, std::uint64_t samples,
                                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate_cell_measure: n must be >= 1");
  return cell_histogram(map, samples, seed, n).cell(n);
}

MeasureEstimate tail_measure_H(const LinkedTwistMap<double>& map, std::int64_t n, std::uint64_t samples,
                               std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("tail_measure_H: n must be >= 1");
  return cell_histogram(map, samples, seed, n).tail(n);
}

double corner_sigma_distance(const Point<double>& z_in, double corner_radius) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Point<double> z = z_in;
  if (std::hypot(1.0 - z.x, z.y) >= corner_radius) {
    if (std::hypot(z.x, 1.0 - z.y) >= corner_radius) return inf;
    z = half_turn(z);
  }
  const double x = z.x, y = z.y, s = 1.0 - x;

  // L: x + 2y = 1 separates j = 1 from large j; L': 2x + 5y = 2 separates
  // k = 1 from large k.
  double best = std::min(std::abs(x + 2 * y - 1) / std::sqrt(5.0), std::abs(2 * x + 5 * y - 2) / std::sqrt(29.0));

  auto scan = [&](double n_star, auto&& dist) {
    const double base = std::floor(n_star);
    for (double n = base - 1; n <= base + 2; n += 1.0) {
      if (n >= 2) best = std::min(best, dist(n));
    }
  };
  if (y > s / 2 && y > 0) {
    // F-lower lines x + 2ny = 2.
    scan((2 - x) / (2 * y), [&](double n) { return std::abs(x + 2 * n * y - 2) / std::sqrt(1 + 4 * n * n); });
  } else if (5 * y < 2 * s && s - 2 * y > 0) {
    // F_S-preimages of the G-lower lines: 2kx + (4k+1)y = 2k - 1.
    scan((1 + y) / (2 * (s - 2 * y)), [&](double k) {
      const double c = 4 * k + 1;
      return std::abs(2 * k * x + c * y - 2 * k + 1) / std::hypot(2 * k, c);
    });
  }
  return best;
}

bool near_sigma(const LinkedTwistMap<double>& map, const Point<double>& z, double eps) {
  if (corner_sigma_distance(z) < eps) return true;
  const auto key = branch_key(map, z, 1);
  for (double radius : {eps, 0.5 * eps}) {
    for (int d = 0; d < 8; ++d) {
      const double th = d * std::numbers::pi / 4;
      const Point<double> w{z.x + radius * std::cos(th), z.y + radius * std::sin(th)};
      // Probes leaving S say nothing about sigma (the boundary of S is not part of it).
      if (!map.in_S(w)) continue;
      if (!(branch_key(map, w, 1) == key)) return true;
    }
  }
  return false;
}

namespace {

std::uint64_t neighborhood_hits(const LinkedTwistMap<double>& map, double eps, std::uint64_t seed,
                                std::uint64_t begin, std::uint64_t end) {
  std::uint64_t hits = 0;
  for (std::uint64_t i = begin; i < end; ++i) {
    auto rng = make_rng(seed, Stream::Neighborhood, i);
    const auto z = sample_S(rng, map.spec());
    try {
      if (near_sigma(map, z, eps)) ++hits;
    } catch (const ReturnTimeOverflow&) {
      ++hits;  // only reachable arbitrarily close to the corners
    }
  }
  return hits;
}

}  // namespace

MeasureEstimate neighborhood_measure(const LinkedTwistMap<double>& map, double eps, std::uint64_t samples,
                                     std::uint64_t seed) {
  if (!(eps > 0)) throw std::invalid_argument("neighborhood_measure: eps must be > 0");
  const auto hits = sharded_reduce(
      samples, std::uint64_t{0}, [&](std::uint64_t b, std::uint64_t e) { return neighborhood_hits(map, eps, seed, b, e); },
      [](std::uint64_t& acc, std::uint64_t part) { acc += part; });
  return MeasureEstimate::from_hits(hits, samples);
}

namespace serial {

CellHistogram cell_histogram(const LinkedTwistMap<double>& map, std::uint64_t samples, std::uint64_t seed,
                             std::int64_t n_max) {
  CellHistogram h = empty_histogram(n_max);
  histogram_range(map, seed, 0, samples, h);
  return h;
}

MeasureEstimate neighborhood_measure(const LinkedTwistMap<double>& map, double eps, std::uint64_t samples,
                                     std::uint64_t seed) {
  if (!(eps > 0)) throw std::invalid_argument("neighborhood_measure: eps must be > 0");
  return MeasureEstimate::from_hits(neighborhood_hits(map, eps, seed, 0, samples), samples);
}

}  // namespace serial

#define LTM_INSTANTIATE(T)                                                                              \
  template BranchLabel classify_S<T>(const LinkedTwistMap<T>&, const Point<T>&);                        \
  template Branch2Label classify_sigma2<T>(const LinkedTwistMap<T>&, const Point<T>&);                  \
  template BranchKey branch_key<T>(const LinkedTwistMap<T>&, const Point<T>&, int);                     \
  template AffineBranch<T> affine_branch<T>(const LinkedTwistMap<T>&, const Point<T>&, int);            \
  template std::vector<SingularLine<T>> sigmaF_lines<T>(std::int64_t);                                  \
  template std::vector<SingularLine<T>> sigmaG_lines<T>(std::int64_t);                                  \
  template Point<T> locate_boundary<T>(const LinkedTwistMap<T>&, const Point<T>&, const Point<T>&, double);

LTM_INSTANTIATE(double)
LTM_INSTANTIATE(Rational)
#undef LTM_INSTANTIATE

}  // namespace ltm
