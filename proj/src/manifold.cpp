#include "ltm/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ltm {

namespace {

template <Scalar T>
Point<T> clamp_to_S(const Point<T>& z, const LtmSpec<T>& spec) {
  if constexpr (std::same_as<T, double>) {
    return {std::clamp(z.x, spec.q0, spec.q1), std::clamp(z.y, spec.p0, spec.p1)};
  } else {
    return z;
  }
}

template <Scalar T>
T param(std::int64_t i, std::int64_t n) {
  return from_ratio<T>(i, n);
}

template <Scalar T>
struct Splitter {
  const LinkedTwistMap<T>& map;
  const Segment<T>& seg;
  int power;
  double tol;
  double len;

  BranchKey key_at(const T& t) const { return branch_key(map, clamp_to_S(seg.at(t), map.spec()), power); }

  std::int64_t count_changes(std::int64_t samples) const {
    std::int64_t changes = 0;
    BranchKey prev = key_at(T(0));
    for (std::int64_t i = 1; i <= samples; ++i) {
      BranchKey k = key_at(param<T>(i, samples));
      if (!(k == prev)) ++changes;
      prev = k;
    }
    return changes;
  }

  struct Cut {
    T t;       // cut position
    T left;    // witness parameter just left of the cut
    T right;   // witness parameter just right of the cut
    BranchKey key_right;
  };

  // Bracket [tl, tr] with differing keys; appends the crossings inside, in order.
  void refine(const T& tl, const BranchKey& kl, const T& tr, const BranchKey& kr, std::vector<Cut>& out) const {
    const T tm = (tl + tr) / 2;
    const bool resolved = to_double(T(tr - tl)) * len < tol;
    bool degenerate = false;
    if constexpr (std::same_as<T, double>) degenerate = (tm == tl || tm == tr);
    if (resolved || degenerate) {
      const BranchKey km = key_at(tm);
      if (!(km == kl) && !(km == kr)) {
        throw ResolutionExceeded("split_at_sigma: distinct branches closer than tol = " + ltm::to_string(tol));
      }
      out.push_back({tm, tl, tr, kr});
      return;
    }
    const BranchKey km = key_at(tm);
    if (km == kl) {
      refine(tm, km, tr, kr, out);
    } else if (km == kr) {
      refine(tl, kl, tm, km, out);
    } else {
      refine(tl, kl, tm, km, out);
      refine(tm, km, tr, kr, out);
    }
  }
};

}  // namespace

template <Scalar T>
std::int64_t for_each_piece(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt, const PieceVisitor<T>& visit) {
  if (power != 1 && power != 2) throw std::invalid_argument("split_at_sigma: power must be 1 or 2");
  Splitter<T> sp{map, seg, power, tol, seg.length()};

  // Branch pieces are convex, so equal keys at both ends of a bracket rule
  // out a crossing inside it; the doubling only guards that assumption.
  std::int64_t samples = std::max(1, opt.initial_samples);
  std::int64_t changes = sp.count_changes(samples);
  while (samples < opt.max_samples) {
    const std::int64_t finer = sp.count_changes(2 * samples);
    samples *= 2;
    if (finer == changes) break;
    changes = finer;
  }

  std::vector<typename Splitter<T>::Cut> cuts;
  T start(0), witness(0);
  BranchKey key = sp.key_at(start);
  T t_prev(0);
  BranchKey k_prev = key;
  std::int64_t count = 0;
  auto flush = [&] {
    for (const auto& c : cuts) {
      visit(start, c.t, key, witness);
      ++count;
      start = c.t;
      witness = c.right;
      key = c.key_right;
    }
    cuts.clear();
  };
  for (std::int64_t i = 1; i <= samples; ++i) {
    const T t = param<T>(i, samples);
    const BranchKey k = sp.key_at(t);
    if (!(k == k_prev)) {
      sp.refine(t_prev, k_prev, t, k, cuts);
      flush();
    }
    t_prev = t;
    k_prev = k;
  }
  visit(start, T(1), key, witness);
  return samples;
}

template <Scalar T>
CutResult<T> split_at_sigma(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt) {
  CutResult<T> out;
  out.parent = seg.parent;
  bool first = true;
  const auto samples = for_each_piece<T>(map, seg, power, tol, opt,
                                         [&](const T& t0, const T& t1, const BranchKey& key, const T& witness) {
                                           if (!first) out.crossings.push_back(t0);
                                           first = false;
                                           out.components.push_back(
                                               Segment<T>{seg.at(t0), seg.at(t1), seg.generation, seg.parent});
                                           out.keys.push_back(key);
                                           out.witnesses.push_back(witness);
                                         });
  out.samples = static_cast<int>(samples);
  return out;
}

namespace {

template <Scalar T>
CutResult<T> map_pieces(const LinkedTwistMap<T>& map, const Segment<T>& seg, CutResult<T> cut, int power) {
  for (std::size_t i = 0; i < cut.components.size(); ++i) {
    const Point<T> w = clamp_to_S(seg.at(cut.witnesses[i]), map.spec());
    if (!(branch_key(map, w, power) == cut.keys[i])) {
      throw BranchMismatch("evolve_segment: witness does not carry its component's branch");
    }
    const AffineBranch<T> br = affine_branch(map, w, power);
    Segment<T>& piece = cut.components[i];
    const Vec2<T> d = br.A * piece.direction();
    Point<T> a = br.apply(piece.a);
    Point<T> b{a.x + d.u, a.y + d.v};
    piece = Segment<T>{clamp_to_S(a, map.spec()), clamp_to_S(b, map.spec()), seg.generation + 1, seg.parent};
  }
  return cut;
}

}  // namespace

template <Scalar T>
CutResult<T> evolve_segment(const LinkedTwistMap<T>& map, const Segment<T>& seg, int power, double tol,
                            const SplitOptions& opt) {
  return map_pieces(map, seg, split_at_sigma(map, seg, power, tol, opt), power);
}

template <Scalar T>
std::vector<LengthStats> length_stats(const CutResult<T>& cut) {
  std::vector<LengthStats> out;
  out.reserve(cut.components.size());
  for (const auto& c : cut.components) out.push_back({c.l_v(), c.l_h(), c.length()});
  return out;
}

std::vector<Generation> iterate_segments(const LinkedTwistMap<double>& map, const Segment<double>& seed, int n_iter,
                                         const IterateOptions& opt) {
  std::vector<Generation> gens;
  Generation g0;
  g0.components.push_back(seed);
  g0.components.back().generation = 0;
  g0.components.back().parent = -1;
  g0.total_length = seed.length();
  gens.push_back(std::move(g0));

  for (int g = 1; g <= n_iter; ++g) {
    Generation& prev = gens.back();
    const auto count = static_cast<std::int64_t>(prev.components.size());
    std::vector<CutResult<double>> pieces(static_cast<std::size_t>(count));
    std::vector<CutResult<double>> images(static_cast<std::size_t>(count));
    std::vector<char> failed(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < count; ++i) {
      auto seg = prev.components[static_cast<std::size_t>(i)];
      seg.parent = i;
      try {
        pieces[static_cast<std::size_t>(i)] = split_at_sigma(map, seg, opt.power, opt.tol, opt.split);
        images[static_cast<std::size_t>(i)] = map_pieces(map, seg, pieces[static_cast<std::size_t>(i)], opt.power);
      } catch (const ResolutionExceeded&) {
        failed[static_cast<std::size_t>(i)] = 1;
      } catch (const ReturnTimeOverflow&) {
        failed[static_cast<std::size_t>(i)] = 1;
      }
    }

    Generation next;
    next.index = g;
    double min_growth = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < count; ++i) {
      const auto si = static_cast<std::size_t>(i);
      if (failed[si]) {
        ++prev.unresolved;
        continue;
      }
      for (std::size_t c = 0; c < images[si].components.size(); ++c) {
        const double before = pieces[si].components[c].l_v();
        const double after = images[si].components[c].l_v();
        prev.keys.push_back(images[si].keys[c]);
        if (before > 0) {
          min_growth = std::min(min_growth, after / before);
          if (!(after > 2 * before)) ++prev.doubling_violations;
        }
        next.components.push_back(images[si].components[c]);
      }
    }
    prev.min_vertical_growth = min_growth;

    if (next.components.size() > opt.budget) {
      std::vector<std::size_t> idx(next.components.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
        return next.components[l].length() > next.components[r].length();
      });
      std::vector<char> keep(next.components.size(), 0);
      for (std::size_t i = 0; i < opt.budget; ++i) keep[idx[i]] = 1;
      std::vector<Segment<double>> kept;
      kept.reserve(opt.budget);
      for (std::size_t i = 0; i < next.components.size(); ++i) {
        if (keep[i]) {
          kept.push_back(next.components[i]);
        } else {
          ++next.pruned_count;
          next.pruned_length += next.components[i].length();
        }
      }
      next.components = std::move(kept);
    }
    for (const auto& c : next.components) next.total_length += c.length();
    gens.push_back(std::move(next));
  }
  return gens;
}

double stable_slope_at_c(const LinkedTwistMap<double>& map) {
  const Point<double> c{0.5 * (map.spec().q0 + map.spec().q1), 0.5 * (map.spec().p0 + map.spec().p1)};
  const Mat2<double> A = map.apply_h_s(c).deriv;
  const double tr = A.trace();
  const double disc = tr * tr - 4 * A.det();
  if (!(disc > 0)) throw NotHyperbolic("stable_slope_at_c: derivative at c is not hyperbolic");
  const double lam_s = 0.5 * (tr - std::sqrt(disc));
  // (A - lam I) v = 0 with v = (b, lam - a).
  return (lam_s - A.a) / A.b;
}

Segment<double> local_stable_segment(const LinkedTwistMap<double>& map, double half_width) {
  const auto& spec = map.spec();
  const Point<double> c{0.5 * (spec.q0 + spec.q1), 0.5 * (spec.p0 + spec.p1)};
  const double s = stable_slope_at_c(map);
  const Vec2<double> dir{1.0, s};
  const BranchKey kc = branch_key(map, c, 1);
  auto reach = [&](double sign) {
    double t_hi = half_width / std::max(std::abs(dir.u), std::abs(dir.v));
    auto at = [&](double t) { return Point<double>{c.x + sign * t * dir.u, c.y + sign * t * dir.v}; };
    auto inside = [&](double t) {
      const auto z = at(t);
      return map.in_S(z) && branch_key(map, z, 1) == kc;
    };
    if (inside(t_hi)) return at(t_hi);
    double t_lo = 0;
    while (t_hi - t_lo > 1e-15) {
      const double tm = 0.5 * (t_lo + t_hi);
      if (inside(tm)) t_lo = tm;
      else t_hi = tm;
    }
    return at(t_lo);
  };
  return Segment<double>{reach(-1.0), reach(1.0)};
}

std::optional<Point<double>> segment_intersection(const Segment<double>& s, const Segment<double>& t) {
  const double rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
  const double qx = t.b.x - t.a.x, qy = t.b.y - t.a.y;
  const double den = rx * qy - ry * qx;
  if (den == 0) return std::nullopt;
  const double wx = t.a.x - s.a.x, wy = t.a.y - s.a.y;
  const double u = (wx * qy - wy * qx) / den;
  const double v = (wx * ry - wy * rx) / den;
  if (u < 0 || u > 1 || v < 0 || v > 1) return std::nullopt;
  return Point<double>{s.a.x + u * rx, s.a.y + u * ry};
}

HeteroclinicResult heteroclinic_scan(const std::vector<Generation>& gens, const Segment<double>& stable) {
  HeteroclinicResult out;
  out.stable = stable;
  for (const auto& g : gens) {
    bool hit = false;
    for (const auto& c : g.components) {
      if (auto p = segment_intersection(c, stable)) {
        if (!out.first_generation) {
          out.first_generation = g.index;
          out.point = *p;
        }
        hit = true;
        break;
      }
    }
    out.crossed.push_back(hit);
  }
  return out;
}

HeteroclinicResult heteroclinic_probe(const LinkedTwistMap<double>& map, const Segment<double>& seed, int max_gen,
                                      const IterateOptions& opt, double half_width) {
  return heteroclinic_scan(iterate_segments(map, seed, max_gen, opt), local_stable_segment(map, half_width));
}

Segment<double> cell_spanning_segment(const LinkedTwistMap<double>& map, const Point<double>& z,
                                      const Vec2<double>& dir_in, double tol) {
  const double nrm = std::hypot(dir_in.u, dir_in.v);
  const Vec2<double> dir{dir_in.u / nrm, dir_in.v / nrm};
  const BranchKey kz = branch_key(map, z, 1);
  auto end = [&](double sign) {
    auto at = [&](double t) { return Point<double>{z.x + sign * t * dir.u, z.y + sign * t * dir.v}; };
    auto inside = [&](double t) {
      const auto w = at(t);
      return map.in_S(w) && branch_key(map, w, 1) == kz;
    };
    double t_lo = 0, t_hi = 1e-9;
    while (inside(t_hi)) {
      t_lo = t_hi;
      t_hi *= 2;
      if (t_hi > 4) break;
    }
    while (t_hi - t_lo > tol) {
      const double tm = 0.5 * (t_lo + t_hi);
      if (inside(tm)) t_lo = tm;
      else t_hi = tm;
    }
    return at(t_lo);
  };
  return Segment<double>{end(-1.0), end(1.0)};
}

Segment<double> figure5_seed(const LinkedTwistMap<double>& map) {
  const double slope = 1.0 + std::numbers::sqrt2;
  return cell_spanning_segment(map, Point<double>{0.935, 0.085}, Vec2<double>{1.0, slope});
}

bool has_vertical_crossing(const std::vector<Segment<double>>& comps, const LtmSpec<double>& spec, double tol) {
  for (const auto& c : comps) {
    const double lo = std::min(c.a.y, c.b.y), hi = std::max(c.a.y, c.b.y);
    if (lo <= spec.p0 + tol && hi >= spec.p1 - tol) return true;
  }
  return false;
}

#define LTM_INSTANTIATE(T)                                                                                      \
  template CutResult<T> split_at_sigma<T>(const LinkedTwistMap<T>&, const Segment<T>&, int, double,             \
                                          const SplitOptions&);                                                 \
  template CutResult<T> evolve_segment<T>(const LinkedTwistMap<T>&, const Segment<T>&, int, double,             \
                                          const SplitOptions&);                                                 \
  template std::vector<LengthStats> length_stats<T>(const CutResult<T>&);                                    \
  template std::int64_t for_each_piece<T>(const LinkedTwistMap<T>&, const Segment<T>&, int, double,            \
                                          const SplitOptions&, const PieceVisitor<T>&);

LTM_INSTANTIATE(double)
LTM_INSTANTIATE(Rational)
#undef LTM_INSTANTIATE

}  // namespace ltm
