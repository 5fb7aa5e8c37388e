#include "ltm/cocycle.hpp"

#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ltm {

IntMat2 dH_S(std::int64_t j, std::int64_t k) {
  if (j < 1 || k < 1) throw std::invalid_argument("dH_S: j, k must be >= 1");
  const BigInt J(static_cast<long>(j)), K(static_cast<long>(k));
  return IntMat2{BigInt(1), 2 * J, 2 * K, 4 * J * K + 1};
}

IntMat2 dF_pow(std::int64_t n) { return IntMat2{BigInt(1), BigInt(2 * n), BigInt(0), BigInt(1)}; }
IntMat2 dG_pow(std::int64_t n) { return IntMat2{BigInt(1), BigInt(0), BigInt(2 * n), BigInt(1)}; }
IntMat2 dH_unit() { return dG_pow(1) * dF_pow(1); }

Mat2<double> finite_diff_jacobian(const LinkedTwistMap<double>& map, const Point<double>& z, double h) {
  const BranchKey kz = branch_key(map, z, 1);
  auto image = [&](double dx, double dy) {
    const Point<double> w{z.x + dx, z.y + dy};
    if (!map.in_S(w) || !(branch_key(map, w, 1) == kz)) {
      throw BranchMismatch("finite_diff_jacobian: probe at " + to_string(w) + " leaves the branch of " + to_string(z));
    }
    return map.apply_h_s(w).image;
  };
  const auto xp = image(h, 0), xm = image(-h, 0), yp = image(0, h), ym = image(0, -h);
  const double s = 0.5 / h;
  return Mat2<double>{(xp.x - xm.x) * s, (yp.x - ym.x) * s, (xp.y - xm.y) * s, (yp.y - ym.y) * s};
}

Mat2<Rational> affine_fit_jacobian(const LinkedTwistMap<Rational>& map, const Point<Rational>& z,
                                   const Rational& h) {
  const BranchKey kz = branch_key(map, z, 1);
  auto image = [&](const Point<Rational>& w) {
    if (!map.in_S(w) || !(branch_key(map, w, 1) == kz)) {
      throw BranchMismatch("affine_fit_jacobian: probe at " + to_string(w) + " leaves the branch");
    }
    return map.apply_h_s(w).image;
  };
  const auto f0 = image(z);
  const auto fx = image({z.x + h, z.y});
  const auto fy = image({z.x, z.y + h});
  return Mat2<Rational>{(fx.x - f0.x) / h, (fy.x - f0.x) / h, (fx.y - f0.y) / h, (fy.y - f0.y) / h};
}

template <Scalar T>
ConeStep<T> cone_step(const LinkedTwistMap<T>& map, const Point<T>& z, const Vec2<T>& w, Direction dir) {
  const auto o = dir == Direction::Forward ? map.apply_h_s(z) : map.apply_h_s_inv(z);
  ConeStep<T> out;
  out.image = o.image;
  out.w = o.deriv * w;
  out.in_cone = dir == Direction::Forward ? in_unstable_cone(out.w) : in_stable_cone(out.w);
  const T before = norm_sq(w), after = norm_sq(out.w);
  out.expands = after > 5 * before;
  out.ratio = std::sqrt(to_double(after) / to_double(before));
  return out;
}

namespace {

double radius_from(long double tr, long double det) {
  const long double disc = tr * tr - 4 * det;
  // Parabolic matrices (the identity included) have no expanding direction.
  if (std::abs(tr) <= 2 || disc <= 0) throw NotHyperbolic("spectral_radius: matrix is not hyperbolic");
  return static_cast<double>((std::abs(tr) + std::sqrt(disc)) / 2);
}

long double to_ld(const BigInt& v) {
  if (v.fits_slong_p()) return static_cast<long double>(v.get_si());
  return static_cast<long double>(v.get_d());
}

}  // namespace

double spectral_radius(const IntMat2& m) {
  return radius_from(to_ld(BigInt(m.a + m.d)), to_ld(BigInt(m.a * m.d - m.b * m.c)));
}

double spectral_radius(const Mat2<double>& m) {
  const long double a = m.a, b = m.b, c = m.c, d = m.d;
  return radius_from(a + d, a * d - b * c);
}

double lambda_sigma2_branch(std::int64_t n) {
  const long double N = static_cast<long double>(n);
  return static_cast<double>(12 * N + 5 + std::sqrt(144 * N * N + 120 * N + 24));
}

std::string form_name(Sigma2Form f) {
  switch (f) {
    case Sigma2Form::GnFH: return "DG^n DF DH";
    case Sigma2Form::GFnH: return "DG DF^n DH";
    case Sigma2Form::HGnF: return "DH DG^n DF";
    case Sigma2Form::HGFn: return "DH DG DF^n";
  }
  return "?";
}

IntMat2 sigma2_form_matrix(Sigma2Form f, std::int64_t n) {
  const IntMat2 H = dH_unit(), F = dF_pow(1), G = dG_pow(1);
  switch (f) {
    case Sigma2Form::GnFH: return dG_pow(n) * F * H;
    case Sigma2Form::GFnH: return G * dF_pow(n) * H;
    case Sigma2Form::HGnF: return H * dG_pow(n) * F;
    case Sigma2Form::HGFn: return H * G * dF_pow(n);
  }
  throw std::invalid_argument("sigma2_form_matrix: bad form");
}

std::optional<Sigma2Form> classify_form(const Branch2Label& l) {
  const bool unit_first = l.j1 == 1 && l.k1 == 1;
  const bool unit_second = l.j2 == 1 && l.k2 == 1;
  if (unit_first && l.j2 == 1) return Sigma2Form::GnFH;
  if (unit_first && l.k2 == 1) return Sigma2Form::GFnH;
  if (unit_second && l.j1 == 1) return Sigma2Form::HGnF;
  if (unit_second && l.k1 == 1) return Sigma2Form::HGFn;
  return std::nullopt;
}

IntMat2 dH_S2(const Branch2Label& l) { return dH_S(l.j2, l.k2) * dH_S(l.j1, l.k1); }

double lyapunov_estimate(const LinkedTwistMap<double>& map, const Point<double>& z0, std::int64_t iterations,
                         LyapunovMap which) {
  if (iterations < 1) throw std::invalid_argument("lyapunov_estimate: iterations must be >= 1");
  Point<double> z = z0;
  double u = 0, v = 1;
  double acc = 0;
  const double a = map.shear_f(), b = map.shear_g();
  for (std::int64_t i = 0; i < iterations; ++i) {
    if (which == LyapunovMap::HS) {
      const auto o = map.apply_h_s(z);
      const double nu = o.deriv.a * u + o.deriv.b * v;
      const double nv = o.deriv.c * u + o.deriv.d * v;
      u = nu;
      v = nv;
      z = o.image;
    } else {
      if (map.in_P(z)) {
        u += a * v;
        z = map.apply_f(z);
      }
      if (map.in_Q(z)) {
        v += b * u;
        z = map.apply_g(z);
      }
    }
    const double r = std::hypot(u, v);
    acc += std::log(r);
    u /= r;
    v /= r;
  }
  return acc / static_cast<double>(iterations);
}

namespace {

struct LyapAcc {
  double sum = 0, sum_sq = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::uint64_t count = 0, overflow = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    min = std::min(min, x);
    max = std::max(max, x);
    ++count;
  }
  void merge(const LyapAcc& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    min = std::min(min, o.min);
    max = std::max(max, o.max);
    count += o.count;
    overflow += o.overflow;
  }
  EnsembleEstimate finish() const {
    EnsembleEstimate e;
    e.count = count;
    e.overflow = overflow;
    if (count == 0) return e;
    const double n = static_cast<double>(count);
    e.mean = sum / n;
    e.min = min;
    e.max = max;
    const double var = count > 1 ? std::max(0.0, (sum_sq - n * e.mean * e.mean) / (n - 1)) : 0.0;
    e.std_err = std::sqrt(var / n);
    return e;
  }
};

LyapAcc lyap_range(const LinkedTwistMap<double>& map, LyapunovMap which, std::int64_t iterations,
                   std::uint64_t seed, std::uint64_t begin, std::uint64_t end) {
  LyapAcc acc;
  for (std::uint64_t i = begin; i < end; ++i) {
    auto rng = make_rng(seed, Stream::Lyapunov, i);
    const auto z = which == LyapunovMap::HS ? sample_S(rng, map.spec()) : sample_R(rng, map.spec());
    try {
      acc.add(lyapunov_estimate(map, z, iterations, which));
    } catch (const ReturnTimeOverflow&) {
      ++acc.overflow;
    }
  }
  return acc;
}

}  // namespace

EnsembleEstimate lyapunov_ensemble(const LinkedTwistMap<double>& map, LyapunovMap which, std::uint64_t points,
                                   std::int64_t iterations, std::uint64_t seed) {
  return sharded_reduce(
             points, LyapAcc{},
             [&](std::uint64_t b, std::uint64_t e) { return lyap_range(map, which, iterations, seed, b, e); },
             [](LyapAcc& acc, const LyapAcc& part) { acc.merge(part); }, 4)
      .finish();
}

namespace serial {
EnsembleEstimate lyapunov_ensemble(const LinkedTwistMap<double>& map, LyapunovMap which, std::uint64_t points,
                                   std::int64_t iterations, std::uint64_t seed) {
  return lyap_range(map, which, iterations, seed, 0, points).finish();
}
}  // namespace serial

ExpansionReport one_step_sum(const LinkedTwistMap<double>& map, const Segment<double>& seg,
                             const OneStepOptions& opt) {
  ExpansionReport rep;
  rep.delta = seg.length();
  rep.power = opt.power;
  rep.mode = opt.mode;
  const double tol = opt.tol > 0 ? opt.tol : std::max(rep.delta * 1e-10, 1e-16);
  const Vec2<double> dir = seg.direction();
  const double dir_norm = norm(dir);
  for_each_piece<double>(map, seg, opt.power, tol, opt.split,
                         [&](double t0, double t1, const BranchKey& key, double witness) {
                           Point<double> w = seg.at(witness);
                           w.x = std::clamp(w.x, map.spec().q0, map.spec().q1);
                           w.y = std::clamp(w.y, map.spec().p0, map.spec().p1);
                           const Mat2<double> A = affine_branch(map, w, opt.power).A;
                           const double lambda = opt.mode == ExpansionMode::Eigenvalue
                                                     ? spectral_radius(A)
                                                     : norm(A * dir) / dir_norm;
                           rep.sum_inv += 1.0 / lambda;
                           ++rep.n_components;
                           if (rep.components.size() < opt.keep_components) {
                             rep.components.push_back({key, lambda, (t1 - t0) * rep.delta});
                           }
                         });
  return rep;
}

double one_step_partial_series(std::int64_t N) {
  if (N < 1) throw std::invalid_argument("one_step_partial_series: N must be >= 1");
  const long double ratio = 3.0L + 2.0L * std::sqrt(2.0L);
  const auto M = static_cast<std::int64_t>(std::ceil(ratio * static_cast<long double>(N)));
  long double s = 0;
  for (std::int64_t n = M; n >= N; --n) s += 1.0L / (24.0L * static_cast<long double>(n));
  return static_cast<double>(s);
}

double transported_slope(const LinkedTwistMap<double>& map, const Point<double>& z, int steps) {
  std::vector<Point<double>> back;
  back.reserve(static_cast<std::size_t>(steps));
  Point<double> w = z;
  for (int i = 0; i < steps; ++i) {
    w = map.apply_h_s_inv(w).image;
    back.push_back(w);
  }
  double u = 0, v = 1;
  for (auto it = back.rbegin(); it != back.rend(); ++it) {
    const auto A = map.apply_h_s(*it).deriv;
    const double nu = A.a * u + A.b * v, nv = A.c * u + A.d * v;
    const double r = std::hypot(nu, nv);
    u = nu / r;
    v = nv / r;
  }
  return v / u;
}

template ConeStep<double> cone_step<double>(const LinkedTwistMap<double>&, const Point<double>&,
                                            const Vec2<double>&, Direction);
template ConeStep<Rational> cone_step<Rational>(const LinkedTwistMap<Rational>&, const Point<Rational>&,
                                                const Vec2<Rational>&, Direction);

}  // namespace ltm
