#include "ltm/acceptance.hpp"

#include "ltm/cocycle.hpp"
#include "ltm/errors.hpp"
#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"
#include "ltm/stats.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ltm {

Profile parse_profile(const std::string& name) {
  if (name == "smoke") return Profile::Smoke;
  if (name == "desk") return Profile::Desk;
  if (name == "deep") return Profile::Deep;
  throw ConfigError("profile must be smoke, desk or deep");
}

std::string profile_name(Profile p) {
  switch (p) {
    case Profile::Smoke: return "smoke";
    case Profile::Desk: return "desk";
    case Profile::Deep: return "deep";
  }
  return "?";
}

bool AcceptanceReport::all_pass() const {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.title << "): measured " << r.measured
     << "; expected " << r.expected;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << " [" << r.seconds << " s]";
  for (const auto& n : r.notes) os << "\n      note: " << n;
  return os.str();
}

namespace {

struct Sizes {
  std::uint64_t return_points, cone_points, jacobian_points, cell_samples;
  double corner_delta;
  std::uint64_t random_segments;
  int generations;
  std::size_t budget;
  std::uint64_t lyap_points;
  std::int64_t lyap_iter;
  std::uint64_t corr_ensemble, markarian_samples, isolation_samples;
};

Sizes sizes_for(Profile p) {
  switch (p) {
    case Profile::Smoke:
      return {10'000, 10'000, 1'000, 100'000, 1e-3, 100, 30, 200, 100, 1'000, 100'000, 100'000, 20};
    case Profile::Desk:
      return {1'000'000, 1'000'000, 10'000, 10'000'000, 1e-5, 1'000, 200, 1000, 1'000, 10'000, 10'000'000,
              1'000'000, 50};
    case Profile::Deep:
      return {10'000'000, 10'000'000, 100'000, 100'000'000, 1e-5, 10'000, 200, 4000, 10'000, 10'000,
              100'000'000, 10'000'000, 200};
  }
  return sizes_for(Profile::Desk);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

const LinkedTwistMap<double>& fmap() {
  static const LinkedTwistMap<double> m;
  return m;
}

const LinkedTwistMap<Rational>& rmap() {
  static const LinkedTwistMap<Rational> m;
  return m;
}

CriterionResult start(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

struct Context {
  Sizes sz;
  std::uint64_t seed;
  // theta-hat from the H_S decay fit, shared by 12 and 13.
  double theta_hat = 0;
};

CriterionResult c1_period_three(Context&) {
  auto r = start(1, "period-3 point c and DH_S(c)");
  const auto& m = rmap();
  const Point<Rational> c{Rational(1, 2), Rational(1, 2)};
  const auto h1 = m.apply_h(c), h2 = m.apply_h(h1), h3 = m.apply_h(h2);
  const bool period3 = h3 == c && !m.in_S(h1) && !m.in_S(h2);
  const auto o = m.apply_h_s(c);
  const bool fixed = o.image == c && o.n == 3;
  const Mat2<Rational> claimed{Rational(1), Rational(2), Rational(2), Rational(5)};
  r.pass = period3 && fixed && o.deriv == claimed;
  r.measured = std::string("H^3(c)=c ") + (period3 ? "yes" : "no") + ", H_S(c)=c " + (fixed ? "yes" : "no") +
               ", branch (j,k)=(" + std::to_string(o.j) + "," + std::to_string(o.k) + "), DH_S(c)=" +
               to_string(to_double_mat(o.deriv));
  r.expected = "period 3, fixed by H_S, DH_S(c)=[[1, 2], [2, 5]] (exact)";
  if (!(o.deriv == claimed)) {
    r.notes.push_back("c lies in the (2,2) cell, where the branch derivative is [[1,4],[4,17]]; "
                      "[[1,2],[2,5]] is the (1,1) branch");
  }
  return r;
}

CriterionResult c2_return_identity(Context& ctx) {
  auto r = start(2, "Rtn(z;H,S)=j+k-1 and H_S=G_S o F_S");
  struct Acc {
    std::uint64_t n = 0, bad_rtn = 0, bad_comp = 0, bad_orbit = 0;
  };
  const auto& m = rmap();
  const Acc acc = sharded_reduce(
      ctx.sz.return_points, Acc{},
      [&](std::uint64_t b, std::uint64_t e) {
        Acc a;
        for (std::uint64_t i = b; i < e; ++i) {
          auto rng = make_rng(ctx.seed, Stream::Properties, i);
          const auto z = sample_S(rng, m.spec());
          const auto o = m.apply_h_s(z);
          const auto [fz, rf] = m.apply_f_s(z);
          const auto [gfz, rg] = m.apply_g_s(fz);
          ++a.n;
          if (m.return_time_h_iterated(z) != o.j + o.k - 1) ++a.bad_rtn;
          if (!(gfz == o.image) || rf.steps != o.j || rg.steps != o.k) ++a.bad_comp;
          Point<Rational> w = z;
          for (std::int64_t s = 0; s < o.n; ++s) w = m.apply_h(w);
          if (!(w == o.image)) ++a.bad_orbit;
        }
        return a;
      },
      [](Acc& a, const Acc& p) {
        a.n += p.n;
        a.bad_rtn += p.bad_rtn;
        a.bad_comp += p.bad_comp;
        a.bad_orbit += p.bad_orbit;
      },
      4096);
  r.pass = acc.bad_rtn == 0 && acc.bad_comp == 0 && acc.bad_orbit == 0 && acc.n == ctx.sz.return_points;
  r.measured = std::to_string(acc.n) + " dyadic points (rational backend); return-time mismatches " +
               std::to_string(acc.bad_rtn) + ", G_S o F_S mismatches " + std::to_string(acc.bad_comp) +
               ", H^n orbit mismatches " + std::to_string(acc.bad_orbit);
  r.expected = "0 mismatches";
  return r;
}

CriterionResult c3_cones(Context& ctx) {
  auto r = start(3, "cone invariance and sqrt5 expansion");
  struct Acc {
    std::uint64_t n = 0, fwd_bad = 0, bwd_bad = 0;
    double fwd_min = 1e300, bwd_min = 1e300;
  };
  const auto& m = fmap();
  const Acc acc = sharded_reduce(
      ctx.sz.cone_points, Acc{},
      [&](std::uint64_t b, std::uint64_t e) {
        Acc a;
        for (std::uint64_t i = b; i < e; ++i) {
          auto rng = make_rng(ctx.seed, Stream::Properties, (1ULL << 40) + i);
          const auto z = sample_S(rng, m.spec());
          // Directions (a,1) and (-1,a) with a in [0,1] sweep each cone edge to edge.
          const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
          const Vec2<double> wu{sign * rng.uniform(), sign};
          const Vec2<double> ws{-sign, sign * rng.uniform()};
          ++a.n;
          const auto f = cone_step(m, z, wu, Direction::Forward);
          const auto bk = cone_step(m, z, ws, Direction::Backward);
          if (!f.in_cone || !f.expands) ++a.fwd_bad;
          if (!bk.in_cone || !bk.expands) ++a.bwd_bad;
          a.fwd_min = std::min(a.fwd_min, f.ratio);
          a.bwd_min = std::min(a.bwd_min, bk.ratio);
        }
        return a;
      },
      [](Acc& a, const Acc& p) {
        a.n += p.n;
        a.fwd_bad += p.fwd_bad;
        a.bwd_bad += p.bwd_bad;
        a.fwd_min = std::min(a.fwd_min, p.fwd_min);
        a.bwd_min = std::min(a.bwd_min, p.bwd_min);
      });
  r.pass = acc.fwd_bad == 0 && acc.bwd_bad == 0;
  r.measured = std::to_string(acc.n) + " pairs; forward violations " + std::to_string(acc.fwd_bad) +
               " (min ratio " + fmt(acc.fwd_min) + "), backward violations " + std::to_string(acc.bwd_bad) +
               " (min ratio " + fmt(acc.bwd_min) + ")";
  r.expected = "0 violations, ratios > " + fmt(std::sqrt(5.0));
  return r;
}

CriterionResult c4_jacobian(Context& ctx) {
  auto r = start(4, "Jacobian oracle");
  const auto& m = fmap();
  const auto& mr = rmap();
  std::uint64_t f_ok = 0, f_bad = 0, f_skip = 0, r_ok = 0, r_bad = 0, r_skip = 0;
  double worst = 0;
  std::uint64_t i = 0;
  while (f_ok + f_bad < ctx.sz.jacobian_points && i < 100 * ctx.sz.jacobian_points) {
    auto rng = make_rng(ctx.seed, Stream::Properties, (2ULL << 40) + i++);
    const auto z = sample_S(rng, m.spec());
    try {
      const auto J = finite_diff_jacobian(m, z, 0x1p-20);
      const auto o = m.apply_h_s(z);
      const auto D = to_double_mat(dH_S(o.j, o.k));
      const double err = std::max({std::abs(J.a - D.a), std::abs(J.b - D.b), std::abs(J.c - D.c),
                                   std::abs(J.d - D.d)});
      worst = std::max(worst, err);
      (err <= 1e-6 ? f_ok : f_bad)++;
    } catch (const BranchMismatch&) {
      ++f_skip;
    }
  }
  i = 0;
  const Rational h(BigInt(1), BigInt(1) << 40);
  while (r_ok + r_bad < ctx.sz.jacobian_points && i < 100 * ctx.sz.jacobian_points) {
    auto rng = make_rng(ctx.seed, Stream::Properties, (3ULL << 40) + i++);
    const auto z = sample_S(rng, mr.spec());
    try {
      const auto J = affine_fit_jacobian(mr, z, h);
      const auto o = mr.apply_h_s(z);
      const auto D = dH_S(o.j, o.k);
      const bool same = J.a == Rational(D.a) && J.b == Rational(D.b) && J.c == Rational(D.c) && J.d == Rational(D.d);
      (same ? r_ok : r_bad)++;
    } catch (const BranchMismatch&) {
      ++r_skip;
    }
  }
  r.pass = f_bad == 0 && r_bad == 0 && f_ok == ctx.sz.jacobian_points && r_ok == ctx.sz.jacobian_points;
  r.measured = "float " + std::to_string(f_ok) + "/" + std::to_string(f_ok + f_bad) + " within 1e-6 (max err " +
               fmt(worst, 3) + ", " + std::to_string(f_skip) + " near-boundary draws skipped); rational " +
               std::to_string(r_ok) + "/" + std::to_string(r_ok + r_bad) + " exact (" + std::to_string(r_skip) +
               " skipped)";
  r.expected = std::to_string(ctx.sz.jacobian_points) + " interior points each, all matching dH_S(j,k)";
  return r;
}

CriterionResult c5_cell_law(Context& ctx) {
  auto r = start(5, "cell-measure law");
  const auto hist = cell_histogram(fmap(), ctx.sz.cell_samples, ctx.seed, 200);
  std::vector<double> x, y;
  std::size_t empty = 0;
  for (std::int64_t n = 2; n <= 30; ++n) {
    const double v = hist.cell(n).value;
    if (v <= 0) ++empty;
    x.push_back(static_cast<double>(n));
    y.push_back(v);
  }
  const auto fit = fit_loglog(x, y);
  r.pass = empty == 0 && fit.slope >= -3.5 && fit.slope <= -2.5;
  r.measured = "slope " + fmt(fit.slope, 4) + " (r^2 " + fmt(fit.r2, 4) + ", " + std::to_string(ctx.sz.cell_samples) +
               " samples, " + std::to_string(empty) + " empty cells, mu(S_1)=" + fmt(hist.cell(1).value, 4) + ")";
  r.expected = "slope in [-3.5, -2.5] over n in [2,30]";
  return r;
}

CriterionResult c6_boundary_lines(Context&) {
  auto r = start(6, "boundary crossings on x=1");
  const auto& m = fmap();
  const auto& mr = rmap();
  const auto lines = sigmaF_lines<Rational>(60);
  int exact_ok = 0, float_ok = 0;
  double worst = 0;
  std::string first_error;
  for (std::int64_t n = 2; n <= 50; ++n) {
    // Brackets of half-width 1/(32 n^2) hold the F-line and no G-line.
    const double y = 1.0 / (2.0 * static_cast<double>(n)), e = 1.0 / (32.0 * static_cast<double>(n * n));
    try {
      const auto p = locate_boundary(m, Point<double>{1, y - e}, Point<double>{1, y + e}, 1e-13);
      const double err = std::max(std::abs(p.y - y), std::abs(p.x - 1));
      worst = std::max(worst, err);
      if (err <= 1e-9) ++float_ok;
    } catch (const std::exception& ex) {
      if (first_error.empty()) first_error = ex.what();
    }
    const Rational yr(1, 2 * n), er(1, 32 * n * n);
    try {
      const auto q = locate_boundary_exact(mr, Point<Rational>{1, yr - er}, Point<Rational>{1, yr + er}, lines);
      if (q.x == 1 && q.y == yr) ++exact_ok;
    } catch (const std::exception& ex) {
      if (first_error.empty()) first_error = ex.what();
    }
  }
  r.pass = exact_ok == 49 && float_ok == 49;
  r.measured = "rational exact " + std::to_string(exact_ok) + "/49, float within 1e-9 " + std::to_string(float_ok) +
               "/49 (max err " + fmt(worst, 3) + ")";
  if (!first_error.empty()) r.notes.push_back(first_error);
  r.expected = "(1, 1/(2n)) for 2 <= n <= 50";
  return r;
}

CriterionResult c7_eigenvalues(Context&) {
  auto r = start(7, "eigenvalue formulas");
  double worst = 0;
  for (std::int64_t n = 1; n <= 10'000; ++n) {
    const long double nn = static_cast<long double>(n);
    const double expect = static_cast<double>(1 + 2 * nn + std::sqrt(4 * nn * (nn + 1)));
    const double got = spectral_radius(dH_S(n, 1));
    worst = std::max(worst, std::abs(got - expect) / expect);
  }
  const std::int64_t N = 10'000;
  const double lam = lambda_sigma2_branch(N);
  const double ratio = lam / (24.0 * static_cast<double>(N));
  double form_err = 0;
  for (auto f : {Sigma2Form::GnFH, Sigma2Form::GFnH, Sigma2Form::HGnF, Sigma2Form::HGFn}) {
    form_err = std::max(form_err, std::abs(spectral_radius(sigma2_form_matrix(f, N)) - lam) / lam);
  }
  const double prod_err =
      std::abs(spectral_radius(dG_pow(N) * dF_pow(1) * dH_unit()) - lam) / lam;
  r.pass = worst <= 1e-12 && ratio >= 0.999 && ratio <= 1.001 && form_err <= 1e-12 && prod_err <= 1e-12;
  r.measured = "max rel err (n<=1e4) " + fmt(worst, 3) + "; lambda(1e4)/24n = " + fmt(ratio, 8) +
               "; product-matrix rel err " + fmt(prod_err, 3) + " (all four forms " + fmt(form_err, 3) + ")";
  r.expected = "rel err <= 1e-12, ratio in [0.999, 1.001]";
  return r;
}

CriterionResult c8_one_step(Context& ctx) {
  auto r = start(8, "one-step expansion");
  const double target = std::log(3 + 2 * std::numbers::sqrt2) / 24.0;
  const double partial = one_step_partial_series(10'000);
  const auto& m = fmap();

  const double d = ctx.sz.corner_delta;
  const double slope = 1 + std::numbers::sqrt2;
  // Unit-length direction; the segment ends on the corner p.
  const double dx = d / std::hypot(1.0, slope);
  const Segment<double> corner{{1.0 - dx, 0.0}, {1.0, dx * slope}};
  const auto rep = one_step_sum(m, corner);

  double sup = 0;
  std::uint64_t used = 0;
  for (std::uint64_t i = 0; used < ctx.sz.random_segments && i < 100 * ctx.sz.random_segments; ++i) {
    auto rng = make_rng(ctx.seed, Stream::Segments, i);
    const auto z = sample_S(rng, m.spec());
    const double theta = std::numbers::pi / 4 + rng.uniform() * std::numbers::pi / 4;
    const double len = 1e-4;
    const Vec2<double> h{0.5 * len * std::cos(theta), 0.5 * len * std::sin(theta)};
    const Segment<double> s{{z.x - h.u, z.y - h.v}, {z.x + h.u, z.y + h.v}};
    if (!m.in_S(s.a) || !m.in_S(s.b)) continue;
    try {
      sup = std::max(sup, one_step_sum(m, s).sum_inv);
      ++used;
    } catch (const ResolutionExceeded&) {
    }
  }
  const bool ok_series = std::abs(partial - target) <= 1e-3;
  const bool ok_corner = std::abs(rep.sum_inv - 0.32323) <= 0.02;
  const bool ok_sup = sup < 0.9 && used == ctx.sz.random_segments;
  r.pass = ok_series && ok_corner && ok_sup;
  r.measured = "partial series(1e4) " + fmt(partial, 7) + " vs " + fmt(target, 7) + "; corner sum (delta " + fmt(d, 2) +
               ", " + std::to_string(rep.n_components) + " components) " + fmt(rep.sum_inv, 6) + "; sup over " +
               std::to_string(used) + " random segments " + fmt(sup, 4);
  r.expected = "|series - ln(3+2 sqrt2)/24| <= 1e-3, |corner - 0.32323| <= 0.02, sup < 0.9";
  OneStepOptions dir;
  dir.mode = ExpansionMode::Directional;
  r.notes.push_back("corner sum with directional growth factors: " + fmt(one_step_sum(m, corner, dir).sum_inv, 6));
  return r;
}

CriterionResult c9_manifold(Context& ctx) {
  auto r = start(9, "unstable manifold growth");
  const auto& m = fmap();
  IterateOptions opt;
  opt.budget = ctx.sz.budget;
  const auto seed = figure5_seed(m);
  const auto gens = iterate_segments(m, seed, ctx.sz.generations, opt);
  std::uint64_t viol = 0, unresolved = 0, pruned = 0;
  double min_growth = 1e300;
  for (const auto& g : gens) {
    viol += g.doubling_violations;
    unresolved += g.unresolved;
    pruned += g.pruned_count;
    if (g.index < ctx.sz.generations) min_growth = std::min(min_growth, g.min_vertical_growth);
  }
  const auto het = heteroclinic_scan(gens, local_stable_segment(m));
  int missing = 0;
  if (het.first_generation) {
    for (std::size_t g = static_cast<std::size_t>(*het.first_generation); g < het.crossed.size(); ++g) {
      if (!het.crossed[g]) ++missing;
    }
  }
  r.pass = viol == 0 && unresolved == 0 && het.first_generation && *het.first_generation <= 4 && missing == 0;
  r.measured = std::to_string(ctx.sz.generations) + " generations (budget " + std::to_string(ctx.sz.budget) +
               "): doubling violations " + std::to_string(viol) + ", min l_v growth " + fmt(min_growth, 4) +
               ", unresolved " + std::to_string(unresolved) + "; first stable crossing at generation " +
               (het.first_generation ? std::to_string(*het.first_generation) : std::string("none")) +
               ", later generations without crossing " + std::to_string(missing);
  r.expected = "0 violations, first crossing <= 4, crossing at every later generation";
  r.notes.push_back("components per generation 0..3: " + std::to_string(gens[0].components.size()) + ", " +
                    std::to_string(gens.size() > 1 ? gens[1].components.size() : 0) + ", " +
                    std::to_string(gens.size() > 2 ? gens[2].components.size() : 0) + ", " +
                    std::to_string(gens.size() > 3 ? gens[3].components.size() : 0) + "; pruned pieces " +
                    std::to_string(pruned));
  return r;
}

CriterionResult c10_lyapunov(Context& ctx) {
  auto r = start(10, "Lyapunov exponents");
  const auto hs = lyapunov_ensemble(fmap(), LyapunovMap::HS, ctx.sz.lyap_points, ctx.sz.lyap_iter, ctx.seed);
  const auto h = lyapunov_ensemble(fmap(), LyapunovMap::H, ctx.sz.lyap_points, ctx.sz.lyap_iter, ctx.seed);
  const double bound = 0.5 * std::log(5.0);
  r.pass = hs.mean > bound && h.mean > 0 && hs.count > 0 && h.count > 0;
  r.measured = "H_S " + fmt(hs.mean, 5) + " +- " + fmt(hs.std_err, 2) + " (min " + fmt(hs.min, 4) + "), H " +
               fmt(h.mean, 5) + " +- " + fmt(h.std_err, 2) + " (" + std::to_string(ctx.sz.lyap_points) + " x " +
               std::to_string(ctx.sz.lyap_iter) + ")";
  r.expected = "H_S > " + fmt(bound, 5) + ", H > 0";
  return r;
}

struct CorrRuns {
  CorrSeries h_xxy, hs_xxy, h_xx, hs_xx;
};

std::string window_text(const DecayFit& f) {
  if (f.window.empty()) return "empty";
  return std::to_string(f.window.size()) + " points in [" + std::to_string(f.window.front()) + "," +
         std::to_string(f.window.back()) + "]";
}

std::int64_t first_below_floor(const CorrSeries& s, std::int64_t from) {
  for (const auto& e : s.entries) {
    if (e.n < from) continue;
    bool rest_quiet = true;
    for (const auto& f : s.entries) {
      if (f.n >= e.n && f.n <= e.n + 5 && std::abs(f.c) >= 3 * f.std_err) rest_quiet = false;
    }
    if (rest_quiet) return e.n;
  }
  return -1;
}

CriterionResult c11_decay(Context& ctx, CorrRuns& runs) {
  auto r = start(11, "polynomial correlation decay of H");
  const auto fit = fit_correlation_decay(runs.h_xxy, 5, 60, false);
  r.pass = fit.fit.points >= 2 && fit.fit.slope >= -1.5 && fit.fit.slope <= -0.7;
  r.measured = "(obs_x, obs_xy) ensemble " + std::to_string(ctx.sz.corr_ensemble) + ": window " + window_text(fit) +
               (fit.fit.points >= 2 ? ", slope " + fmt(fit.fit.slope, 4) : std::string(", no slope")) +
               ", |C_5| = " + fmt(std::abs(runs.h_xxy.entries[5].c), 3) + " +- " +
               fmt(runs.h_xxy.entries[5].std_err, 2);
  r.expected = "log-log slope in [-1.5, -0.7] over the noise-filtered window n in [5,60]";
  const auto diag = fit_correlation_decay(runs.h_xx, 5, 60, false);
  r.notes.push_back("obs_x is odd and obs_xy even under the half-turn about c, which commutes with H, so "
                    "C_n(obs_x, obs_xy) vanishes for every n");
  r.notes.push_back("(obs_x, obs_x) under H: window " + window_text(diag) + ", slope " + fmt(diag.fit.slope, 4) +
                    " (r^2 " + fmt(diag.fit.r2, 3) + ")");
  return r;
}

CriterionResult c12_contrast(Context& ctx, CorrRuns& runs) {
  auto r = start(12, "induced-map contrast");
  int compared = 0, wrong = 0;
  for (std::int64_t n = 10; n <= 30; ++n) {
    const auto& a = runs.h_xxy.entries[static_cast<std::size_t>(n)];
    const auto& b = runs.hs_xxy.entries[static_cast<std::size_t>(n)];
    if (std::abs(a.c) < 3 * a.std_err || std::abs(b.c) < 3 * b.std_err) continue;
    ++compared;
    if (!(std::abs(b.c) < std::abs(a.c))) ++wrong;
  }
  r.pass = wrong == 0;
  const auto floor_hs = first_below_floor(runs.hs_xxy, 1);
  r.measured = "(obs_x, obs_xy) ensemble " + std::to_string(ctx.sz.corr_ensemble) + ": " + std::to_string(compared) +
               " n in [10,30] with both curves above 3 stderr, " + std::to_string(wrong) +
               " where |C_n(H_S)| >= |C_n(H)|; H_S quiet from n = " + std::to_string(floor_hs);
  if (compared == 0) r.measured += " (comparison vacuous)";
  r.expected = "|C_n(H_S)| < |C_n(H)| wherever both exceed noise in [10,30]";

  int compared_xx = 0, wrong_xx = 0;
  for (std::int64_t n = 10; n <= 30; ++n) {
    const auto& a = runs.h_xx.entries[static_cast<std::size_t>(n)];
    const auto& b = runs.hs_xx.entries[static_cast<std::size_t>(n)];
    if (std::abs(a.c) < 3 * a.std_err) continue;
    ++compared_xx;
    if (!(std::abs(b.c) < std::abs(a.c))) ++wrong_xx;
  }
  const auto hs_fit = fit_correlation_decay(runs.hs_xx, 1, 60, true);
  r.notes.push_back("(obs_x, obs_x): H above noise at " + std::to_string(compared_xx) + " n in [10,30], H_S smaller at " +
                    std::to_string(compared_xx - wrong_xx) + "; H_S quiet from n = " +
                    std::to_string(first_below_floor(runs.hs_xx, 1)) + "; H_S semilog slope " +
                    fmt(hs_fit.fit.slope, 4) + " over " + window_text(hs_fit) + ", theta-hat " +
                    fmt(ctx.theta_hat, 4));
  return r;
}

CriterionResult c13_markarian(Context& ctx) {
  auto r = start(13, "Markarian decomposition and isolation");
  const auto& m = fmap();
  double b = 3.0;
  if (ctx.theta_hat > 0 && ctx.theta_hat < 1) b = 2.0 / std::log(1.0 / ctx.theta_hat);
  std::vector<double> ns, frac;
  bool beta_ok = true;
  std::string betas;
  for (std::int64_t n : {100, 1000, 10000}) {
    const auto rec = markarian_scan(m, n, b, ctx.sz.markarian_samples, ctx.seed);
    ns.push_back(static_cast<double>(n));
    frac.push_back(rec.complement_frac);
    beta_ok = beta_ok && rec.complement > 0 && rec.beta_hat > 0;
    betas += (betas.empty() ? "" : ", ") + fmt(rec.beta_hat, 3) + " (" + std::to_string(rec.complement) + " pts)";
  }
  const auto cfit = fit_loglog(ns, frac);
  const auto iso = isolation_scan(m, log_grid(10, 10'000, 4), ctx.sz.isolation_samples, ctx.seed);
  std::vector<double> lx, yv;
  std::string depths;
  for (const auto& row : iso.rows) {
    if (row.samples == 0) continue;
    lx.push_back(std::log(static_cast<double>(row.n)));
    yv.push_back(static_cast<double>(row.min_max_N));
    depths += (depths.empty() ? "" : " ") + std::to_string(row.min_max_N);
  }
  const auto ifit = fit_line(lx, yv);
  r.pass = beta_ok && cfit.slope >= -1.5 && cfit.slope <= -0.6 && ifit.points >= 2 && ifit.slope > 0;
  r.measured = "b = " + fmt(b, 4) + "; beta-hat at n=1e2,1e3,1e4: " + betas + "; complement slope " +
               fmt(cfit.slope, 4) + "; isolation slope vs ln n " + fmt(ifit.slope, 4) + " (min depths " + depths + ")";
  r.expected = "beta-hat > 0, complement slope in [-1.5, -0.6], isolation slope > 0";
  return r;
}

}  // namespace

AcceptanceReport run_acceptance(Profile profile, std::uint64_t seed, const std::set<int>& only, std::ostream* log) {
  AcceptanceReport report;
  report.profile = profile;
  report.seed = seed;
  Context ctx{sizes_for(profile), seed};
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  auto run = [&](const std::function<CriterionResult()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = f();
    } catch (const std::exception& ex) {
      res.pass = false;
      res.measured = std::string("aborted: ") + ex.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << format_result(res) << std::endl;
    report.results.push_back(res);
  };

  using Fn = CriterionResult (*)(Context&);
  const Fn simple[] = {c1_period_three, c2_return_identity, c3_cones,     c4_jacobian,  c5_cell_law,
                       c6_boundary_lines, c7_eigenvalues,   c8_one_step,  c9_manifold,  c10_lyapunov};
  for (int id = 1; id <= 10; ++id) {
    if (wanted(id)) {
      run([&] {
        auto res = simple[id - 1](ctx);
        res.id = id;
        return res;
      });
    }
  }

  if (wanted(11) || wanted(12) || wanted(13)) {
    CorrRuns runs;
    bool have_runs = false;
    auto corr = [&] {
      if (have_runs) return;
      CorrelationOptions opt;
      opt.n_max = 60;
      opt.ensemble = ctx.sz.corr_ensemble;
      opt.seed = seed;
      const auto& ox = builtin_observable("obs_x");
      const auto& oxy = builtin_observable("obs_xy");
      runs.h_xxy = estimate_correlation(fmap(), ox, oxy, opt);
      runs.hs_xxy = estimate_correlation_HS(fmap(), ox, oxy, opt);
      runs.h_xx = estimate_correlation(fmap(), ox, ox, opt);
      runs.hs_xx = estimate_correlation_HS(fmap(), ox, ox, opt);
      const auto fit = fit_correlation_decay(runs.hs_xx, 1, 60, true);
      if (fit.fit.points >= 2 && fit.fit.slope < 0) ctx.theta_hat = std::exp(fit.fit.slope);
      have_runs = true;
    };
    if (wanted(11)) run([&] { corr(); return c11_decay(ctx, runs); });
    if (wanted(12)) run([&] { corr(); return c12_contrast(ctx, runs); });
    if (wanted(13)) {
      if (ctx.theta_hat == 0 && profile != Profile::Smoke) {
        // theta-hat comes from the H_S decay fit; compute it when 11/12 were skipped.
        try {
          corr();
        } catch (const std::exception&) {
        }
      }
      run([&] { return c13_markarian(ctx); });
    }
  }
  return report;
}

}  // namespace ltm
