#include "ltm/errors.hpp"
#include "ltm/rng.hpp"
#include "ltm/twist_map.hpp"

#include <doctest.h>

#include <cmath>

using namespace ltm;

namespace {

using Q = Rational;
using PQ = Point<Q>;
using PD = Point<double>;

Q r(long n, long d = 1) { return from_ratio<Q>(n, d); }

// Brute-force F step counter: apply F until the point lands in S again.
std::int64_t brute_return_f(const LinkedTwistMap<double>& m, PD z) {
  for (std::int64_t i = 1; i < 100000; ++i) {
    z = m.apply_f(z);
    if (m.in_S(z)) return i;
  }
  return -1;
}

// Signed doubled area of a triangle given by unwrapped edge vectors.
Q cross(const Q& ux, const Q& uy, const Q& vx, const Q& vy) { return ux * vy - uy * vx; }

// Representative of a - b mod 2 in (-1, 1].
Q torus_diff(const Q& a, const Q& b) {
  Q d = wrap(Q(a - b));
  if (d > 1) d -= 2;
  return d;
}

}  // namespace

TEST_CASE("wrap reduces mod 2 into [0,2)") {
  CHECK(wrap(2.5) == 0.5);
  CHECK(wrap(-0.25) == 1.75);
  CHECK(wrap(2.0) == 0.0);
  CHECK(wrap(-1e-300) < 2.0);
  CHECK(wrap(r(5, 2)) == r(1, 2));
  CHECK(wrap(r(-1, 4)) == r(7, 4));
  CHECK(wrap(r(2)) == 0);
  CHECK(wrap(r(-6)) == 0);
}

TEST_CASE("annulus membership uses closed intervals") {
  const auto spec = LtmSpec<Q>::canonical();
  CHECK(in_S(PQ{r(1, 2), r(1, 2)}, spec));
  CHECK(in_P(PQ{r(3, 2), r(1, 2)}, spec));
  CHECK_FALSE(in_Q(PQ{r(3, 2), r(1, 2)}, spec));
  CHECK(in_S(PQ{r(1), r(0)}, spec));
  CHECK(in_S(PQ{r(0), r(1)}, spec));
  CHECK_FALSE(in_R(PQ{r(3, 2), r(3, 2)}, spec));
}

TEST_CASE("spec validation rejects bad annuli") {
  LtmSpec<Q> s;
  s.p1 = r(0);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  LtmSpec<Q> w;
  w.wrap_g = 0;
  CHECK_THROWS_AS(LinkedTwistMap<Q>{w}, ConfigError);
  CHECK(LtmSpec<Q>::canonical().is_canonical());
  CHECK(LtmSpec<Q>::canonical().shear_f() == 2);
}

TEST_CASE("F and G formulas") {
  LinkedTwistMap<Q> m;
  CHECK(m.apply_f(PQ{r(1, 2), r(1, 4)}) == PQ{r(1), r(1, 4)});
  CHECK(m.apply_f(PQ{r(1, 2), r(3, 2)}) == PQ{r(1, 2), r(3, 2)});
  CHECK(m.apply_g(PQ{r(1, 4), r(3, 2)}) == PQ{r(1, 4), r(0)});
  CHECK(m.apply_g(PQ{r(3, 2), r(1, 2)}) == PQ{r(3, 2), r(1, 2)});
  CHECK(m.apply_h(PQ{r(1, 2), r(1, 2)}) == PQ{r(3, 2), r(1, 2)});
}

TEST_CASE("c = (1/2,1/2) is a period-3 point of H and fixed by H_S") {
  LinkedTwistMap<Q> m;
  const PQ c{r(1, 2), r(1, 2)};
  const auto orb = m.orbit(c, MapKind::H, 3);
  REQUIRE(orb.size() == 3);
  CHECK(orb[0] == PQ{r(3, 2), r(1, 2)});
  CHECK(orb[1] == PQ{r(1, 2), r(3, 2)});
  CHECK(orb[2] == c);

  auto [fs, rf] = m.apply_f_s(c);
  CHECK(fs == c);
  CHECK(rf.steps == 2);

  const auto hs = m.apply_h_s(c);
  CHECK(hs.image == c);
  CHECK(hs.n == 3);
  CHECK(m.return_time_h_iterated(c) == 3);
}

TEST_CASE("F_S single-step example and (x,0) boundary row") {
  LinkedTwistMap<Q> m;
  auto [img, ret] = m.apply_f_s(PQ{r(1, 2), r(1, 4)});
  CHECK(img == PQ{r(1), r(1, 4)});
  CHECK(ret.steps == 1);
  for (long i = 0; i <= 8; ++i) CHECK(m.return_time_f(PQ{r(i, 8), r(0)}) == 1);
}

TEST_CASE("fast-skip return time agrees with iteration") {
  LinkedTwistMap<double> m;
  const PD z{0.9, 0.05};
  const auto fast = m.return_time_f(z, ReturnMethod::FastSkip);
  CHECK(fast == m.return_time_f(z, ReturnMethod::Iterate));
  CHECK(fast == brute_return_f(m, z));

  for (std::uint64_t i = 0; i < 20000; ++i) {
    auto rng = make_rng(7, Stream::Properties, i);
    const PD w = sample_S(rng, m.spec());
    if (w.y < 1e-4 || w.y > 1 - 1e-4) continue;
    REQUIRE(m.return_time_f(w, ReturnMethod::FastSkip) == m.return_time_f(w, ReturnMethod::Iterate));
    const auto g = m.apply_g_s(w, ReturnMethod::FastSkip);
    const auto gi = m.apply_g_s(w, ReturnMethod::Iterate);
    REQUIRE(g.second.steps == gi.second.steps);
  }
}

TEST_CASE("H_S is G_S after F_S and its time matches H iteration (rational)") {
  LinkedTwistMap<Q> m;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    auto rng = make_rng(11, Stream::Properties, i);
    const PQ z = sample_S(rng, m.spec());
    const auto o = m.apply_h_s(z);
    const auto via = m.apply_g_s(m.apply_f_s(z).first).first;
    REQUIRE(o.image == via);
    REQUIRE(o.n == o.j + o.k - 1);
    REQUIRE(o.n == m.return_time_h_iterated(z));
    const auto hn = m.orbit(z, MapKind::H, o.n);
    REQUIRE(hn.back() == o.image);
    REQUIRE(o.branch().apply(z).x - o.image.x == 0);
    REQUIRE(o.branch().apply(z).y - o.image.y == 0);
    REQUIRE(o.deriv == Mat2<Q>{r(1), r(2 * o.j), r(2 * o.k), r(4 * o.j * o.k + 1)});
  }
}

TEST_CASE("H_S inverse undoes H_S") {
  LinkedTwistMap<Q> m;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    auto rng = make_rng(13, Stream::Properties, i);
    const PQ z = sample_S(rng, m.spec());
    const auto fwd = m.apply_h_s(z);
    const auto back = m.apply_h_s_inv(fwd.image);
    REQUIRE(back.image == z);
    REQUIRE(back.j == fwd.j);
    REQUIRE(back.k == fwd.k);
    REQUIRE(back.deriv * fwd.deriv == Mat2<Q>::identity());
    REQUIRE(back.branch().apply(fwd.image).x == z.x);
  }
}

TEST_CASE("next_visit matches plain H iteration from anywhere in R") {
  LinkedTwistMap<Q> m;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    auto rng = make_rng(17, Stream::Properties, i);
    const PQ z = sample_R(rng, m.spec());
    const auto [steps, img] = m.next_visit(z);
    PQ w = z;
    std::int64_t t = 0;
    do {
      w = m.apply_h(w);
      ++t;
    } while (!m.in_S(w));
    REQUIRE(steps == t);
    REQUIRE(img == w);
  }
  CHECK_THROWS_AS(m.next_visit(PQ{r(3, 2), r(3, 2)}), std::invalid_argument);
}

TEST_CASE("H preserves area of small triangles exactly") {
  LinkedTwistMap<Q> m;
  const Q h = Q(1) / Q(1 << 20);
  int checked = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = make_rng(19, Stream::Properties, i);
    const PQ a = sample_R(rng, m.spec());
    const PQ b{wrap(Q(a.x + h)), a.y};
    const PQ c{a.x, wrap(Q(a.y + h))};
    // Same linearity cell: identical annulus membership before and after F.
    auto sig = [&](const PQ& z) { return std::pair{m.in_P(z), m.in_Q(m.apply_f(z))}; };
    if (sig(a) != sig(b) || sig(a) != sig(c)) continue;
    const PQ A = m.apply_h(a), B = m.apply_h(b), C = m.apply_h(c);
    const Q before = cross(h, Q(0), Q(0), h);
    const Q after = cross(torus_diff(B.x, A.x), torus_diff(B.y, A.y), torus_diff(C.x, A.x), torus_diff(C.y, A.y));
    REQUIRE(after == before);
    ++checked;
  }
  CHECK(checked > 9900);
}

TEST_CASE("boundary rows and columns are invariant") {
  LinkedTwistMap<Q> m;
  for (long i = 0; i < 16; ++i) {
    const Q x = r(i, 8);
    for (long y : {0L, 1L}) {
      const PQ img = m.apply_f(PQ{x, r(y)});
      CHECK(img.y == y);
      CHECK(img.x == wrap(Q(x + 2 * y)));
      const PQ gimg = m.apply_g(PQ{r(y), x});
      CHECK(gimg.x == y);
    }
  }
}

TEST_CASE("float and rational backends agree on return times away from sigma") {
  LinkedTwistMap<Q> mq;
  LinkedTwistMap<double> md;
  int agreed = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = make_rng(23, Stream::Properties, i);
    const PQ zq = sample_S(rng, mq.spec());
    const PD zd{to_double(zq.x), to_double(zq.y)};
    const auto oq = mq.apply_h_s(zq);
    // Distance to sigma along x: how close F^j lands to the window edges.
    const double margin = std::min({to_double(oq.image.x), 1 - to_double(oq.image.x), to_double(oq.image.y),
                                    1 - to_double(oq.image.y)});
    if (margin < 1e-9) continue;
    const auto od = md.apply_h_s(zd);
    REQUIRE(od.j == oq.j);
    REQUIRE(od.k == oq.k);
    ++agreed;
  }
  CHECK(agreed > 9900);
}

TEST_CASE("orbit edge cases and determinism") {
  LinkedTwistMap<Q> m;
  const PQ z{r(3, 7), r(2, 9)};
  CHECK(m.orbit(z, MapKind::HS, 0).empty());
  CHECK_THROWS_AS(m.orbit(z, MapKind::H, -1), std::invalid_argument);
  CHECK(m.orbit(z, MapKind::HS, 25) == m.orbit(z, MapKind::HS, 25));
  const auto fg = m.orbit(z, MapKind::F, 4);
  CHECK(fg.back() == PQ{wrap(Q(z.x + 8 * z.y)), z.y});
}

TEST_CASE("return cap surfaces as ReturnTimeOverflow") {
  LinkedTwistMap<Q> m(LtmSpec<Q>::canonical(), 5);
  // x + 2y just past 1: the F-orbit needs ~500 steps to come back
  const PQ slow{r(999, 1000), r(1, 1000)};
  CHECK_THROWS_AS(m.return_time_f(slow, ReturnMethod::Iterate), ReturnTimeOverflow);
  CHECK_THROWS_AS(m.return_time_f(slow, ReturnMethod::FastSkip), ReturnTimeOverflow);
  CHECK_THROWS_AS(m.return_time_h_iterated(slow), ReturnTimeOverflow);
  try {
    m.apply_h_s(slow);
    FAIL("expected overflow");
  } catch (const ReturnTimeOverflow& e) {
    CHECK(e.cap() == 5);
  }
}

TEST_CASE("uniform samples of R land in S a third of the time") {
  LinkedTwistMap<double> m;
  const std::uint64_t n = 200000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto rng = make_rng(29, Stream::Properties, i);
    const PD z = sample_R(rng, m.spec());
    REQUIRE(m.in_R(z));
    hits += m.in_S(z);
  }
  const double p = static_cast<double>(hits) / n;
  CHECK(std::abs(p - 1.0 / 3.0) < 5 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("non-canonical spec: return time still matches iteration") {
  LtmSpec<Q> s;
  s.p0 = r(1, 4);
  s.p1 = r(5, 4);
  s.q1 = r(3, 2);
  s.wrap_f = 2;
  LinkedTwistMap<Q> m(s);
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto rng = make_rng(31, Stream::Properties, i);
    const PQ z = sample_S(rng, m.spec());
    const auto o = m.apply_h_s(z);
    REQUIRE(m.in_S(o.image));
    REQUIRE(o.n == m.return_time_h_iterated(z));
    REQUIRE(o.branch().apply(z).x - o.image.x == 0);
    REQUIRE(o.branch().apply(z).y - o.image.y == 0);
  }
}
