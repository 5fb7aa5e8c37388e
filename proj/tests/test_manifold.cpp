#include "ltm/cocycle.hpp"
#include "ltm/manifold.hpp"
#include "ltm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace ltm;

namespace {

using Q = Rational;
using PQ = Point<Q>;
using PD = Point<double>;

Q r(long n, long d = 1) { return from_ratio<Q>(n, d); }

const double kSilver = 3.0 + 2.0 * std::sqrt(2.0);

}  // namespace

TEST_CASE("a segment inside one cell is not cut") {
  LinkedTwistMap<double> m;
  const Segment<double> seg{PD{0.01, 0.01}, PD{0.012, 0.013}};
  const auto cut = split_at_sigma(m, seg, 1, 1e-14);
  CHECK(cut.components.size() == 1);
  CHECK(cut.crossings.empty());
  CHECK(cut.keys.size() == 1);
}

TEST_CASE("a segment across the n=2 line splits on the line") {
  LinkedTwistMap<double> m;
  // x + 4y = 2 meets x = 0.99 at y = 0.2525
  const Segment<double> seg{PD{0.99, 0.251}, PD{0.992, 0.254}};
  const auto cut = split_at_sigma(m, seg, 1, 1e-14);
  REQUIRE(cut.components.size() == 2);
  REQUIRE(cut.crossings.size() == 1);
  const PD hit = seg.at(cut.crossings[0]);
  CHECK(hit.x + 4 * hit.y == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cut.keys[0] != cut.keys[1]);
  // components tile the segment in order
  CHECK(cut.components[0].a == seg.a);
  CHECK(cut.components[1].b == seg.b);
  CHECK(cut.components[0].b == cut.components[1].a);
  for (std::size_t i = 0; i < cut.components.size(); ++i)
    CHECK(branch_key(m, seg.at(cut.witnesses[i]), 1) == cut.keys[i]);
}

TEST_CASE("corner segments cross consecutive cells with ratio near 3 + 2 sqrt2") {
  LinkedTwistMap<double> m;
  for (double delta : {1e-3, 1e-4}) {
    // from L: y = (1 - x)/2 to x = 1 with slope 1 + sqrt2, length ~ delta
    const double s = 1 + std::sqrt(2.0);
    const double x1 = 1.0, y1 = delta;
    // solve y1 - s (1 - x0) = (1 - x0)/2 for the start on L
    const double d = y1 / (s + 0.5);
    const Segment<double> seg{PD{1.0 - d, d / 2}, PD{x1, y1}};
    const auto cut = split_at_sigma(m, seg, 1, 1e-16);
    std::int64_t lo = INT64_MAX, hi = 0;
    for (const auto& k : cut.keys) {
      // the end on L can pick up a sliver of the unit cell
      if (k.cell_index() < 10) continue;
      lo = std::min(lo, k.cell_index());
      hi = std::max(hi, k.cell_index());
    }
    CHECK(static_cast<double>(hi) / static_cast<double>(lo) == doctest::Approx(kSilver).epsilon(0.1));
    // every label in between shows up
    std::set<std::int64_t> seen;
    for (const auto& k : cut.keys) seen.insert(k.cell_index());
    for (std::int64_t n = lo; n <= hi; ++n) CHECK(seen.count(n) == 1);
  }
}

TEST_CASE("evolved pieces stay in the unstable cone and double vertically") {
  LinkedTwistMap<double> m;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = make_rng(61, Stream::Segments, i);
    const PD a = sample_S(rng, m.spec());
    const double ang = M_PI / 4 + rng.uniform() * M_PI / 4;
    const PD b{a.x + 1e-3 * std::cos(ang), a.y + 1e-3 * std::sin(ang)};
    if (!m.in_S(b)) continue;
    const Segment<double> seg{a, b};
    const auto pre = split_at_sigma(m, seg, 1, 1e-15);
    const auto img = evolve_segment(m, seg, 1, 1e-15);
    REQUIRE(pre.components.size() == img.components.size());
    for (std::size_t c = 0; c < img.components.size(); ++c) {
      const auto& piece = pre.components[c];
      const auto& out = img.components[c];
      if (piece.l_v() < 1e-12) continue;
      CHECK(in_unstable_cone(out.direction()));
      const double slope = out.direction().v / out.direction().u;
      CHECK(slope >= 2.0 - 1e-9);
      CHECK(out.l_v() > 2 * piece.l_v());
    }
  }
}

TEST_CASE("affine image of a midpoint is the midpoint of the image") {
  LinkedTwistMap<Q> m;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rng = make_rng(63, Stream::Segments, i);
    const PQ a = sample_S(rng, m.spec());
    const PQ b{a.x + r(1, 1 << 12), a.y + r(3, 1 << 12)};
    if (!m.in_S(b)) continue;
    const auto img = evolve_segment(m, Segment<Q>{a, b}, 1, 1e-12);
    const auto pre = split_at_sigma(m, Segment<Q>{a, b}, 1, 1e-12);
    for (std::size_t c = 0; c < img.components.size(); ++c) {
      const auto& piece = pre.components[c];
      const PQ mid{(piece.a.x + piece.b.x) / 2, (piece.a.y + piece.b.y) / 2};
      const auto br = affine_branch(m, mid, 1);
      const PQ out_mid{(img.components[c].a.x + img.components[c].b.x) / 2,
                       (img.components[c].a.y + img.components[c].b.y) / 2};
      CHECK(br.apply(mid) == out_mid);
      if (branch_key(m, mid, 1) == pre.keys[c]) {
        // inside the cell, the branch formula is the real H_S image (mod 2)
        const PQ hs = m.apply_h_s(mid).image;
        CHECK(wrap(out_mid.x) == hs.x);
        CHECK(wrap(out_mid.y) == hs.y);
      }
    }
  }
}

TEST_CASE("length statistics") {
  CutResult<double> cut;
  cut.components.push_back(Segment<double>{PD{0, 0}, PD{0.3, 0.4}});
  const auto st = length_stats(cut);
  REQUIRE(st.size() == 1);
  CHECK(st[0].l_h == doctest::Approx(0.3));
  CHECK(st[0].l_v == doctest::Approx(0.4));
  CHECK(st[0].length == doctest::Approx(0.5));
}

TEST_CASE("iterated generations from the corner seed") {
  LinkedTwistMap<double> m;
  const auto seed = figure5_seed(m);
  CHECK(seed.direction().v / seed.direction().u == doctest::Approx(1 + std::sqrt(2.0)));
  CHECK(seed.a.x >= 0.9);
  CHECK(seed.b.y <= 0.1);

  IterateOptions opt;
  opt.budget = 300;
  const auto gens = iterate_segments(m, seed, 5, opt);
  REQUIRE(gens.size() == 6);
  REQUIRE(gens[0].components.size() == 1);
  CHECK(gens[0].components[0].a == seed.a);
  CHECK(gens[0].components[0].b == seed.b);
  for (const auto& g : gens) {
    CHECK(g.doubling_violations == 0);
    CHECK(g.unresolved == 0);
  }
  CHECK(has_vertical_crossing(gens[2].components, m.spec()));
  CHECK_FALSE(has_vertical_crossing(gens[0].components, m.spec()));

  const auto het = heteroclinic_scan(gens, local_stable_segment(m));
  REQUIRE(het.first_generation.has_value());
  CHECK(*het.first_generation <= 2);
  for (int g = *het.first_generation; g < static_cast<int>(het.crossed.size()); ++g) CHECK(het.crossed[g]);
  const auto probe = heteroclinic_probe(m, seed, 3, opt);
  CHECK(probe.first_generation == het.first_generation);
}

TEST_CASE("stable direction at c") {
  LinkedTwistMap<double> m;
  CHECK(stable_slope_at_c(m) == doctest::Approx(2 - std::sqrt(5.0)).epsilon(1e-12));
  const auto s = local_stable_segment(m, 0.1);
  const double slope = s.direction().v / s.direction().u;
  CHECK(slope == doctest::Approx(2 - std::sqrt(5.0)).epsilon(1e-9));
  CHECK(in_stable_cone(s.direction()));
  // c lies on the segment
  const double t = (0.5 - s.a.x) / (s.b.x - s.a.x);
  CHECK(s.at(t).y == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t > 0);
  CHECK(t < 1);
}

TEST_CASE("segment intersection") {
  const Segment<double> s{PD{0, 0}, PD{1, 1}}, t{PD{0, 1}, PD{1, 0}}, u{PD{2, 2}, PD{3, 2}};
  const auto hit = segment_intersection(s, t);
  REQUIRE(hit.has_value());
  CHECK(hit->x == doctest::Approx(0.5));
  CHECK(hit->y == doctest::Approx(0.5));
  CHECK_FALSE(segment_intersection(s, u).has_value());
}

TEST_CASE("cell spanning segment reaches the cell boundary") {
  LinkedTwistMap<double> m;
  const PD z{0.01, 0.01};
  const auto seg = cell_spanning_segment(m, z, Vec2<double>{1, 2});
  const auto key = branch_key(m, z, 1);
  CHECK(branch_key(m, seg.at(0.001), 1) == key);
  CHECK(branch_key(m, seg.at(0.999), 1) == key);
  CHECK(seg.length() > 0.01);
}
