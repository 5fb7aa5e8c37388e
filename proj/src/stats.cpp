#include "ltm/stats.hpp"

#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ltm {

std::vector<Observable> builtin_observables() {
  constexpr double pi = std::numbers::pi;
  return {
      {"obs_x", [](const Point<double>& z) { return std::cos(pi * z.x); }, 1.0, pi, true},
      {"obs_y", [](const Point<double>& z) { return std::cos(pi * z.y); }, 1.0, pi, true},
      {"obs_xy", [](const Point<double>& z) { return std::cos(pi * z.x) * std::cos(pi * z.y); }, 1.0,
       pi * std::numbers::sqrt2, true},
  };
}

const Observable& builtin_observable(const std::string& name) {
  static const std::vector<Observable> all = builtin_observables();
  for (const auto& o : all) {
    if (o.name == name) return o;
  }
  throw ConfigError("unknown observable: " + name);
}

namespace {

struct CorrAcc {
  std::vector<double> sum, sum_sq;
  std::uint64_t count = 0, skipped = 0;

  explicit CorrAcc(std::size_t len = 0) : sum(len, 0.0), sum_sq(len, 0.0) {}
  void merge(const CorrAcc& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
    }
    count += o.count;
    skipped += o.skipped;
  }
};

enum class Flow { H, HS };

CorrAcc corr_range(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                   const CorrelationOptions& opt, Flow flow, std::uint64_t begin, std::uint64_t end) {
  const auto len = static_cast<std::size_t>(opt.n_max + 1);
  CorrAcc acc(len);
  std::vector<double> row(len);
  const Stream stream = flow == Flow::H ? Stream::Correlation : Stream::CorrelationHS;
  for (std::uint64_t i = begin; i < end; ++i) {
    auto rng = make_rng(opt.seed, stream, i);
    Point<double> z = flow == Flow::H ? sample_R(rng, map.spec()) : sample_S(rng, map.spec());
    double weight;
    if (opt.null_model) {
      auto rng2 = make_rng(opt.seed, Stream::CorrelationNull, i);
      weight = psi.eval(flow == Flow::H ? sample_R(rng2, map.spec()) : sample_S(rng2, map.spec()));
    } else {
      weight = psi.eval(z);
    }
    try {
      for (std::size_t n = 0; n < len; ++n) {
        if (n > 0) z = flow == Flow::H ? map.apply_h(z) : map.apply_h_s(z).image;
        row[n] = phi.eval(z) * weight;
      }
    } catch (const ReturnTimeOverflow&) {
      ++acc.skipped;
      continue;
    }
    for (std::size_t n = 0; n < len; ++n) {
      acc.sum[n] += row[n];
      acc.sum_sq[n] += row[n] * row[n];
    }
    ++acc.count;
  }
  return acc;
}

CorrSeries finish(const CorrAcc& acc, const CorrelationOptions& opt) {
  CorrSeries s;
  s.ensemble = opt.ensemble;
  s.seed = opt.seed;
  s.skipped = acc.skipped;
  s.null_model = opt.null_model;
  const double m = static_cast<double>(acc.count);
  for (std::size_t n = 0; n < acc.sum.size(); ++n) {
    CorrEntry e;
    e.n = static_cast<std::int64_t>(n);
    e.n_eff = acc.count;
    if (acc.count > 0) {
      e.c = acc.sum[n] / m;
      const double var = acc.count > 1 ? std::max(0.0, (acc.sum_sq[n] - m * e.c * e.c) / (m - 1)) : 0.0;
      e.std_err = std::sqrt(var / m);
    }
    s.entries.push_back(e);
  }
  return s;
}

CorrSeries run_correlation(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                           const CorrelationOptions& opt, Flow flow) {
  if (opt.n_max < 0) throw std::invalid_argument("estimate_correlation: n_max must be >= 0");
  const auto len = static_cast<std::size_t>(opt.n_max + 1);
  const CorrAcc acc = sharded_reduce(
      opt.ensemble, CorrAcc(len),
      [&](std::uint64_t b, std::uint64_t e) { return corr_range(map, phi, psi, opt, flow, b, e); },
      [](CorrAcc& a, const CorrAcc& p) { a.merge(p); });
  return finish(acc, opt);
}

}  // namespace

CorrSeries estimate_correlation(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                const CorrelationOptions& opt) {
  return run_correlation(map, phi, psi, opt, Flow::H);
}

CorrSeries estimate_correlation_HS(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                   const CorrelationOptions& opt) {
  return run_correlation(map, phi, psi, opt, Flow::HS);
}

namespace serial {
CorrSeries estimate_correlation(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                const CorrelationOptions& opt) {
  return finish(corr_range(map, phi, psi, opt, Flow::H, 0, opt.ensemble), opt);
}
}  // namespace serial

std::int64_t r_count(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t n,
                     std::int64_t stop_above) {
  if (n < 1) throw std::invalid_argument("r_count: n must be >= 1");
  std::int64_t t = 0, r = 0;
  Point<double> w = z;
  for (;;) {
    const auto [gap, next] = map.next_visit(w);
    t += gap;
    if (t > n) break;
    ++r;
    if (stop_above >= 0 && r > stop_above) break;
    w = next;
  }
  return r;
}

std::int64_t n_max_stat(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("n_max_stat: n must be >= 0");
  std::int64_t t = 0, best = 0;
  Point<double> w = z;
  // Gaps starting at time 0 and at every visit up to n; a gap may end past n.
  while (t <= n) {
    const auto [gap, next] = map.next_visit(w);
    best = std::max(best, gap);
    t += gap;
    w = next;
  }
  return best;
}

namespace {

struct MarkAcc {
  std::uint64_t samples = 0, complement = 0, overflow = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  void merge(const MarkAcc& o) {
    samples += o.samples;
    complement += o.complement;
    overflow += o.overflow;
    min_ratio = std::min(min_ratio, o.min_ratio);
  }
};

}  // namespace

MarkarianRecord markarian_scan(const LinkedTwistMap<double>& map, std::int64_t n, double b, std::uint64_t samples,
                               std::uint64_t seed) {
  if (n < 2 || !(b > 0)) throw std::invalid_argument("markarian_scan: need n >= 2 and b > 0");
  const double bound = b * std::log(static_cast<double>(n));
  const auto threshold = static_cast<std::int64_t>(std::floor(bound));
  const MarkAcc acc = sharded_reduce(
      samples, MarkAcc{},
      [&](std::uint64_t begin, std::uint64_t end) {
        MarkAcc a;
        for (std::uint64_t i = begin; i < end; ++i) {
          auto rng = make_rng(seed ^ static_cast<std::uint64_t>(n), Stream::Markarian, i);
          const auto z = sample_R(rng, map.spec());
          ++a.samples;
          try {
            // r > b ln n  <=>  r > floor(b ln n) for integer r.
            const auto r = r_count(map, z, n, threshold);
            if (r > threshold) continue;
            ++a.complement;
            const double ratio = static_cast<double>(n_max_stat(map, z, n)) / static_cast<double>(n);
            a.min_ratio = std::min(a.min_ratio, ratio);
          } catch (const ReturnTimeOverflow&) {
            ++a.overflow;
          }
        }
        return a;
      },
      [](MarkAcc& a, const MarkAcc& p) { a.merge(p); }, 4096);
  MarkarianRecord rec;
  rec.n = n;
  rec.b = b;
  rec.samples = acc.samples;
  rec.complement = acc.complement;
  rec.overflow = acc.overflow;
  const double total = static_cast<double>(acc.samples);
  rec.complement_frac = total > 0 ? static_cast<double>(acc.complement) / total : 0.0;
  rec.frac_B = total > 0 ? 1.0 - rec.complement_frac : 0.0;
  rec.beta_hat = acc.complement > 0 ? acc.min_ratio : 0.0;
  return rec;
}

std::int64_t isolation_depth(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t cap) {
  auto run = [&](bool forward) {
    Point<double> w = z;
    for (std::int64_t i = 1; i <= cap; ++i) {
      w = forward ? map.apply_h_s(w).image : map.apply_h_s_inv(w).image;
      if (classify_S(map, w).n != 1) return i - 1;
    }
    return cap;
  };
  return std::min(run(true), run(false));
}

std::vector<std::int64_t> log_grid(std::int64_t n_lo, std::int64_t n_hi, int per_decade) {
  std::vector<std::int64_t> out;
  const double step = std::pow(10.0, 1.0 / per_decade);
  for (double v = static_cast<double>(n_lo); v <= static_cast<double>(n_hi) * 1.0000001; v *= step) {
    const auto n = static_cast<std::int64_t>(std::llround(v));
    if (out.empty() || n != out.back()) out.push_back(n);
  }
  return out;
}

IsolationStats isolation_scan(const LinkedTwistMap<double>& map, const std::vector<std::int64_t>& ns,
                              std::uint64_t samples_per_n, std::uint64_t seed) {
  IsolationStats stats;
  for (const auto n : ns) {
    if (n < 10) throw std::invalid_argument("isolation_scan: n must be >= 10");
    // Cells of large label sit within ~1/n of the corners; draw from a box
    // around p (and its half-turn around q) and keep label n.
    const double side = 1.2 / static_cast<double>(n);
    IsolationRow row;
    row.n = n;
    row.min_max_N = std::numeric_limits<std::int64_t>::max();
    double total = 0;
    const std::uint64_t max_draws = 2000 * samples_per_n * static_cast<std::uint64_t>(std::max<std::int64_t>(1, n / 10));
    for (std::uint64_t i = 0; i < max_draws && row.samples < samples_per_n; ++i) {
      auto rng = make_rng(seed ^ static_cast<std::uint64_t>(n) * 0x9e37ULL, Stream::Isolation, i);
      Point<double> z{1.0 - side * rng.uniform(), 0.5 * side * rng.uniform()};
      if (rng.uniform() < 0.5) z = half_turn(z);
      try {
        if (classify_S(map, z).n != n) continue;
        const auto depth = isolation_depth(map, z);
        row.min_max_N = std::min(row.min_max_N, depth);
        total += static_cast<double>(depth);
        ++row.samples;
      } catch (const ReturnTimeOverflow&) {
      }
    }
    if (row.samples == 0) row.min_max_N = 0;
    row.mean_max_N = row.samples ? total / static_cast<double>(row.samples) : 0.0;
    stats.rows.push_back(row);
  }
  return stats;
}

namespace {

struct TailAcc {
  std::uint64_t samples = 0, fwd = 0, bwd = 0, either = 0;
  void merge(const TailAcc& o) {
    samples += o.samples;
    fwd += o.fwd;
    bwd += o.bwd;
    either += o.either;
  }
};

}  // namespace

TailRecord tail_decomposition(const LinkedTwistMap<double>& map, std::int64_t n, double beta, std::uint64_t samples,
                              std::uint64_t seed) {
  if (n < 1 || !(beta > 0)) throw std::invalid_argument("tail_decomposition: need n >= 1 and beta > 0");
  const double level = beta * static_cast<double>(n);
  const TailAcc acc = sharded_reduce(
      samples, TailAcc{},
      [&](std::uint64_t begin, std::uint64_t end) {
        TailAcc a;
        for (std::uint64_t i = begin; i < end; ++i) {
          auto rng = make_rng(seed ^ static_cast<std::uint64_t>(n), Stream::Tail, i);
          Point<double> w = sample_R(rng, map.spec());
          ++a.samples;
          bool f = false, bk = false;
          std::int64_t t = 0;
          try {
            if (!map.in_S(w)) {
              const auto [gap, next] = map.next_visit(w);
              t = gap;
              w = next;
            }
            while (t <= n && !(f && bk)) {
              const auto fw = map.apply_h_s(w);
              if (static_cast<double>(fw.n) >= level) f = true;
              if (static_cast<double>(map.apply_h_s_inv(w).n) >= level) bk = true;
              t += fw.n;
              w = fw.image;
            }
          } catch (const ReturnTimeOverflow&) {
            f = true;
          }
          a.fwd += f;
          a.bwd += bk;
          a.either += (f || bk);
        }
        return a;
      },
      [](TailAcc& a, const TailAcc& p) { a.merge(p); }, 4096);
  TailRecord rec;
  rec.n = n;
  rec.beta = beta;
  rec.samples = acc.samples;
  const double m = static_cast<double>(std::max<std::uint64_t>(1, acc.samples));
  rec.forward = static_cast<double>(acc.fwd) / m;
  rec.backward = static_cast<double>(acc.bwd) / m;
  rec.either = static_cast<double>(acc.either) / m;
  return rec;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  LinearFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(lx, ly);
}

LinearFit fit_semilog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> kx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0) {
      kx.push_back(x[i]);
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(kx, ly);
}

DecayFit fit_correlation_decay(const CorrSeries& s, std::int64_t n_min, std::int64_t n_max, bool semilog,
                               double k_sigma) {
  DecayFit out;
  std::vector<double> x, y;
  for (const auto& e : s.entries) {
    if (e.n < n_min || e.n > n_max) continue;
    if (std::abs(e.c) < k_sigma * e.std_err || e.c == 0) continue;
    out.window.push_back(e.n);
    x.push_back(static_cast<double>(e.n));
    y.push_back(std::abs(e.c));
  }
  out.fit = semilog ? fit_semilog(x, y) : fit_loglog(x, y);
  return out;
}

}  // namespace ltm
