// Command-line front end: every experiment as a subcommand writing CSV plus a
// JSON sidecar into --out.

#include "ltm/acceptance.hpp"
#include "ltm/cocycle.hpp"
#include "ltm/io.hpp"
#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"
#include "ltm/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

using namespace ltm;

namespace {

constexpr int kExitAssert = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitConfig = 4;

class AssertionFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string spec_file;
  std::map<std::string, std::string> values;
};

// Registers the shared flags on a subcommand; values land in `ov` as strings
// so the config file can be applied first.
void add_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--spec-file", ov.spec_file, "key=value config file");
  for (const char* key : {"backend", "seed", "samples", "ensemble", "n-max", "threads", "out", "profile"}) {
    std::string flag = std::string("--") + key;
    std::string k = key;
    std::replace(k.begin(), k.end(), '-', '_');
    sub->add_option_function<std::string>(flag, [&ov, k](const std::string& v) { ov.values[k] = v; });
  }
}

RunConfig resolve(const Overrides& ov) {
  RunConfig cfg;
  if (!ov.spec_file.empty()) cfg = load_config_file(ov.spec_file);
  for (const auto& [k, v] : ov.values) set_config_value(cfg, k, v);
  cfg.spec.validate();
  set_thread_count(cfg.threads);
  return cfg;
}

LinkedTwistMap<double> float_map(const RunConfig& cfg) { return LinkedTwistMap<double>(cfg.spec.convert<double>()); }

void require_float(const RunConfig& cfg, const char* what) {
  if (cfg.backend != Backend::Float) throw ConfigError(std::string(what) + " runs on the float backend only");
}

void require_canonical(const RunConfig& cfg, const char* what) {
  if (!cfg.spec.is_canonical()) throw ConfigError(std::string(what) + " needs the canonical P = Q' = [0,1] spec");
}

template <Scalar T>
Point<T> parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("point must be x,y: " + text);
  try {
    return {parse_scalar<T>(text.substr(0, comma)), parse_scalar<T>(text.substr(comma + 1))};
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad point: " + text);
  }
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(static_cast<std::int64_t>(std::stod(item)));
    } catch (const std::exception&) {
      throw ConfigError("bad integer list: " + text);
    }
  }
  return out;
}

std::string num(double v) { return csv_number(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------- orbit

template <Scalar T>
void orbit_impl(const RunConfig& cfg, const std::string& point, const std::string& kind_name, std::int64_t steps) {
  LinkedTwistMap<T> map(cfg.spec.convert<T>());
  const auto z = parse_point<T>(point);
  MapKind kind;
  if (kind_name == "F") kind = MapKind::F;
  else if (kind_name == "G") kind = MapKind::G;
  else if (kind_name == "H") kind = MapKind::H;
  else if (kind_name == "HS") kind = MapKind::HS;
  else throw ConfigError("--map must be F, G, H or HS");
  if (!map.in_R(z)) throw ConfigError("point outside R");
  std::cout << "0 " << to_string(z.x) << " " << to_string(z.y) << "\n";
  const auto path = map.orbit(z, kind, steps);
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::cout << i + 1 << " " << to_string(path[i].x) << " " << to_string(path[i].y) << "\n";
  }
}

// ---------------------------------------------------------------- classify

template <Scalar T>
std::string classify_text(const LinkedTwistMap<T>& map, const Point<T>& z, bool sigma2) {
  const auto l = classify_S(map, z);
  std::string s = "j=" + std::to_string(l.j) + " k=" + std::to_string(l.k) + " n=" + std::to_string(l.n);
  if (sigma2) {
    const auto l2 = classify_sigma2(map, z);
    s += " sigma2: (" + std::to_string(l2.j1) + "," + std::to_string(l2.k1) + "|" + std::to_string(l2.j2) + "," +
         std::to_string(l2.k2) + ") n=" + std::to_string(l2.n);
  }
  return s;
}

template <Scalar T>
void classify_impl(const RunConfig& cfg, const std::vector<std::string>& points, int grid, bool sigma2) {
  LinkedTwistMap<T> map(cfg.spec.convert<T>());
  for (const auto& p : points) {
    const auto z = parse_point<T>(p);
    if (!map.in_S(z)) throw ConfigError("point outside S: " + p);
    std::cout << classify_text(map, z, sigma2) << "\n";
  }
  if (grid > 0) {
    Stopwatch sw;
    const auto path = output_path(cfg, "classify_grid.csv");
    CsvWriter csv(path, {"x", "y", "j", "k", "n"});
    const auto& s = map.spec();
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        // Cell centres of a grid x grid lattice on S.
        const T x = s.q0 + (s.q1 - s.q0) * from_ratio<T>(2 * a + 1, 2 * grid);
        const T y = s.p0 + (s.p1 - s.p0) * from_ratio<T>(2 * b + 1, 2 * grid);
        const auto l = classify_S(map, Point<T>{x, y});
        csv.row({to_string(x), to_string(y), num(l.j), num(l.k), num(l.n)});
      }
    }
    write_sidecar(path, cfg, "return-time labels on a grid of S", sw.seconds(), {{"grid", grid}});
    std::cout << "wrote " << path << "\n";
  }
}

// ---------------------------------------------------------------- cells

int cmd_cells(const RunConfig& cfg) {
  require_float(cfg, "cells");
  const auto map = float_map(cfg);
  Stopwatch sw;
  const std::int64_t n_top = std::max<std::int64_t>(cfg.n_max, 30);
  const auto hist = cell_histogram(map, cfg.samples, cfg.seed, n_top);
  const auto path = output_path(cfg, "cells.csv");
  {
    CsvWriter csv(path, {"n", "mu_S", "stderr", "hits"});
    for (std::int64_t n = 1; n <= n_top; ++n) {
      const auto m = hist.cell(n);
      csv.row({num(n), num(m.value), num(m.std_err), num(m.hits)});
    }
  }
  std::vector<double> x, y;
  for (std::int64_t n = 2; n <= 30; ++n) {
    x.push_back(static_cast<double>(n));
    y.push_back(hist.cell(n).value);
  }
  const auto fit = fit_loglog(x, y);
  write_sidecar(path, cfg, "cell measures mu_S(S_n)", sw.seconds(),
                {{"fit_window", "2..30"}, {"slope", fit.slope}, {"overflow", hist.overflow}});
  std::cout << "mu_S(S_1) = " << hist.cell(1).value << " +- " << hist.cell(1).std_err << "\n";
  std::cout << "log-log slope of mu_S(S_n), n in [2,30]: " << fit.slope << " (r^2 " << fit.r2 << ")\n";

  Stopwatch sw2;
  const auto tpath = output_path(cfg, "tail_H.csv");
  std::vector<double> mx, my;
  {
    CsvWriter csv(tpath, {"m", "mu_tail", "stderr"});
    for (std::int64_t m = 10; m <= 100; m += 10) {
      const auto t = tail_measure_H(map, m, cfg.samples, cfg.seed);
      csv.row({num(m), num(t.value), num(t.std_err)});
      mx.push_back(static_cast<double>(m));
      my.push_back(t.value);
    }
  }
  const auto tfit = fit_loglog(mx, my);
  write_sidecar(tpath, cfg, "tail measure of S_N, N >= m", sw2.seconds(), {{"slope", tfit.slope}});
  std::cout << "log-log slope of the tail measure, m in [10,100]: " << tfit.slope << "\n";
  std::cout << "wrote " << path << " and " << tpath << "\n";
  return 0;
}

// ---------------------------------------------------------------- sigma

int cmd_sigma(const RunConfig& cfg) {
  require_canonical(cfg, "sigma");
  Stopwatch sw;
  const auto n_top = std::max<std::int64_t>(2, std::min<std::int64_t>(cfg.n_max, 1000));
  const auto path = output_path(cfg, "sigma_lines.csv");
  {
    CsvWriter csv(path, {"family", "n", "ax", "ay", "bx", "by"});
    for (const auto& fam : {sigmaF_lines<Rational>(n_top), sigmaG_lines<Rational>(n_top)}) {
      for (const auto& l : fam) {
        csv.row({family_name(l.family), num(l.index), to_string(l.a.x), to_string(l.a.y), to_string(l.b.x),
                 to_string(l.b.y)});
      }
    }
  }
  write_sidecar(path, cfg, "explicit singular lines near the corners", sw.seconds());

  Stopwatch sw2;
  const auto xpath = output_path(cfg, "sigma_crossings.csv");
  const auto n_cross = std::min<std::int64_t>(n_top, 50);
  {
    CsvWriter csv(xpath, {"n", "y_expected", "y_rational", "y_float", "float_error"});
    LinkedTwistMap<double> fm;
    LinkedTwistMap<Rational> rm;
    const auto lines = sigmaF_lines<Rational>(n_cross + 10);
    for (std::int64_t n = 2; n <= n_cross; ++n) {
      const Rational yr(1, 2 * n), er(1, 32 * n * n);
      const auto q = locate_boundary_exact(rm, Point<Rational>{1, yr - er}, Point<Rational>{1, yr + er}, lines);
      const double y = yr.get_d(), e = er.get_d();
      const auto p = locate_boundary(fm, Point<double>{1, y - e}, Point<double>{1, y + e}, 1e-13);
      csv.row({num(n), to_string(yr), to_string(q.y), num(p.y), num(std::abs(p.y - y))});
    }
  }
  write_sidecar(xpath, cfg, "bisection-located crossings of sigma with x = 1", sw2.seconds());
  std::cout << "wrote " << path << " and " << xpath << "\n";
  return 0;
}

// ---------------------------------------------------------------- cones

int cmd_cones(const RunConfig& cfg) {
  require_float(cfg, "cones");
  const auto map = float_map(cfg);
  Stopwatch sw;
  std::uint64_t bad_f = 0, bad_b = 0;
  double min_f = 1e300, min_b = 1e300;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    auto rng = make_rng(cfg.seed, Stream::Properties, i);
    const auto z = sample_S(rng, map.spec());
    const double a = rng.uniform(), b = rng.uniform();
    const auto f = cone_step(map, z, Vec2<double>{a, 1.0}, Direction::Forward);
    const auto bk = cone_step(map, z, Vec2<double>{-1.0, b}, Direction::Backward);
    bad_f += !(f.in_cone && f.expands);
    bad_b += !(bk.in_cone && bk.expands);
    min_f = std::min(min_f, f.ratio);
    min_b = std::min(min_b, bk.ratio);
  }
  const auto path = output_path(cfg, "cones.csv");
  {
    CsvWriter csv(path, {"direction", "samples", "violations", "min_ratio"});
    csv.row({"forward", num(cfg.samples), num(bad_f), num(min_f)});
    csv.row({"backward", num(cfg.samples), num(bad_b), num(min_b)});
  }
  write_sidecar(path, cfg, "cone invariance and expansion sweep", sw.seconds());
  std::cout << "forward: " << bad_f << " violations, min ratio " << min_f << "\n"
            << "backward: " << bad_b << " violations, min ratio " << min_b << "\n";
  if (bad_f || bad_b) throw AssertionFailure("cone violations found");
  return 0;
}

// ---------------------------------------------------------------- lyapunov

int cmd_lyapunov(const RunConfig& cfg, std::int64_t iterations) {
  require_float(cfg, "lyapunov");
  const auto map = float_map(cfg);
  Stopwatch sw;
  const auto path = output_path(cfg, "lyapunov.csv");
  CsvWriter csv(path, {"map", "points", "iterations", "mean", "stderr", "min", "max", "overflow"});
  for (auto [which, name] : {std::pair{LyapunovMap::HS, "H_S"}, std::pair{LyapunovMap::H, "H"}}) {
    const auto e = lyapunov_ensemble(map, which, cfg.samples, iterations, cfg.seed);
    csv.row({name, num(e.count), num(iterations), num(e.mean), num(e.std_err), num(e.min), num(e.max),
             num(e.overflow)});
    std::cout << name << ": " << e.mean << " +- " << e.std_err << " over " << e.count << " points\n";
  }
  write_sidecar(path, cfg, "Lyapunov exponents of H and H_S", sw.seconds(), {{"iterations", iterations}});
  std::cout << "half log 5 = " << 0.5 * std::log(5.0) << "\nwrote " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------- onestep

int cmd_onestep(const RunConfig& cfg, const std::vector<double>& deltas, bool directional) {
  require_canonical(cfg, "onestep");
  LinkedTwistMap<double> map;
  Stopwatch sw;
  const auto path = output_path(cfg, "onestep.csv");
  {
    CsvWriter csv(path, {"delta", "mode", "components", "sum_inv"});
    const double slope = 1 + std::numbers::sqrt2;
    OneStepOptions opt;
    opt.mode = directional ? ExpansionMode::Directional : ExpansionMode::Eigenvalue;
    for (double d : deltas) {
      const double dx = d / std::hypot(1.0, slope);
      const Segment<double> seg{{1.0 - dx, 0.0}, {1.0, dx * slope}};
      const auto rep = one_step_sum(map, seg, opt);
      csv.row({num(d), directional ? "directional" : "eigenvalue", num(rep.n_components), num(rep.sum_inv)});
      std::cout << "delta " << d << ": " << rep.n_components << " components, sum 1/lambda = " << rep.sum_inv << "\n";
    }
  }
  write_sidecar(path, cfg, "one-step expansion sums of corner segments", sw.seconds());
  const auto spath = output_path(cfg, "onestep_series.csv");
  {
    CsvWriter csv(spath, {"N", "partial_sum", "limit"});
    const double limit = std::log(3 + 2 * std::numbers::sqrt2) / 24.0;
    for (std::int64_t N = 10; N <= 100'000; N *= 10) csv.row({num(N), num(one_step_partial_series(N)), num(limit)});
  }
  write_sidecar(spath, cfg, "partial series of 1/(24 n)", 0.0);
  std::cout << "wrote " << path << " and " << spath << "\n";
  return 0;
}

// ---------------------------------------------------------------- manifold

int cmd_manifold(const RunConfig& cfg, int generations, std::size_t budget, int power) {
  require_canonical(cfg, "manifold");
  LinkedTwistMap<double> map;
  Stopwatch sw;
  IterateOptions opt;
  opt.budget = budget;
  opt.power = power;
  const auto gens = iterate_segments(map, figure5_seed(map), generations, opt);
  const auto het = heteroclinic_scan(gens, local_stable_segment(map));
  const auto path = output_path(cfg, "manifold.csv");
  std::uint64_t violations = 0;
  {
    CsvWriter csv(path, {"generation", "components", "total_length", "pruned_count", "pruned_length",
                         "min_vertical_growth", "doubling_violations", "unresolved", "vertical_crossing",
                         "stable_crossing"});
    for (const auto& g : gens) {
      violations += g.doubling_violations;
      csv.row({num(static_cast<std::int64_t>(g.index)), num(static_cast<std::uint64_t>(g.components.size())),
               num(g.total_length), num(g.pruned_count), num(g.pruned_length), num(g.min_vertical_growth),
               num(g.doubling_violations), num(g.unresolved),
               has_vertical_crossing(g.components, map.spec()) ? "1" : "0",
               het.crossed[static_cast<std::size_t>(g.index)] ? "1" : "0"});
    }
  }
  write_sidecar(path, cfg, "unstable segment growth from the corner seed", sw.seconds(),
                {{"budget", budget}, {"power", power}});
  std::cout << "first stable crossing: "
            << (het.first_generation ? std::to_string(*het.first_generation) : std::string("none"))
            << "; doubling violations: " << violations << "\nwrote " << path << "\n";
  if (violations) throw AssertionFailure("vertical doubling violated");
  return 0;
}

// ---------------------------------------------------------------- correlate

void write_series(const std::string& path, const CorrSeries& s) {
  CsvWriter csv(path, {"n", "C_n", "stderr", "n_eff"});
  for (const auto& e : s.entries) {
    if (e.n == 0) continue;
    csv.row({num(e.n), num(e.c), num(e.std_err), num(e.n_eff)});
  }
}

int cmd_correlate(const RunConfig& cfg, const std::string& phi, const std::string& psi, const std::string& which,
                  bool null_model) {
  require_float(cfg, "correlate");
  const auto map = float_map(cfg);
  CorrelationOptions opt;
  opt.n_max = cfg.n_max;
  opt.ensemble = cfg.ensemble;
  opt.seed = cfg.seed;
  opt.null_model = null_model;
  const auto& f = builtin_observable(phi);
  const auto& g = builtin_observable(psi);
  const nlohmann::json obs = {{"phi", phi}, {"psi", psi}, {"null_model", null_model}};
  if (which == "H" || which == "both") {
    Stopwatch sw;
    const auto s = estimate_correlation(map, f, g, opt);
    const auto path = output_path(cfg, "corr_H.csv");
    write_series(path, s);
    const auto fit = fit_correlation_decay(s, 5, cfg.n_max, false);
    auto meta = obs;
    meta["C_0"] = s.entries[0].c;
    meta["loglog_slope"] = fit.fit.slope;
    meta["fit_points"] = fit.fit.points;
    write_sidecar(path, cfg, "correlation decay of H", sw.seconds(), meta);
    std::cout << "H: log-log slope " << fit.fit.slope << " over " << fit.fit.points << " points; wrote " << path
              << "\n";
  }
  if (which == "HS" || which == "both") {
    Stopwatch sw;
    const auto s = estimate_correlation_HS(map, f, g, opt);
    const auto path = output_path(cfg, "corr_HS.csv");
    write_series(path, s);
    const auto fit = fit_correlation_decay(s, 1, cfg.n_max, true);
    auto meta = obs;
    meta["C_0"] = s.entries[0].c;
    meta["semilog_slope"] = fit.fit.slope;
    meta["fit_points"] = fit.fit.points;
    meta["skipped"] = s.skipped;
    write_sidecar(path, cfg, "correlation decay of H_S", sw.seconds(), meta);
    std::cout << "H_S: semilog slope " << fit.fit.slope << " over " << fit.fit.points << " points; wrote " << path
              << "\n";
    if (s.skipped) {
      std::cerr << s.skipped << " samples hit the return cap\n";
      return kExitOverflow;
    }
  }
  if (which != "H" && which != "HS" && which != "both") throw ConfigError("--map must be H, HS or both");
  return 0;
}

// ---------------------------------------------------------------- markarian

int cmd_markarian(const RunConfig& cfg, std::optional<double> b_opt, const std::string& ns_text, double beta,
                  std::uint64_t iso_samples) {
  require_float(cfg, "markarian");
  const auto map = float_map(cfg);
  double b = 0;
  double theta = 0;
  if (b_opt) {
    b = *b_opt;
  } else {
    CorrelationOptions opt;
    opt.n_max = 30;
    opt.ensemble = cfg.ensemble;
    opt.seed = cfg.seed;
    const auto& ox = builtin_observable("obs_x");
    const auto fit = fit_correlation_decay(estimate_correlation_HS(map, ox, ox, opt), 1, 30, true);
    if (fit.fit.points < 2 || fit.fit.slope >= 0) throw AssertionFailure("no H_S decay rate to derive b from");
    theta = std::exp(fit.fit.slope);
    b = 2.0 / std::log(1.0 / theta);
    std::cout << "theta-hat " << theta << " -> b = " << b << "\n";
  }
  const auto ns = parse_int_list(ns_text);

  Stopwatch sw;
  const auto path = output_path(cfg, "markarian.csv");
  std::vector<double> xs, fr;
  std::uint64_t overflow = 0;
  {
    CsvWriter csv(path, {"n", "b", "frac_B", "beta_hat", "complement_frac"});
    for (auto n : ns) {
      const auto r = markarian_scan(map, n, b, cfg.samples, cfg.seed);
      overflow += r.overflow;
      csv.row({num(n), num(b), num(r.frac_B), num(r.beta_hat), num(r.complement_frac)});
      xs.push_back(static_cast<double>(n));
      fr.push_back(r.complement_frac);
    }
  }
  const auto cfit = fit_loglog(xs, fr);
  write_sidecar(path, cfg, "Markarian decomposition diagnostics", sw.seconds(),
                {{"theta_hat", theta}, {"complement_slope", cfit.slope}, {"overflow", overflow}});
  std::cout << "complement-fraction slope " << cfit.slope << "\n";

  Stopwatch sw2;
  const auto ipath = output_path(cfg, "isolation.csv");
  const auto iso = isolation_scan(map, log_grid(10, 10'000, 4), iso_samples, cfg.seed);
  std::vector<double> lx, yv;
  {
    CsvWriter csv(ipath, {"n", "min_max_N", "samples"});
    for (const auto& r : iso.rows) {
      csv.row({num(r.n), num(r.min_max_N), num(r.samples)});
      if (r.samples) {
        lx.push_back(std::log(static_cast<double>(r.n)));
        yv.push_back(static_cast<double>(r.min_max_N));
      }
    }
  }
  const auto ifit = fit_line(lx, yv);
  write_sidecar(ipath, cfg, "isolation of large return times", sw2.seconds(), {{"slope_vs_ln_n", ifit.slope}});
  std::cout << "isolation depth slope vs ln n " << ifit.slope << "\n";

  Stopwatch sw3;
  const auto tpath = output_path(cfg, "tail_decomposition.csv");
  {
    CsvWriter csv(tpath, {"n", "beta", "forward", "backward", "either"});
    for (auto n : ns) {
      const auto t = tail_decomposition(map, n, beta, cfg.samples, cfg.seed);
      csv.row({num(n), num(beta), num(t.forward), num(t.backward), num(t.either)});
    }
  }
  write_sidecar(tpath, cfg, "long-return tail along H-orbits", sw3.seconds());
  std::cout << "wrote " << path << ", " << ipath << " and " << tpath << "\n";
  return overflow ? kExitOverflow : 0;
}

// ---------------------------------------------------------------- acceptance

int cmd_acceptance(const RunConfig& cfg, const std::vector<int>& only) {
  require_canonical(cfg, "acceptance");
  Stopwatch sw;
  const auto report = run_acceptance(parse_profile(cfg.profile), cfg.seed, {only.begin(), only.end()}, &std::cout);
  const auto path = output_path(cfg, "acceptance.csv");
  {
    CsvWriter csv(path, {"criterion", "title", "result", "measured", "expected", "seconds"});
    for (const auto& r : report.results) {
      csv.row({std::to_string(r.id), r.title, r.pass ? "PASS" : "FAIL", r.measured, r.expected, num(r.seconds)});
    }
  }
  write_sidecar(path, cfg, "acceptance suite", sw.seconds());
  return report.all_pass() ? 0 : kExitAssert;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linked-twist map workbench"};
  app.require_subcommand(1);

  Overrides ov;
  std::string point = "0.5,0.5", map_kind = "H";
  std::int64_t steps = 10;
  auto* orbit = app.add_subcommand("orbit", "iterate a point under F, G, H or H_S");
  add_common(orbit, ov);
  orbit->add_option("--point", point);
  orbit->add_option("--map", map_kind)->check(CLI::IsMember({"F", "G", "H", "HS"}));
  orbit->add_option("--steps", steps);

  std::vector<std::string> points;
  int grid = 0;
  bool sigma2 = false;
  auto* classify = app.add_subcommand("classify", "return-time labels (j,k,n) of points or a grid");
  add_common(classify, ov);
  classify->add_option("--point", points);
  classify->add_option("--grid", grid);
  classify->add_flag("--sigma2", sigma2, "also print the two-step itinerary");

  auto* cells = app.add_subcommand("cells", "cell measures, tail measure and slope fits");
  add_common(cells, ov);
  auto* sigma = app.add_subcommand("sigma", "singular line families and located crossings");
  add_common(sigma, ov);
  auto* cones = app.add_subcommand("cones", "cone invariance and expansion sweep");
  add_common(cones, ov);

  std::int64_t iterations = 10'000;
  auto* lyap = app.add_subcommand("lyapunov", "ensemble Lyapunov exponents of H and H_S");
  add_common(lyap, ov);
  lyap->add_option("--iterations", iterations);

  std::vector<double> deltas{1e-2, 1e-3, 1e-4, 1e-5};
  bool directional = false;
  auto* onestep = app.add_subcommand("onestep", "one-step expansion sums and the partial series");
  add_common(onestep, ov);
  onestep->add_option("--deltas", deltas)->delimiter(',');
  onestep->add_flag("--directional", directional, "use directional growth factors instead of eigenvalues");

  int generations = 200, power = 1;
  std::size_t budget = 1000;
  auto* manifold = app.add_subcommand("manifold", "iterate the corner seed and probe the stable segment of c");
  add_common(manifold, ov);
  manifold->add_option("--generations", generations);
  manifold->add_option("--budget", budget);
  manifold->add_option("--power", power)->check(CLI::IsMember({1, 2}));

  std::string phi = "obs_x", psi = "obs_x", which = "both";
  bool null_model = false;
  auto* correlate = app.add_subcommand("correlate", "correlation series for H and H_S");
  add_common(correlate, ov);
  correlate->add_option("--phi", phi);
  correlate->add_option("--psi", psi);
  correlate->add_option("--map", which);
  correlate->add_flag("--null", null_model, "evaluate psi on an independent resample");

  std::optional<double> b;
  std::string ns = "100,1000,10000";
  double beta = 0.5;
  std::uint64_t iso_samples = 50;
  auto* markarian = app.add_subcommand("markarian", "Markarian scan, isolation scan and tail decomposition");
  add_common(markarian, ov);
  markarian->add_option("--b", b, "threshold factor (default 2/ln(1/theta-hat))");
  markarian->add_option("--ns", ns);
  markarian->add_option("--beta", beta);
  markarian->add_option("--isolation-samples", iso_samples);

  std::vector<int> only;
  auto* acceptance = app.add_subcommand("acceptance", "run the acceptance criteria");
  add_common(acceptance, ov);
  acceptance->add_option("--only", only, "criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(ov);
    if (*orbit) {
      if (cfg.backend == Backend::Rational) orbit_impl<Rational>(cfg, point, map_kind, steps);
      else orbit_impl<double>(cfg, point, map_kind, steps);
      return 0;
    }
    if (*classify) {
      if (points.empty() && grid == 0) throw ConfigError("classify needs --point or --grid");
      if (cfg.backend == Backend::Rational) classify_impl<Rational>(cfg, points, grid, sigma2);
      else classify_impl<double>(cfg, points, grid, sigma2);
      return 0;
    }
    if (*cells) return cmd_cells(cfg);
    if (*sigma) return cmd_sigma(cfg);
    if (*cones) return cmd_cones(cfg);
    if (*lyap) return cmd_lyapunov(cfg, iterations);
    if (*onestep) return cmd_onestep(cfg, deltas, directional);
    if (*manifold) return cmd_manifold(cfg, generations, budget, power);
    if (*correlate) return cmd_correlate(cfg, phi, psi, which, null_model);
    if (*markarian) return cmd_markarian(cfg, b, ns, beta, iso_samples);
    if (*acceptance) return cmd_acceptance(cfg, only);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ReturnTimeOverflow& e) {
    std::cerr << "overflow: " << e.what() << "\n";
    return kExitOverflow;
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return kExitAssert;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssert;
  }
  return 0;
}
