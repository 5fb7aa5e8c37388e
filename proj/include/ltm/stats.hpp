#pragma once

// Correlation estimators for H and H_S, return-count statistics along H-orbits
// (r, N_max), the Markarian scan, isolation of large returns and tail sums.

#include "ltm/partition.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ltm {

struct Observable {
  std::string name;
  std::function<double(const Point<double>&)> eval;
  double holder_alpha = 1.0;
  double holder_const = 0.0;
  bool mean_zero = false;
};

/// cos(pi x), cos(pi y) and cos(pi x) cos(pi y); each has zero mean over R.
std::vector<Observable> builtin_observables();
const Observable& builtin_observable(const std::string& name);

struct CorrEntry {
  std::int64_t n = 0;
  double c = 0;
  double std_err = 0;
  std::uint64_t n_eff = 0;
};

struct CorrSeries {
  std::vector<CorrEntry> entries;  // n = 0..n_max
  std::uint64_t ensemble = 0;
  std::uint64_t seed = 0;
  std::uint64_t skipped = 0;  // samples lost to ReturnTimeOverflow
  bool null_model = false;
};

struct CorrelationOptions {
  std::int64_t n_max = 60;
  std::uint64_t ensemble = 1'000'000;
  std::uint64_t seed = 1;
  /// Evaluate psi on an independent resample (the estimator's null model).
  bool null_model = false;
};

/// C_n = E[phi(H^n z) psi(z)] over z uniform in R (psi is mean zero).
CorrSeries estimate_correlation(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                const CorrelationOptions& opt);

/// Same estimator for H_S with z uniform in S.
CorrSeries estimate_correlation_HS(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                   const CorrelationOptions& opt);

namespace serial {
CorrSeries estimate_correlation(const LinkedTwistMap<double>& map, const Observable& phi, const Observable& psi,
                                const CorrelationOptions& opt);
}

/// Number of i in [1, n] with H^i(z) in S. If stop_above >= 0, counting stops
/// once the count exceeds it.
std::int64_t r_count(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t n,
                     std::int64_t stop_above = -1);

/// max over 0 <= i <= n of Rtn(H^i z; H, S).
std::int64_t n_max_stat(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t n);

struct MarkarianRecord {
  std::int64_t n = 0;
  double b = 0;
  double frac_B = 0;            // fraction with r > b ln n
  double complement_frac = 0;   // 1 - frac_B
  double beta_hat = 0;          // min N_max / n over the complement (0 if empty)
  std::uint64_t samples = 0;
  std::uint64_t complement = 0;
  std::uint64_t overflow = 0;
};

MarkarianRecord markarian_scan(const LinkedTwistMap<double>& map, std::int64_t n, double b, std::uint64_t samples,
                               std::uint64_t seed);

struct IsolationRow {
  std::int64_t n = 0;
  std::int64_t min_max_N = 0;
  double mean_max_N = 0;
  std::uint64_t samples = 0;  // accepted points with label n
};

struct IsolationStats {
  std::vector<IsolationRow> rows;
};

/// Largest N with H_S^{+-i}(z) in S_1 for all 1 <= i <= N (capped at `cap`).
std::int64_t isolation_depth(const LinkedTwistMap<double>& map, const Point<double>& z, std::int64_t cap = 1000);

/// For each n in `ns`, draws points near p and q conditioned on label n and
/// records the smallest isolation depth.
IsolationStats isolation_scan(const LinkedTwistMap<double>& map, const std::vector<std::int64_t>& ns,
                              std::uint64_t samples_per_n, std::uint64_t seed);

/// n values on a roughly logarithmic grid in [n_lo, n_hi].
std::vector<std::int64_t> log_grid(std::int64_t n_lo, std::int64_t n_hi, int per_decade = 4);

struct TailRecord {
  std::int64_t n = 0;
  double beta = 0;
  double forward = 0;   // mu{z in R : some visit H^i z in S, i <= n, has forward return >= beta n}
  double backward = 0;  // same with the H_S^{-1} return time
  double either = 0;
  std::uint64_t samples = 0;
};

TailRecord tail_decomposition(const LinkedTwistMap<double>& map, std::int64_t n, double beta, std::uint64_t samples,
                              std::uint64_t seed);

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
  std::size_t points = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares of log y against log x (entries with y <= 0 are dropped).
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares of log y against x.
LinearFit fit_semilog(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
  LinearFit fit;
  std::vector<std::int64_t> window;  // n values kept
};

/// Fit of log|C_n| against log n (or n, when semilog) over n >= n_min,
/// keeping entries with |C_n| >= k_sigma * stderr.
DecayFit fit_correlation_decay(const CorrSeries& s, std::int64_t n_min, std::int64_t n_max, bool semilog,
                               double k_sigma = 3.0);

}  // namespace ltm
