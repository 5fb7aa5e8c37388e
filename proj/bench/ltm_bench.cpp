// Serial reference kernels against their OpenMP counterparts: wall time and
// agreement of the results.

#include "ltm/cocycle.hpp"
#include "ltm/parallel.hpp"
#include "ltm/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

using namespace ltm;

namespace {

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double t_serial, double t_parallel, bool same) {
  std::printf("%-22s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   results %s\n", name, t_serial,
              t_parallel, t_serial / t_parallel, same ? "match" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernels"};
  std::uint64_t samples = 2'000'000, ensemble = 200'000, points = 200;
  int threads = 0;
  app.add_option("--samples", samples);
  app.add_option("--ensemble", ensemble);
  app.add_option("--points", points);
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);
  std::printf("threads: %d\n", thread_count());

  const LinkedTwistMap<double> map;
  bool all_same = true;

  {
    CellHistogram a, b;
    const double ts = timed([&] { a = serial::cell_histogram(map, samples, 1, 200); });
    const double tp = timed([&] { b = cell_histogram(map, samples, 1, 200); });
    const bool same = a.counts == b.counts && a.beyond == b.beyond;
    all_same = all_same && same;
    report("cell_histogram", ts, tp, same);
  }
  {
    MeasureEstimate a, b;
    const double ts = timed([&] { a = serial::neighborhood_measure(map, 1e-3, samples / 10, 1); });
    const double tp = timed([&] { b = neighborhood_measure(map, 1e-3, samples / 10, 1); });
    const bool same = a.hits == b.hits;
    all_same = all_same && same;
    report("neighborhood_measure", ts, tp, same);
  }
  {
    EnsembleEstimate a, b;
    const double ts = timed([&] { a = serial::lyapunov_ensemble(map, LyapunovMap::HS, points, 10'000, 1); });
    const double tp = timed([&] { b = lyapunov_ensemble(map, LyapunovMap::HS, points, 10'000, 1); });
    const bool same = a.mean == b.mean && a.count == b.count;
    all_same = all_same && same;
    report("lyapunov_ensemble", ts, tp, same);
  }
  {
    CorrelationOptions opt;
    opt.ensemble = ensemble;
    const auto& ox = builtin_observable("obs_x");
    CorrSeries a, b;
    const double ts = timed([&] { a = serial::estimate_correlation(map, ox, ox, opt); });
    const double tp = timed([&] { b = estimate_correlation(map, ox, ox, opt); });
    // Shard sums are merged in a different association order, so compare to
    // a few ulps of the standard error rather than bitwise.
    bool same = a.entries.size() == b.entries.size();
    for (std::size_t i = 0; same && i < a.entries.size(); ++i) {
      same = std::abs(a.entries[i].c - b.entries[i].c) <= 1e-12;
    }
    all_same = all_same && same;
    report("estimate_correlation", ts, tp, same);
  }
  return all_same ? 0 : 1;
}
