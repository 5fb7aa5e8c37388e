#pragma once

// Fixed-shard parallel reduction. Shards are a pure function of the sample
// count, partial results are merged in shard order, so results do not depend
// on the number of OpenMP threads.

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ltm {

inline constexpr std::uint64_t kShardSize = 1u << 14;

inline void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// `work(begin, end)` returns a partial of type Acc; `merge(acc, partial)`
/// folds partials left to right.
template <class Acc, class Work, class Merge>
Acc sharded_reduce(std::uint64_t total, Acc init, Work work, Merge merge,
                   std::uint64_t shard_size = kShardSize) {
  const std::uint64_t shards = (total + shard_size - 1) / shard_size;
  std::vector<Acc> partial(shards, init);
  const auto count = static_cast<std::int64_t>(shards);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t s = 0; s < count; ++s) {
    const std::uint64_t begin = static_cast<std::uint64_t>(s) * shard_size;
    const std::uint64_t end = std::min(total, begin + shard_size);
    partial[static_cast<std::size_t>(s)] = work(begin, end);
  }
  Acc acc = std::move(init);
  for (auto& p : partial) merge(acc, p);
  return acc;
}

}  // namespace ltm
