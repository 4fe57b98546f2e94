#pragma once

// Deterministic parallel replica driver. Replicas are grouped into fixed-size
// blocks; block i always draws from SeededRng(seed, i) and block accumulators
// are merged in block order, so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "equigrid/random.hpp"

namespace equigrid {

/// Single-pass mean/variance with associative merge.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) noexcept {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) noexcept {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += o.m2 + d * d * n1 * n2 / n;
    count += o.count;
  }

  /// Unbiased sample variance (0 for fewer than two samples).
  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const noexcept {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline constexpr std::size_t kReplicaBlock = 1024;

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs blocks [first, last) and returns the merged accumulator.
/// `make_worker()` is called once per thread and must return a callable
/// `double(SeededRng&)` producing one replica.
template <class WorkerFactory>
RunningStats run_replica_blocks(std::size_t first_block, std::size_t last_block, std::size_t total_replicas,
                                std::uint64_t seed, unsigned workers, WorkerFactory&& make_worker) {
  if (last_block <= first_block) return {};
  const std::size_t nblocks = last_block - first_block;
  std::vector<RunningStats> partial(nblocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto body = [&] {
    try {
      auto replica = make_worker();
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= nblocks) break;
        const std::size_t block = first_block + i;
        const std::size_t begin = block * kReplicaBlock;
        const std::size_t end = std::min(total_replicas, begin + kReplicaBlock);
        SeededRng rng(seed, block);
        RunningStats s;
        for (std::size_t r = begin; r < end; ++r) s.push(replica(rng));
        partial[i] = s;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(nblocks);
    }
  };

  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), nblocks));
  if (nthreads == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);

  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  return total;
}

template <class WorkerFactory>
RunningStats run_replicas(std::size_t replicas, std::uint64_t seed, unsigned workers, WorkerFactory&& make_worker) {
  const std::size_t nblocks = (replicas + kReplicaBlock - 1) / kReplicaBlock;
  return run_replica_blocks(0, nblocks, replicas, seed, workers, make_worker);
}

/// Runs batches of `batch_blocks` blocks until `done(stats)` holds or
/// `max_replicas` is reached. The stopping decision is taken only at batch
/// boundaries, which keeps the outcome independent of the worker count.
template <class WorkerFactory, class StopRule>
RunningStats run_replicas_until(std::size_t min_replicas, std::size_t max_replicas, std::uint64_t seed,
                                unsigned workers, WorkerFactory&& make_worker, StopRule&& done,
                                std::size_t batch_blocks = 16) {
  const std::size_t max_blocks = (max_replicas + kReplicaBlock - 1) / kReplicaBlock;
  RunningStats total;
  std::size_t block = 0;
  while (block < max_blocks) {
    const std::size_t last = std::min(max_blocks, block + batch_blocks);
    total.merge(run_replica_blocks(block, last, max_replicas, seed, workers, make_worker));
    block = last;
    if (total.count >= min_replicas && done(total)) break;
  }
  return total;
}

}  // namespace equigrid
