#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qkr::internal {

// Per-chunk partial sums. Trajectories within a chunk run in index order;
// chunks are merged in index order afterwards, so the reduction is
// bit-identical for any worker count and any scheduling.
struct Accumulator {
  std::vector<double> hist;
  std::vector<double> p2_sum;
  std::vector<double> pi0;  // one entry per trajectory, in index order
  std::int64_t se_events = 0;
};

inline constexpr std::int64_t kChunk = 32;

inline void run_chunks(
    std::int64_t n_traj, int threads, std::size_t hist_size,
    std::size_t series_size,
    const std::function<void(std::int64_t, Accumulator&)>& traj_fn,
    Accumulator& total) {
  const std::int64_t n_chunks = (n_traj + kChunk - 1) / kChunk;
  std::vector<Accumulator> parts(static_cast<std::size_t>(n_chunks));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      Accumulator& acc = parts[static_cast<std::size_t>(c)];
      acc.hist.assign(hist_size, 0.0);
      acc.p2_sum.assign(series_size, 0.0);
      const std::int64_t lo = c * kChunk;
      const std::int64_t hi = std::min(n_traj, lo + kChunk);
      acc.pi0.reserve(static_cast<std::size_t>(hi - lo));
      try {
        for (std::int64_t t = lo; t < hi; ++t) traj_fn(t, acc);
      } catch (...) {
        std::scoped_lock lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  total.hist.assign(hist_size, 0.0);
  total.p2_sum.assign(series_size, 0.0);
  total.pi0.clear();
  total.pi0.reserve(static_cast<std::size_t>(n_traj));
  total.se_events = 0;
  for (const Accumulator& part : parts) {
    for (std::size_t i = 0; i < hist_size; ++i) total.hist[i] += part.hist[i];
    for (std::size_t i = 0; i < series_size; ++i)
      total.p2_sum[i] += part.p2_sum[i];
    total.pi0.insert(total.pi0.end(), part.pi0.begin(), part.pi0.end());
    total.se_events += part.se_events;
  }
}

}  // namespace qkr::internal
