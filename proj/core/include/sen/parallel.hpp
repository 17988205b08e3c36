#ifndef SEN_PARALLEL_HPP
#define SEN_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sen {

/// Deterministic chunked reduction: the index range [0, n) is cut into
/// fixed-size chunks, each chunk is reduced sequentially, and the chunk
/// partials are summed in chunk order. The result is bit-identical for any
/// thread count because neither the chunking nor the merge order depends
/// on scheduling.
template <typename ChunkFn>
double chunked_reduce(std::size_t n, ChunkFn&& chunk_fn, int threads,
                      std::size_t chunk_size = 64) {
  if (n == 0) return 0.0;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<double> partials(n_chunks, 0.0);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * chunk_size;
    const std::size_t hi = std::min(n, lo + chunk_size);
    partials[c] = chunk_fn(lo, hi);
  };

  if (threads <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        run_chunk(c);
      }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(n_chunks));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

/// Runs fn(i) for i in [0, n) across workers with a static chunk-to-worker
/// assignment (chunk c goes to worker c mod W). Used where per-worker
/// accumulation buffers must be merged in a fixed order.
template <typename Fn>
void for_each_chunk_static(std::size_t n, int threads, std::size_t chunk_size,
                           Fn&& fn) {
  if (n == 0) return;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  const int n_workers =
      std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  auto run_worker = [&](int w) {
    for (std::size_t c = w; c < n_chunks; c += n_workers) {
      const std::size_t lo = c * chunk_size;
      const std::size_t hi = std::min(n, lo + chunk_size);
      fn(w, lo, hi);
    }
  };
  if (n_workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_worker, w);
    for (auto& t : pool) t.join();
  }
}

}  // namespace sen

#endif  // SEN_PARALLEL_HPP
