#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace coolwalk {

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Work is cut into fixed-size blocks by item index; workers pull blocks from
// an atomic counter and write into per-block slots. Block boundaries and the
// final fold order depend only on (n_items, block_size), never on the thread
// count, so reductions are bit-identical for any number of workers.
constexpr std::int64_t kDefaultBlockSize = 4096;

template <class BlockFn>
void for_each_block(std::int64_t n_items, std::int64_t block_size, int n_threads,
                    BlockFn&& fn) {
  if (n_items <= 0) return;
  if (block_size <= 0) block_size = kDefaultBlockSize;
  const std::int64_t n_blocks = (n_items + block_size - 1) / block_size;
  auto run_block = [&](std::int64_t b) {
    const std::int64_t begin = b * block_size;
    const std::int64_t end = std::min(n_items, begin + block_size);
    fn(b, begin, end);
  };
  if (n_threads <= 1 || n_blocks == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      run_block(b);
    }
  };
  std::vector<std::thread> pool;
  const int n = static_cast<int>(std::min<std::int64_t>(n_threads, n_blocks));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline std::int64_t block_count(std::int64_t n_items, std::int64_t block_size) {
  if (block_size <= 0) block_size = kDefaultBlockSize;
  return n_items <= 0 ? 0 : (n_items + block_size - 1) / block_size;
}

}  // namespace coolwalk
