#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace posh {

/// Threads to use: explicit request > POSH_THREADS > hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("POSH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Run fn(begin, end, block_index) over contiguous blocks of [0, total).
/// Results must be merged by block index so the outcome is independent of
/// the thread count.
template <typename Fn>
void parallel_blocks(std::size_t total, unsigned threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (total == 0) return;
  if (threads <= 1 || total < 2 * threads) {
    fn(std::size_t{0}, total, std::size_t{0});
    return;
  }
  const std::size_t n_blocks = threads;
  const std::size_t per = (total + n_blocks - 1) / n_blocks;
  std::vector<std::thread> pool;
  pool.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t begin = b * per;
    const std::size_t end = std::min(total, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end, b] { fn(begin, end, b); });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace posh
