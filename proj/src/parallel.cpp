#include "saa/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace saa {

void parallel_chunks(std::size_t chunks, int threads,
                     const std::function<void(std::size_t)>& fn) {
  if (chunks == 0) return;
  if (threads <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed.load()) return;
      try {
        fn(c);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(first_error);
}

void parallel_ranges(std::size_t n, std::size_t chunks, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  std::size_t base = n / chunks, rem = n % chunks;
  // chunk c covers [c*base + min(c, rem), ...) with the first `rem` chunks one longer
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::size_t begin = c * base + std::min(c, rem);
    std::size_t len = base + (c < rem ? 1 : 0);
    fn(begin, begin + len, c);
  });
}

} // namespace saa
