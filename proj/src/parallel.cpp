#include "dcl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace dcl {

namespace {
std::atomic<unsigned> g_threads{1};
constexpr std::size_t kChunks = 64;
} // namespace

void set_num_threads(unsigned threads) {
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(threads);
}

unsigned num_threads() { return g_threads.load(); }

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)> &body) {
  if (count == 0)
    return;
  const std::size_t chunks = std::min(count, kChunks);
  const std::size_t workers = std::min<std::size_t>(num_threads(), chunks);
  auto chunk_range = [&](std::size_t c) {
    return std::pair{count * c / chunks, count * (c + 1) / chunks};
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = chunk_range(c);
      body(b, e);
    }
    return;
  }

  // Errors are kept per chunk; the lowest chunk's error is rethrown.
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(chunks);
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        auto [b, e] = chunk_range(c);
        body(b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (auto &error : errors)
    if (error)
      std::rethrow_exception(error);
}

} // namespace dcl
