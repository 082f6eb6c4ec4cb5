#include "divkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace divkit {

namespace {

std::atomic<std::size_t> g_threads{0};

std::size_t resolved_threads() {
  const std::size_t requested = g_threads.load(std::memory_order_relaxed);
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

void set_thread_count(std::size_t n) { g_threads.store(n, std::memory_order_relaxed); }

std::size_t thread_count() { return resolved_threads(); }

void parallel_for_blocks(std::size_t n, std::size_t block,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  block = std::max<std::size_t>(block, 1);
  const std::size_t blocks = (n + block - 1) / block;
  const std::size_t workers = std::min(resolved_threads(), blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b * block, std::min(n, (b + 1) * block));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= blocks) return;
      try {
        body(b * block, std::min(n, (b + 1) * block));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for_blocks(n, kReductionBlock, [&](std::size_t begin, std::size_t end) {
    CompensatedSum s;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    partial[begin / kReductionBlock] = s.value();
  });
  CompensatedSum total;
  for (double p : partial) total += p;
  return total.value();
}

}  // namespace divkit
