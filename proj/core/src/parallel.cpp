#include "otp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace otp {

namespace {

int initial_thread_count() {
  if (const char* env = std::getenv("OTP_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

std::atomic<int>& thread_count_slot() {
  static std::atomic<int> count{initial_thread_count()};
  return count;
}

}  // namespace

int thread_count() { return thread_count_slot().load(std::memory_order_relaxed); }

void set_thread_count(int threads) {
  thread_count_slot().store(threads < 1 ? 1 : threads, std::memory_order_relaxed);
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
  std::int64_t total = end - begin;
  if (total <= 0) return;
  int workers = thread_count();
  if (workers > total) workers = static_cast<int>(total);
  if (workers <= 1) {
    body(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::int64_t chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = begin + w * chunk;
    std::int64_t hi = lo + chunk < end ? lo + chunk : end;
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace otp
