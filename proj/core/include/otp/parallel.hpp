#pragma once

#include <cstdint>
#include <functional>

namespace otp {

/// Worker count used by parallel_for. Defaults to the OTP_THREADS environment
/// variable when set, otherwise 1 (library stays single-threaded unless asked).
int thread_count();
void set_thread_count(int threads);

/// Runs body(lo, hi) over a partition of [begin, end) across thread_count()
/// workers. With one worker this is a plain inline call, so results are
/// identical regardless of thread count as long as body writes disjoint slots.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace otp
