#pragma once

namespace hals {

// Worker count for OpenMP regions: min(HALS_THREADS, hardware threads).
// HALS_THREADS unset or invalid means "use all".
int max_threads();

// Applies the HALS_THREADS cap to the OpenMP runtime. Called once by the
// CLI and the test binaries; safe to call repeatedly.
void apply_thread_limit();

// Temporarily forces a thread count (RAII). Used by benchmarks and the
// single-core acceptance runs.
class ThreadLimit {
 public:
  explicit ThreadLimit(int n);
  ~ThreadLimit();
  ThreadLimit(const ThreadLimit&) = delete;
  ThreadLimit& operator=(const ThreadLimit&) = delete;

 private:
  int previous_;
};

}  // namespace hals
