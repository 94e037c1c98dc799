#include "hals/threading.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hals {

int max_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("HALS_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (...) {
      // ignore malformed values
    }
  }
  return n;
}

void apply_thread_limit() {
#ifdef _OPENMP
  omp_set_num_threads(max_threads());
#endif
}

ThreadLimit::ThreadLimit(int n) {
#ifdef _OPENMP
  previous_ = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : 1);
#else
  previous_ = 1;
  (void)n;
#endif
}

ThreadLimit::~ThreadLimit() {
#ifdef _OPENMP
  omp_set_num_threads(previous_);
#endif
}

}  // namespace hals
