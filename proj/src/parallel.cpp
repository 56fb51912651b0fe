#include "spikegrad/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spikegrad::parallel {

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

int workers_from_environment() {
  const char* env = std::getenv("SPIKEGRAD_WORKERS");
  if (env == nullptr) return 0;
  int value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end || value <= 0) return 0;
  return value;
}

}  // namespace spikegrad::parallel
