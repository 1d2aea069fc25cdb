#include "coinfect/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coinfect::par {

namespace {
int g_jobs = 0;
}

void set_jobs(int jobs) {
  g_jobs = jobs < 0 ? 0 : jobs;
#ifdef _OPENMP
  if (g_jobs > 0) omp_set_num_threads(g_jobs);
#endif
}

int jobs() { return g_jobs; }

bool parallel_enabled() {
#ifdef _OPENMP
  return g_jobs != 1;
#else
  return false;
#endif
}

}  // namespace coinfect::par
