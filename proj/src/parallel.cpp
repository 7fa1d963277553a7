#include "dsf/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsf {

int thread_count() {
  static const int count = [] {
    if (const char* env = std::getenv("DSF_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
  }();
  return count;
}

}  // namespace dsf
