#include "elmpi/parallel.hpp"

#include <cstdlib>
#include <string>

namespace elmpi {

int worker_count() {
  int cores = static_cast<int>(std::thread::hardware_concurrency());
  if (cores < 1) cores = 1;
  if (const char* env = std::getenv("ELM_PI_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1 && cap < cores) cores = static_cast<int>(cap);
  }
  return cores;
}

namespace detail {

BatchPlan::BatchPlan(Index rows, Index batch, int max_workers) {
  if (batch < 1) throw ConfigError("batch_rows must be >= 1");
  n_rows = rows;
  batch_rows = batch;
  n_batches = rows <= 0 ? 0 : (rows + batch - 1) / batch;
  workers = static_cast<int>(std::min<Index>(max_workers, std::max<Index>(n_batches, 1)));
}

std::pair<Index, Index> BatchPlan::worker_span(int w) const {
  Index base = n_batches / workers;
  Index extra = n_batches % workers;
  Index lo = w * base + std::min<Index>(w, extra);
  Index len = base + (w < extra ? 1 : 0);
  return {lo, lo + len};
}

}  // namespace detail

}  // namespace elmpi
