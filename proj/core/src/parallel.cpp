#include "tubeflow/parallel.hpp"

#include <atomic>

namespace tubeflow {

namespace {
std::atomic<int> g_workers{0};
}

int worker_count() {
  const int w = g_workers.load(std::memory_order_relaxed);
  if (w > 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_worker_count(int workers) { g_workers.store(std::max(0, workers), std::memory_order_relaxed); }

}  // namespace tubeflow
