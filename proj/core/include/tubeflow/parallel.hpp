#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace tubeflow {

/// Number of workers used by the row-parallel loops. Defaults to the
/// hardware concurrency; 1 forces serial execution.
int worker_count();
void set_worker_count(int workers);

/// Calls fn(row) for every row in [0, rows). Rows are split into contiguous
/// blocks, one per worker. fn must only write to per-row outputs, so the
/// result does not depend on the number of workers.
template <class Fn>
void parallel_rows(int rows, Fn&& fn) {
  const int workers = std::min(worker_count(), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int begin = rows * w / workers;
    const int end = rows * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
}

}  // namespace tubeflow
