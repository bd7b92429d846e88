#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace repmix {

// Runs fn(i) for i in [0, n_tasks) on up to `jobs` threads.  Tasks must
// write only to their own index slot; with per-task seeding the outcome is
// identical for any job count.
template <class F>
void parallel_for_indexed(int n_tasks, int jobs, F&& fn) {
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&next, n_tasks, &fn] {
      for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace repmix
