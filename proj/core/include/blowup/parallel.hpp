#pragma once

#include <cstddef>
#include <functional>

namespace blowup {

/// Worker cap for data-parallel loops (default: hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n); each index is visited exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace blowup
