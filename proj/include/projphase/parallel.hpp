#pragma once

#include <cstddef>
#include <functional>

namespace projphase {

// Worker count for parallel loops. Reads PROJPHASE_THREADS once; falls back
// to the hardware concurrency when unset or unparsable.
int worker_count();

// Runs fn(0) .. fn(n-1) on the worker pool. Iterations must be independent;
// each writes only state owned by its own index. Degrades to a plain loop
// when a single worker is configured.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace projphase
