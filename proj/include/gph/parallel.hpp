#pragma once

#include <cstddef>
#include <functional>

namespace gph {

/// Worker count from GPH_THREADS, else the hardware count (at least 1).
int thread_count();

/// Runs body(i) for i in [0, n) on thread_count() workers in contiguous blocks.
/// Callers write results into slot i and reduce in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gph
