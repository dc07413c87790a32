#pragma once

#include <cstddef>
#include <functional>

namespace chemclip {

// Worker cap: CHEMCLIP_THREADS if set to a positive integer, otherwise the
// number of hardware threads.
std::size_t worker_count();
void set_worker_count(std::size_t n);  // 0 restores the environment default

// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
// handled by exactly one chunk, so results that depend only on the index are
// identical regardless of thread count.
void parallel_for(std::size_t n, std::size_t min_chunk, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace chemclip
