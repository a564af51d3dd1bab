#pragma once

#include <cstddef>
#include <functional>

namespace nc {

// Worker count used by ensemble generation. 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for i in [0, count). Each index is visited exactly once; callers write
// results into per-index slots so output order never depends on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace nc
