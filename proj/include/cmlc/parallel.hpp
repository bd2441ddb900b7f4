#pragma once

#include <cstddef>
#include <functional>

namespace cmlc {

// 0 means "all hardware threads".
unsigned resolve_jobs(unsigned requested);

// Runs body(i) for i in [0, n) on up to `jobs` threads. Static block
// partition; callers get determinism by writing results into per-index slots.
// The first exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace cmlc
