#pragma once

#include <cstddef>
#include <functional>

namespace dcl {

/// Worker count used by the batch kernels. 0 selects hardware concurrency.
void set_num_threads(unsigned threads);
unsigned num_threads();

/// Runs body(begin, end) over disjoint chunks of [0, count). Chunks are
/// fixed by count alone, so callers writing per-index results and reducing
/// them afterwards get identical output for any worker count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)> &body);

} // namespace dcl
