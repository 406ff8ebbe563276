#pragma once

#include <cstddef>
#include <functional>

namespace nonloc {

// Worker count from NONLOC_WORKERS, falling back to the hardware thread count.
int worker_count();

// Runs body(begin, end) over fixed-size blocks of [0, n). Block boundaries depend
// only on n and block, never on the worker count, so per-block results can be
// reduced in a fixed order by the caller.
void parallel_blocks(std::size_t n, std::size_t block,
                     const std::function<void(std::size_t block_index, std::size_t begin, std::size_t end)>& body);

inline std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

}  // namespace nonloc
