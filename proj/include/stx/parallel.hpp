#pragma once

#include <cstddef>
#include <functional>

namespace stx {

/// Worker cap for internal parallelism: STX_THREADS when set to a positive
/// integer, otherwise the hardware concurrency.
std::size_t worker_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are fixed by
/// n and the worker count only, never by scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace stx
