#pragma once

#include <cstddef>
#include <functional>

namespace gmvshrink::detail {

/// Number of workers for a requested thread count; 0 means hardware
/// concurrency.
unsigned resolve_threads(unsigned requested) noexcept;

/// Calls body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers have stopped.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace gmvshrink::detail
