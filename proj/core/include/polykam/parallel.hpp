#pragma once

#include <cstddef>
#include <functional>

namespace polykam {

// Parallel width: POLYKAM_THREADS if set and positive, otherwise the hardware
// concurrency. Read once per process.
unsigned thread_cap() noexcept;

// Runs body(begin, end) over disjoint contiguous chunks of [0, count).
// Chunk boundaries depend only on count and the thread cap, and every body
// reduces its own rows in a fixed order, so results do not depend on timing.
void parallel_rows(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                   std::size_t min_rows_per_thread = 32);

}  // namespace polykam
