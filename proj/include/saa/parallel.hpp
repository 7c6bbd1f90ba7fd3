#pragma once

#include <cstddef>
#include <functional>

namespace saa {

// Runs fn(chunk) for every chunk in [0, chunks). Work is partitioned by chunk
// index, never by worker count, so results that are merged in chunk order are
// identical for any thread setting. threads <= 1 runs inline.
void parallel_chunks(std::size_t chunks, int threads,
                     const std::function<void(std::size_t)>& fn);

// Splits [0, n) into at most `chunks` contiguous ranges and calls
// fn(begin, end, chunk_index) for each.
void parallel_ranges(std::size_t n, std::size_t chunks, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

} // namespace saa
