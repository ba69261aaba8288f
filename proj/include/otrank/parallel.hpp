#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace otrank {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Generator for replication `stream` of a run seeded with `seed`. Streams are
// counter based, so replication i sees the same draws regardless of which
// thread executes it.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Logical cores, overridden by OTRANK_THREADS when set.
unsigned default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is handed
// out dynamically; callers write results into slot i so the reduction order
// is fixed. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace otrank
