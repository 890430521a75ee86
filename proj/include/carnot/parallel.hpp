#pragma once

#include <cstdint>
#include <random>

namespace carnot {

/// Selects the OpenMP kernel or the serial reference loop. Both consume the
/// same per-sample (or per-block) random streams, so they see identical
/// samples; only the summation grouping may differ.
enum class Execution { serial, parallel };

/// Thread count for OpenMP kernels: CARNOT_THREADS overrides `requested`;
/// requested <= 0 means the OpenMP default (available parallelism).
int resolve_thread_count(int requested);
void set_thread_count(int threads);
int max_threads();

/// Independent engine for stream `index` of a run seeded with `seed`.
/// Streams depend only on (seed, index, tag), never on the worker count.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

}  // namespace carnot
