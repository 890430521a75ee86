#include "carnot/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace carnot {

int resolve_thread_count(int requested) {
  if (const char* env = std::getenv("CARNOT_THREADS"); env && *env) {
    try {
      const int t = std::stoi(env);
      if (t > 0) return t;
    } catch (const std::exception&) {
    }
  }
  return requested > 0 ? requested : omp_get_num_procs();
}

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace carnot
