#pragma once

#include <cstdint>
#include <random>

namespace qwalk {

// Independent sub-streams derived from one base seed. Changing the trap count
// never perturbs the graph stream, and realization r of an ensemble only
// depends on (base seed, r).
enum class Stream : std::uint64_t {
  kGraph = 0x67726170ULL,
  kTraps = 0x74726170ULL,
  kMonteCarlo = 0x6d636172ULL,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                          std::uint64_t index = 0) noexcept;

// mt19937_64 with explicitly specified conversions, so that draws are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, bound), bound > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace qwalk
