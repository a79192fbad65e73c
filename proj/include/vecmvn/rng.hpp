#pragma once

// Counter-based random streams. Every consumer derives its stream from
// (seed, stream id, element index), so draws are reproducible and
// independent of how work is split across threads.

#include "vecmvn/normal.hpp"

#include <cstdint>

namespace vecmvn {

enum class Stream : std::uint64_t {
  kPoints = 0x1,      // integrand w vectors
  kAccept = 0x2,      // accept/reject uniforms
  kShift = 0x3,       // QMC randomization shifts
  kOrdering = 0x4,    // scenario/location randomness
  kSynthetic = 0x5,   // synthetic field generation
  kOracle = 0x6,      // reference-oracle draws
  kFit = 0x7,         // optimizer-internal randomness
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index) {
    std::uint64_t k = seed + 0x9E3779B97F4A7C15ull;
    k = detail::mix64(k ^ (static_cast<std::uint64_t>(stream) * 0xD1342543DE82EF95ull));
    key_ = detail::mix64(k ^ (index * 0xA24BAED4963EE407ull));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ull;
    return detail::mix64(key_ ^ counter_);
  }

  // Uniform draw strictly inside (0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double next_normal() { return norm_quantile(next_double()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vecmvn
