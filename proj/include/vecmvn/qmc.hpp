#pragma once

// Randomized low-discrepancy points for the unit hypercube. We use the
// Kronecker lattice driven by square roots of primes with a random
// shift per randomization, which supports arbitrary dimension without
// direction-number tables. Above the dimension cap the stream falls
// back to pseudo-random points.

#include "vecmvn/common.hpp"
#include "vecmvn/rng.hpp"

#include <cstdint>
#include <vector>

namespace vecmvn {

inline constexpr int kQmcMaxDim = 8192;
inline constexpr double kPointClamp = 1e-12;

namespace detail {

inline std::vector<std::uint32_t> first_primes(int count) {
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  std::uint32_t candidate = 2;
  while (static_cast<int>(primes.size()) < count) {
    bool is_prime = true;
    for (std::uint32_t p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(candidate);
    ++candidate;
  }
  return primes;
}

}  // namespace detail

// Generates point l of a randomly shifted Kronecker sequence, or a
// pseudo-random vector when dim exceeds the cap. Entries are clamped
// into [kPointClamp, 1 - kPointClamp].
class PointStream {
 public:
  PointStream(int dim, std::uint64_t seed, bool qmc, std::uint64_t shift_index = 0)
      : dim_(dim), seed_(seed), qmc_(qmc && dim <= kQmcMaxDim) {
    if (qmc_) {
      const auto primes = detail::first_primes(dim);
      alpha_.resize(dim);
      shift_.resize(dim);
      CounterRng shift_rng(seed, Stream::kShift, shift_index);
      for (int j = 0; j < dim; ++j) {
        double r = std::sqrt(static_cast<double>(primes[j]));
        alpha_[j] = r - std::floor(r);
        shift_[j] = shift_rng.next_double();
      }
    }
  }

  bool is_qmc() const { return qmc_; }

  // Fills w with point `index` of the stream (index is global and may be
  // consumed out of order across threads).
  void point(std::uint64_t index, Vector& w) const {
    w.resize(dim_);
    if (qmc_) {
      const double k = static_cast<double>(index + 1);
      for (int j = 0; j < dim_; ++j) {
        double v = k * alpha_[j] + shift_[j];
        v -= std::floor(v);
        w[j] = clamp(v);
      }
    } else {
      CounterRng rng(seed_, Stream::kPoints, index);
      for (int j = 0; j < dim_; ++j) w[j] = clamp(rng.next_double());
    }
  }

 private:
  static double clamp(double v) {
    if (v < kPointClamp) return kPointClamp;
    if (v > 1.0 - kPointClamp) return 1.0 - kPointClamp;
    return v;
  }

  int dim_;
  std::uint64_t seed_;
  bool qmc_;
  std::vector<double> alpha_;
  std::vector<double> shift_;
};

// Materializes N points, mostly for tests and external use.
inline std::vector<Vector> qmc_points(std::uint64_t N, int dim, std::uint64_t seed) {
  if (N < 1) throw parameter_error("qmc_points: N must be >= 1");
  PointStream stream(dim, seed, /*qmc=*/true);
  std::vector<Vector> out(N);
  for (std::uint64_t l = 0; l < N; ++l) stream.point(l, out[l]);
  return out;
}

}  // namespace vecmvn
