#pragma once

// Built-in benchmark problems: regular grids and Latin hypercube
// designs on the unit square with the Matern-1.5 kernel, the
// exchangeable constant-correlation stress case, and independent
// coordinates. These make experiments reproducible without external
// data files.

#include "vecmvn/problem.hpp"
#include "vecmvn/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace vecmvn {

// Square grid with ceil(sqrt(n))^2 >= n points; exactly n requires a
// perfect square. Includes the endpoints of [0, 1].
inline Matrix grid_locations(Eigen::Index n) {
  const auto g = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (g * g != n) throw parameter_error("grid scenarios need a square n");
  Matrix S(n, 2);
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = 0; j < g; ++j) {
      S(i * g + j, 0) = g == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(g - 1);
      S(i * g + j, 1) = g == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(g - 1);
    }
  return S;
}

inline Matrix latin_hypercube(Eigen::Index n, int dim, std::uint64_t seed) {
  Matrix S(n, dim);
  for (int d = 0; d < dim; ++d) {
    std::vector<int> strata(n);
    std::iota(strata.begin(), strata.end(), 0);
    CounterRng rng(seed, Stream::kOrdering, static_cast<std::uint64_t>(d));
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.next_u64() % (i + 1));
      std::swap(strata[i], strata[j]);
    }
    for (Eigen::Index i = 0; i < n; ++i)
      S(i, d) = (strata[i] + rng.next_double()) / static_cast<double>(n);
  }
  return S;
}

inline CovarianceModel scenario_kernel(Matrix locations, double nugget = 0.01) {
  return CovarianceModel::matern(KernelFamily::kMatern15, 1.0, Vector::Constant(1, 0.1),
                                 nugget, std::move(locations));
}

// Grid locations, limits (-inf, 0].
inline ProblemSpec scenario1(Eigen::Index n, double nugget = 0.01) {
  return ProblemSpec::make(scenario_kernel(grid_locations(n), nugget),
                           Vector::Constant(n, -kInf), Vector::Constant(n, 0.0));
}

// Latin hypercube locations, limits (-inf, U(-2, 0)].
inline ProblemSpec scenario2(Eigen::Index n, std::uint64_t seed, double nugget = 0.01) {
  CounterRng rng(seed, Stream::kOrdering, 1000003);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = -2.0 * rng.next_double();
  return ProblemSpec::make(scenario_kernel(latin_hypercube(n, 2, seed), nugget),
                           Vector::Constant(n, -kInf), b);
}

// Grid locations, centered limits [-1, 1].
inline ProblemSpec scenario3(Eigen::Index n, double nugget = 0.01) {
  return ProblemSpec::make(scenario_kernel(grid_locations(n), nugget),
                           Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
}

// Exchangeable correlation rho, limits (-inf, 0]; the probability is
// analytically 1/(n+1) at rho = 1/2.
inline ProblemSpec scenario_const_corr(Eigen::Index n, double rho) {
  return ProblemSpec::make(CovarianceModel::constant_correlation(n, rho),
                           Vector::Constant(n, -kInf), Vector::Constant(n, 0.0));
}

inline ProblemSpec scenario_identity(Eigen::Index n, double upper = 0.0) {
  return ProblemSpec::make(CovarianceModel::identity(n), Vector::Constant(n, -kInf),
                           Vector::Constant(n, upper));
}

}  // namespace vecmvn
