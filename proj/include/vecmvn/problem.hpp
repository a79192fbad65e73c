#pragma once

#include "vecmvn/kernels.hpp"

#include <utility>
#include <vector>

namespace vecmvn {

// An MVN probability problem: P(a < X < b) for X ~ N(mu, Sigma). The
// solver always works with the mean-shifted limits a - mu, b - mu.
struct ProblemSpec {
  CovarianceModel covariance;
  Vector lower;
  Vector upper;
  Vector mean;  // empty means zero

  static ProblemSpec make(CovarianceModel cov, Vector lower, Vector upper,
                          Vector mean = Vector()) {
    ProblemSpec spec{std::move(cov), std::move(lower), std::move(upper), std::move(mean)};
    spec.validate();
    return spec;
  }

  Eigen::Index size() const { return covariance.n; }

  void validate() const {
    const Eigen::Index n = covariance.n;
    if (lower.size() != n || upper.size() != n)
      throw parameter_error("limit vectors must have length n");
    if (mean.size() != 0 && mean.size() != n)
      throw parameter_error("mean must be empty or length n");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(lower[i] < upper[i]))
        throw parameter_error("lower limit must be strictly below upper limit");
      if (lower[i] == kInf || upper[i] == -kInf)
        throw parameter_error("limits out of range");
    }
  }

  Vector shifted_lower() const {
    if (mean.size() == 0) return lower;
    Vector out = lower;
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (std::isfinite(out[i])) out[i] -= mean[i];
    return out;
  }

  Vector shifted_upper() const {
    if (mean.size() == 0) return upper;
    Vector out = upper;
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (std::isfinite(out[i])) out[i] -= mean[i];
    return out;
  }
};

inline ProblemSpec permute_spec(const ProblemSpec& spec, const std::vector<int>& order) {
  ProblemSpec out;
  out.covariance = permute_model(spec.covariance, order);
  const Eigen::Index n = spec.size();
  out.lower.resize(n);
  out.upper.resize(n);
  if (spec.mean.size() != 0) out.mean.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.lower[i] = spec.lower[order[i]];
    out.upper[i] = spec.upper[order[i]];
    if (spec.mean.size() != 0) out.mean[i] = spec.mean[order[i]];
  }
  return out;
}

}  // namespace vecmvn
