#pragma once

// Result carriers for Monte Carlo estimates. Integrand samples live in
// log space; aggregation rescales by the running maximum so means and
// standard errors never overflow or underflow.

#include "vecmvn/common.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace vecmvn {

// One integrand sample, log h. -inf marks a zero-probability path.
struct LogWeight {
  double log_value = -kInf;
};

struct ProbabilityEstimate {
  double log_mean = -kInf;
  double estimate = 0.0;  // exp(log_mean) when representable
  double std_error = 0.0;
  double rel_error = 0.0;  // std_error / estimate
  std::int64_t N = 0;
  int m = 0;
  double elapsed_sec = 0.0;
  double bias_correction = kNaN;  // multi-level only
  double ess = kNaN;              // effective sample size
};

struct SampleBatch {
  Matrix samples;  // k x n accepted draws
  std::int64_t attempts = 0;
  double acceptance_rate = 0.0;
};

// Mean / standard error of {exp(lw)} computed in a scaled domain.
struct LogMeanResult {
  double log_mean;
  double mean;       // exp(log_mean) if representable, else 0/inf
  double std_error;  // linear-domain standard error of the mean
  double ess;
};

inline LogMeanResult log_domain_mean(const std::vector<double>& logw) {
  const std::int64_t N = static_cast<std::int64_t>(logw.size());
  LogMeanResult out{-kInf, 0.0, 0.0, 0.0};
  if (N == 0) return out;
  double M = -kInf;
  for (double lw : logw) M = std::max(M, lw);
  if (M == -kInf) return out;  // all-zero weights
  double s1 = 0.0, s2 = 0.0;
  for (double lw : logw) {
    const double e = std::exp(lw - M);
    s1 += e;
    s2 += e * e;
  }
  const double mean_scaled = s1 / static_cast<double>(N);
  const double var_scaled =
      N > 1 ? std::max(0.0, (s2 - static_cast<double>(N) * mean_scaled * mean_scaled) /
                                static_cast<double>(N - 1))
            : 0.0;
  out.log_mean = M + std::log(mean_scaled);
  out.mean = std::exp(out.log_mean);
  out.std_error = std::sqrt(var_scaled / static_cast<double>(N)) * std::exp(M);
  out.ess = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
  return out;
}

// Mean / standard error of batch means (used for randomized QMC, where
// points within one randomization are dependent).
inline LogMeanResult batch_mean(const std::vector<double>& batch_log_means) {
  const std::int64_t S = static_cast<std::int64_t>(batch_log_means.size());
  LogMeanResult out{-kInf, 0.0, 0.0, static_cast<double>(S)};
  if (S == 0) return out;
  double M = -kInf;
  for (double lb : batch_log_means) M = std::max(M, lb);
  if (M == -kInf) return out;
  double s1 = 0.0, s2 = 0.0;
  for (double lb : batch_log_means) {
    const double e = std::exp(lb - M);
    s1 += e;
    s2 += e * e;
  }
  const double mean_scaled = s1 / static_cast<double>(S);
  const double var_scaled =
      S > 1 ? std::max(0.0, (s2 - static_cast<double>(S) * mean_scaled * mean_scaled) /
                                static_cast<double>(S - 1))
            : 0.0;
  out.log_mean = M + std::log(mean_scaled);
  out.mean = std::exp(out.log_mean);
  out.std_error = std::sqrt(var_scaled / static_cast<double>(S)) * std::exp(M);
  return out;
}

}  // namespace vecmvn
