#pragma once

// The VMET integrand and everything built on it: MVN probability
// estimation (plain MC or randomized QMC), multi-level bias correction,
// and accept-reject sampling of truncated MVN distributions. One
// integrand path costs O(n m); per-sample randomness is derived from
// (seed, stream, sample index) so results do not depend on the number
// of worker threads.

#include "vecmvn/problem.hpp"
#include "vecmvn/qmc.hpp"
#include "vecmvn/reorder.hpp"
#include "vecmvn/results.hpp"
#include "vecmvn/tilt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

namespace vecmvn {

struct SamplerOptions {
  ReorderMethod reorder = ReorderMethod::kVecchia;
  bool qmc = false;
  int qmc_shifts = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  bool tilt = true;  // gamma = 0 recovers the plain separation-of-variables integrand
  TiltOptions tilt_options;
};

// One integrand path. Pinned coordinates take their fixed value,
// consume no randomness, and contribute no weight factor. If some
// interval probability underflows, the weight is -inf but x is still
// completed so the caller can inspect the path.
inline LogWeight vmet_integrand(const Vector& a, const Vector& b, const VecchiaFactor& f,
                                const Vector& gamma, const Vector& w, Vector& x,
                                const FixedCoords& fixed = FixedCoords()) {
  const int n = f.n;
  x.resize(n);
  double logh = 0.0;
  int wk = 0;
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) {
      x[i] = fixed.value[i];
      continue;
    }
    const double mu = f.cond_mean(x, i);
    const double li = f.l[i];
    const double gi = gamma[i];
    const double alpha = std::isinf(a[i]) ? -kInf : (a[i] - mu) / li - gi;
    const double beta = std::isinf(b[i]) ? kInf : (b[i] - mu) / li - gi;
    const double lp = log_interval_prob(alpha, beta);
    if (lp == -kInf) {
      logh = -kInf;
      const double yfb = std::isfinite(alpha) ? alpha : (std::isfinite(beta) ? beta : 0.0);
      x[i] = mu + (yfb + gi) * li;
      ++wk;
      continue;
    }
    const double y = trunc_norm_quantile(w[wk], alpha, beta) + gi;
    ++wk;
    x[i] = mu + y * li;
    if (logh != -kInf) logh += lp + 0.5 * gi * gi - gi * y;
  }
  return LogWeight{logh};
}

namespace detail {

inline int free_count(int n, const FixedCoords& fixed) {
  if (!fixed.any()) return n;
  int c = 0;
  for (int i = 0; i < n; ++i)
    if (!fixed.mask[i]) ++c;
  return c;
}

template <class Body>
inline void parallel_for(std::int64_t count, int threads, Body&& body) {
  if (threads <= 1 || count < 256) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const int T = threads;
  std::atomic<std::int64_t> next{0};
  constexpr std::int64_t kGrain = 256;
  for (int t = 0; t < T; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t lo = next.fetch_add(kGrain);
        if (lo >= count) break;
        const std::int64_t hi = std::min(lo + kGrain, count);
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// Fills logw[i] for i in [0, N) deterministically. For QMC the samples
// are split into `shifts` independently randomized blocks; block s of
// size N/s gets its own shift vector, and the point index restarts
// inside each block.
inline void sample_logweights(const Vector& a, const Vector& b, const VecchiaFactor& f,
                              const Vector& gamma, const FixedCoords& fixed,
                              const SamplerOptions& opt, std::int64_t N,
                              std::vector<double>& logw,
                              std::vector<std::int64_t>* block_bounds = nullptr) {
  const int nf = free_count(f.n, fixed);
  logw.assign(N, -kInf);
  if (opt.qmc) {
    const int S = static_cast<int>(std::min<std::int64_t>(std::max(1, opt.qmc_shifts), N));
    std::vector<PointStream> streams;
    streams.reserve(S);
    for (int s = 0; s < S; ++s) streams.emplace_back(nf, opt.seed, true, s);
    std::vector<std::int64_t> starts(S + 1);
    for (int s = 0; s <= S; ++s) starts[s] = (N * s) / S;
    if (block_bounds) *block_bounds = starts;
    parallel_for(N, opt.threads, [&](std::int64_t l) {
      const int s = static_cast<int>(std::upper_bound(starts.begin(), starts.end(), l) -
                                     starts.begin()) - 1;
      thread_local Vector w, x;
      streams[s].point(static_cast<std::uint64_t>(l - starts[s]), w);
      logw[l] = vmet_integrand(a, b, f, gamma, w, x, fixed).log_value;
    });
  } else {
    PointStream stream(nf, opt.seed, false);
    if (block_bounds) *block_bounds = {0, N};
    parallel_for(N, opt.threads, [&](std::int64_t l) {
      thread_local Vector w, x;
      stream.point(static_cast<std::uint64_t>(l), w);
      logw[l] = vmet_integrand(a, b, f, gamma, w, x, fixed).log_value;
    });
  }
}

inline LogMeanResult summarize(const std::vector<double>& logw, bool qmc,
                               const std::vector<std::int64_t>& blocks) {
  if (!qmc || blocks.size() <= 2) return log_domain_mean(logw);
  std::vector<double> block_means;
  block_means.reserve(blocks.size() - 1);
  for (std::size_t s = 0; s + 1 < blocks.size(); ++s) {
    std::vector<double> slice(logw.begin() + blocks[s], logw.begin() + blocks[s + 1]);
    block_means.push_back(log_domain_mean(slice).log_mean);
  }
  LogMeanResult out = batch_mean(block_means);
  out.ess = kNaN;
  return out;
}

}  // namespace detail

// A problem after mean-shift, reordering, factor construction, and tilt
// optimization; ready for repeated sampling.
struct PreparedProblem {
  Permutation order;       // position -> original index
  Vector a, b;             // permuted, mean-shifted limits
  VecchiaFactor factor;
  TiltSolution tilt;
  Vector gamma;            // tilt parameters actually used
  FixedCoords fixed;
};

inline PreparedProblem prepare_problem(const ProblemSpec& spec, int m,
                                       const SamplerOptions& opt) {
  spec.validate();
  PreparedProblem prep;
  const Vector a0 = spec.shifted_lower();
  const Vector b0 = spec.shifted_upper();
  prep.order = reorder_variables(spec.covariance, a0, b0, opt.reorder, m);
  CovarianceModel model = permute_model(spec.covariance, prep.order);
  const Eigen::Index n = spec.size();
  prep.a.resize(n);
  prep.b.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    prep.a[k] = a0[prep.order[k]];
    prep.b[k] = b0[prep.order[k]];
  }
  prep.factor = build_factor(model, m, opt.threads);
  if (opt.tilt) {
    prep.tilt = solve_tilting(prep.factor, prep.a, prep.b, opt.tilt_options);
    prep.gamma = prep.tilt.gamma;
  } else {
    prep.gamma = Vector::Zero(n);
    prep.tilt.gamma = prep.gamma;
    prep.tilt.converged = true;
  }
  return prep;
}

inline ProbabilityEstimate estimate_prepared(const PreparedProblem& prep, std::int64_t N,
                                             const SamplerOptions& opt) {
  if (N < 2) throw parameter_error("probability estimation needs N >= 2");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> logw;
  std::vector<std::int64_t> blocks;
  detail::sample_logweights(prep.a, prep.b, prep.factor, prep.gamma, prep.fixed, opt, N,
                            logw, &blocks);
  const LogMeanResult res = detail::summarize(logw, opt.qmc, blocks);
  ProbabilityEstimate est;
  est.log_mean = res.log_mean;
  est.estimate = res.mean;
  est.std_error = res.std_error;
  est.rel_error = res.mean > 0.0 ? res.std_error / res.mean : kNaN;
  est.N = N;
  est.m = prep.factor.m;
  est.ess = res.ess;
  est.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

// Full pipeline of the linear-cost method: reorder, factor, tilt, sample.
inline ProbabilityEstimate estimate_mvn_prob(const ProblemSpec& spec, int m,
                                             std::int64_t N,
                                             const SamplerOptions& opt = SamplerOptions()) {
  const auto t0 = std::chrono::steady_clock::now();
  PreparedProblem prep = prepare_problem(spec, m, opt);
  ProbabilityEstimate est = estimate_prepared(prep, N, opt);
  est.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

// Two-level bias-corrected estimate: N1 cheap paths at m1, N2 of them
// paired with m2 paths driven by the same w. The ordering is computed
// once (at m1) and shared; the tilt is re-optimized per level.
inline ProbabilityEstimate estimate_multilevel(const ProblemSpec& spec, int m1, int m2,
                                               std::int64_t N1, std::int64_t N2,
                                               const SamplerOptions& opt = SamplerOptions()) {
  if (m1 > m2) throw parameter_error("multi-level needs m1 <= m2");
  if (N2 > N1) throw parameter_error("multi-level needs N2 <= N1");
  if (N1 < 2 || N2 < 1) throw parameter_error("multi-level needs N1 >= 2, N2 >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  spec.validate();

  const Vector a0 = spec.shifted_lower();
  const Vector b0 = spec.shifted_upper();
  const Permutation order = reorder_variables(spec.covariance, a0, b0, opt.reorder, m1);
  CovarianceModel model = permute_model(spec.covariance, order);
  const Eigen::Index n = spec.size();
  Vector a(n), b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a[k] = a0[order[k]];
    b[k] = b0[order[k]];
  }
  VecchiaFactor f1 = build_factor(model, m1, opt.threads);
  VecchiaFactor f2 = build_factor(model, m2, opt.threads);
  Vector g1, g2;
  if (opt.tilt) {
    g1 = solve_tilting(f1, a, b, opt.tilt_options).gamma;
    g2 = solve_tilting(f2, a, b, opt.tilt_options).gamma;
  } else {
    g1 = Vector::Zero(n);
    g2 = Vector::Zero(n);
  }

  std::vector<double> lw1(N1), lw2(N2);
  PointStream stream(static_cast<int>(n), opt.seed, opt.qmc);
  detail::parallel_for(N1, opt.threads, [&](std::int64_t l) {
    thread_local Vector w, x;
    stream.point(static_cast<std::uint64_t>(l), w);
    lw1[l] = vmet_integrand(a, b, f1, g1, w, x).log_value;
    if (l < N2) lw2[l] = vmet_integrand(a, b, f2, g2, w, x).log_value;
  });

  double M = -kInf;
  for (double v : lw1) M = std::max(M, v);
  for (double v : lw2) M = std::max(M, v);
  if (M == -kInf) throw numerical_error("all multi-level paths had zero weight");
  double s1 = 0.0, s1q = 0.0;
  for (double v : lw1) {
    const double e = std::exp(v - M);
    s1 += e;
    s1q += e * e;
  }
  const double mean1 = s1 / static_cast<double>(N1);
  const double var1 =
      N1 > 1 ? std::max(0.0, (s1q - N1 * mean1 * mean1) / static_cast<double>(N1 - 1)) : 0.0;
  double sd = 0.0, sdq = 0.0;
  for (std::int64_t l = 0; l < N2; ++l) {
    const double d = std::exp(lw1[l] - M) - std::exp(lw2[l] - M);
    sd += d;
    sdq += d * d;
  }
  const double eps = sd / static_cast<double>(N2);
  const double var_eps =
      N2 > 1 ? std::max(0.0, (sdq - N2 * eps * eps) / static_cast<double>(N2 - 1)) : 0.0;
  const double corrected = mean1 - eps;
  if (!(corrected > 0.0))
    throw numerical_error("multi-level bias correction exceeded the estimate");

  ProbabilityEstimate est;
  est.log_mean = M + std::log(corrected);
  est.estimate = std::exp(est.log_mean);
  est.std_error = std::exp(M) * std::sqrt(var1 / static_cast<double>(N1) +
                                          var_eps / static_cast<double>(N2));
  est.rel_error = est.estimate > 0.0 ? est.std_error / est.estimate : kNaN;
  est.N = N1;
  est.m = m1;
  est.bias_correction = eps * std::exp(M);
  est.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

struct TmvnDiagnostics {
  double psi_max = kNaN;
  double max_log_excess = -kInf;  // max over proposals of log h - psi_max
};

// Accept-reject sampling from the Vecchia-approximate TMVN. Proposals
// use pseudo-random w (independence is required for validity); proposal
// l is accepted when log U_l + psi_max < log h_l. Accepted draws are
// returned in the ORIGINAL variable order with the mean added back.
inline SampleBatch sample_tmvn_prepared(const PreparedProblem& prep, const Vector& mean,
                                        std::int64_t target_k, std::int64_t max_attempts,
                                        const SamplerOptions& opt,
                                        TmvnDiagnostics* diag = nullptr) {
  const int n = prep.factor.n;
  const double psi_max = prep.tilt.psi_max;
  SampleBatch batch;
  std::vector<Vector> accepted;
  double max_excess = -kInf;
  std::int64_t attempts = 0;

  constexpr std::int64_t kBlock = 2048;
  std::vector<double> logh(kBlock);
  std::vector<Vector> xs(kBlock);
  std::vector<std::uint8_t> acc(kBlock);
  PointStream stream(detail::free_count(n, prep.fixed), opt.seed, false);
  for (std::int64_t base = 0; base < max_attempts &&
       static_cast<std::int64_t>(accepted.size()) < target_k; base += kBlock) {
    const std::int64_t count = std::min(kBlock, max_attempts - base);
    detail::parallel_for(count, opt.threads, [&](std::int64_t t) {
      thread_local Vector w;
      const std::int64_t l = base + t;
      stream.point(static_cast<std::uint64_t>(l), w);
      logh[t] = vmet_integrand(prep.a, prep.b, prep.factor, prep.gamma, w, xs[t],
                               prep.fixed).log_value;
      CounterRng urng(opt.seed, Stream::kAccept, static_cast<std::uint64_t>(l));
      const double logu = std::log(urng.next_double());
      acc[t] = logu + psi_max < logh[t] ? 1 : 0;
    });
    for (std::int64_t t = 0; t < count; ++t) {
      ++attempts;
      if (logh[t] > -kInf) max_excess = std::max(max_excess, logh[t] - psi_max);
      if (acc[t]) {
        accepted.push_back(xs[t]);
        if (static_cast<std::int64_t>(accepted.size()) == target_k) break;
      }
    }
  }

  const Permutation inv = inverse_permutation(prep.order);
  batch.samples.resize(static_cast<Eigen::Index>(accepted.size()), n);
  for (std::size_t r = 0; r < accepted.size(); ++r)
    for (int j = 0; j < n; ++j) {
      double v = accepted[r][inv[j]];
      if (mean.size() != 0) v += mean[j];
      batch.samples(static_cast<Eigen::Index>(r), j) = v;
    }
  batch.attempts = attempts;
  batch.acceptance_rate =
      attempts > 0 ? static_cast<double>(accepted.size()) / static_cast<double>(attempts)
                   : 0.0;
  if (diag) {
    diag->psi_max = psi_max;
    diag->max_log_excess = max_excess;
  }
  return batch;
}

inline SampleBatch sample_tmvn(const ProblemSpec& spec, int m, std::int64_t target_k,
                               std::int64_t max_attempts,
                               const SamplerOptions& opt = SamplerOptions(),
                               TmvnDiagnostics* diag = nullptr) {
  PreparedProblem prep = prepare_problem(spec, m, opt);
  return sample_tmvn_prepared(prep, spec.mean, target_k, max_attempts, opt, diag);
}

}  // namespace vecmvn
