#pragma once

// Dense brute-force oracles used for testing and as optional reference
// paths from the CLI: exact Cholesky, the classic separation-of-
// variables estimator on the exact factor, a dense tilted integrand in
// the transformed variable, naive rejection sampling, and explicit
// materialization of the Vecchia-implied covariance. Correctness over
// speed; everything here is O(n^2) per sample or worse.

#include "vecmvn/results.hpp"
#include "vecmvn/rng.hpp"
#include "vecmvn/vecchia.hpp"

#include <Eigen/Cholesky>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

namespace vecmvn {

inline Matrix dense_cholesky(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw parameter_error("covariance must be square");
  if (sigma.rows() > 4096) throw parameter_error("dense Cholesky oracle capped at n = 4096");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw factorization_error("dense covariance is not positive definite");
  return llt.matrixL();
}

// Conditional moments of coordinate i given x_{0:i-1} = v, from the
// dense covariance. Used as the oracle for (A, l).
inline std::pair<double, double> dense_cond_moments(const Matrix& sigma, int i,
                                                    const Vector& v) {
  if (i == 0) return {0.0, sigma(0, 0)};
  const Matrix s11 = sigma.topLeftCorner(i, i);
  const Vector s12 = sigma.block(0, i, i, 1);
  Eigen::LLT<Matrix> llt(s11);
  if (llt.info() != Eigen::Success)
    throw factorization_error("dense conditional block is not positive definite");
  const Vector w = llt.solve(s12);
  return {w.dot(v.head(i)), sigma(i, i) - w.dot(s12)};
}

// Dense separation-of-variables path (zero tilt) in the transformed
// variable, driven by one w vector. Returns log h; fills y if given.
inline double dense_sov_path(const Matrix& L, const Vector& a, const Vector& b,
                             const Vector& w, Vector* y_out = nullptr) {
  const int n = static_cast<int>(L.rows());
  Vector y(n);
  double logh = 0.0;
  for (int i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int j = 0; j < i; ++j) dot += L(i, j) * y[j];
    const double lii = L(i, i);
    const double alpha = std::isinf(a[i]) ? -kInf : (a[i] - dot) / lii;
    const double beta = std::isinf(b[i]) ? kInf : (b[i] - dot) / lii;
    const double lp = log_interval_prob(alpha, beta);
    if (lp == -kInf) {
      logh = -kInf;
      y[i] = std::isfinite(alpha) ? alpha : (std::isfinite(beta) ? beta : 0.0);
      continue;
    }
    y[i] = trunc_norm_quantile(w[i], alpha, beta);
    if (logh != -kInf) logh += lp;
  }
  if (y_out) *y_out = std::move(y);
  return logh;
}

// Dense tilted integrand in the transformed variable y (x = L y),
// matching the full-conditioning limit of the sparse path. Returns
// log h and fills x.
inline double dense_met_path(const Matrix& L, const Vector& a, const Vector& b,
                             const Vector& gamma, const Vector& w, Vector& x) {
  const int n = static_cast<int>(L.rows());
  Vector y(n);
  double logh = 0.0;
  for (int i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int j = 0; j < i; ++j) dot += L(i, j) * y[j];
    const double lii = L(i, i);
    const double gi = gamma[i];
    const double alpha = std::isinf(a[i]) ? -kInf : (a[i] - dot) / lii - gi;
    const double beta = std::isinf(b[i]) ? kInf : (b[i] - dot) / lii - gi;
    const double lp = log_interval_prob(alpha, beta);
    if (lp == -kInf) {
      logh = -kInf;
      y[i] = (std::isfinite(alpha) ? alpha : (std::isfinite(beta) ? beta : 0.0)) + gi;
      continue;
    }
    y[i] = trunc_norm_quantile(w[i], alpha, beta) + gi;
    if (logh != -kInf) logh += lp + 0.5 * gi * gi - gi * y[i];
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int j = 0; j <= i; ++j) dot += L(i, j) * y[j];
    x[i] = dot;
  }
  return logh;
}

// Reference MVN probability via plain Monte Carlo on the exact factor.
inline ProbabilityEstimate dense_sov_estimate(const Matrix& sigma, const Vector& a,
                                              const Vector& b, std::int64_t N,
                                              std::uint64_t seed, int threads = 1) {
  const int n = static_cast<int>(sigma.rows());
  const Matrix L = dense_cholesky(sigma);
  std::vector<double> logw(N);
  const auto t0 = std::chrono::steady_clock::now();
  auto body = [&](std::int64_t l) {
    CounterRng rng(seed, Stream::kOracle, static_cast<std::uint64_t>(l));
    thread_local Vector w;
    w.resize(n);
    for (int j = 0; j < n; ++j) w[j] = rng.next_double();
    logw[l] = dense_sov_path(L, a, b, w);
  };
  if (threads <= 1) {
    for (std::int64_t l = 0; l < N; ++l) body(l);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::int64_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::int64_t lo = next.fetch_add(1024);
          if (lo >= N) break;
          for (std::int64_t l = lo; l < std::min(lo + 1024, N); ++l) body(l);
        }
      });
    for (auto& th : pool) th.join();
  }
  const LogMeanResult res = log_domain_mean(logw);
  ProbabilityEstimate est;
  est.log_mean = res.log_mean;
  est.estimate = res.mean;
  est.std_error = res.std_error;
  est.rel_error = res.mean > 0.0 ? res.std_error / res.mean : kNaN;
  est.N = N;
  est.m = n - 1;
  est.ess = res.ess;
  est.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

// Ground-truth TMVN draws: sample x ~ N(0, Sigma), keep in-box draws.
inline SampleBatch dense_rejection_sample(const Matrix& sigma, const Vector& a,
                                          const Vector& b, std::int64_t k,
                                          std::int64_t max_attempts, std::uint64_t seed) {
  const int n = static_cast<int>(sigma.rows());
  const Matrix L = dense_cholesky(sigma);
  std::vector<Vector> rows;
  std::int64_t attempts = 0;
  Vector z(n), x(n);
  for (std::int64_t l = 0; l < max_attempts; ++l) {
    CounterRng rng(seed, Stream::kOracle, static_cast<std::uint64_t>(l));
    ++attempts;
    for (int j = 0; j < n; ++j) z[j] = rng.next_normal();
    x.noalias() = L * z;
    bool inside = true;
    for (int j = 0; j < n && inside; ++j) inside = x[j] > a[j] && x[j] < b[j];
    if (inside) {
      rows.push_back(x);
      if (static_cast<std::int64_t>(rows.size()) == k) break;
    }
  }
  SampleBatch batch;
  batch.samples.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) batch.samples.row(r) = rows[r];
  batch.attempts = attempts;
  batch.acceptance_rate =
      attempts > 0 ? static_cast<double>(rows.size()) / static_cast<double>(attempts) : 0.0;
  return batch;
}

// Explicit covariance implied by the sparse factor: (V V^T)^{-1}.
inline Matrix materialize_sigma_v(const VecchiaFactor& f) {
  if (f.n > 2048) throw parameter_error("materialized covariance capped at n = 2048");
  Matrix V = Matrix::Zero(f.n, f.n);
  for (int i = 0; i < f.n; ++i) {
    V(i, i) = f.vdiag[i];
    const auto& ci = f.sets.sets[i];
    for (std::size_t t = 0; t < ci.size(); ++t) V(ci[t], i) = f.voff[i][t];
  }
  // Sigma_V = V^{-T} V^{-1}; V is upper triangular on its pattern.
  const Matrix Vinv =
      V.triangularView<Eigen::Upper>().solve(Matrix::Identity(f.n, f.n));
  return Vinv.transpose() * Vinv;
}

// Dense covariance matrix of a model, for oracle use.
inline Matrix materialize_sigma(const CovarianceModel& model) {
  const int n = static_cast<int>(model.n);
  Matrix S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = kernel_value(model, i, j);
      S(i, j) = v;
      S(j, i) = v;
    }
  return S;
}

}  // namespace vecmvn
