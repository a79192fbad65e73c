#pragma once

// Vecchia machinery: nearest-previously-ordered-neighbor conditioning
// sets, the sparse inverse Cholesky factor (column i supported on
// [i, c(i)]), and the conditional-moment coefficients (A, l) with
// E[x_i | x_{1:i-1}] = A_{i,:} x and Var[x_i | x_{1:i-1}] = l_i^2.

#include "vecmvn/kernels.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vecmvn {

struct ConditioningSets {
  int m = 0;
  // sets[i] holds c(i), sorted by increasing neighbor distance
  // (ties by smaller index); all entries < i; |c(i)| = min(m, i).
  std::vector<std::vector<int>> sets;
};

inline ConditioningSets build_conditioning_sets(const CovarianceModel& model, int m) {
  if (m < 1) throw parameter_error("conditioning-set size m must be >= 1");
  const int n = static_cast<int>(model.n);
  ConditioningSets out;
  out.m = m;
  out.sets.resize(n);
  std::vector<std::pair<double, int>> cand;
  for (int i = 1; i < n; ++i) {
    const int k = std::min(m, i);
    cand.clear();
    cand.reserve(i);
    for (int j = 0; j < i; ++j) cand.emplace_back(neighbor_distance(model, i, j), j);
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    auto& ci = out.sets[i];
    ci.resize(k);
    for (int t = 0; t < k; ++t) ci[t] = cand[t].second;
  }
  return out;
}

struct VecchiaFactor {
  int n = 0;
  int m = 0;
  ConditioningSets sets;
  // Column i of V: diagonal entry vdiag[i] (> 0) and off-diagonal
  // entries voff[i][t] at rows sets.sets[i][t].
  std::vector<double> vdiag;
  std::vector<std::vector<double>> voff;
  // Conditional std deviations l_i = 1 / V_ii and the rows of A on the
  // same support: arow[i][t] = A(i, sets.sets[i][t]).
  Vector l;
  std::vector<std::vector<double>> arow;

  // Sparse dot product A_{i,:} x; reads only entries with index < i.
  double cond_mean(const Vector& x, int i) const {
    const auto& ci = sets.sets[i];
    const auto& ai = arow[i];
    double acc = 0.0;
    for (std::size_t t = 0; t < ci.size(); ++t) acc += ai[t] * x[ci[t]];
    return acc;
  }
};

namespace detail {

inline void build_column(const CovarianceModel& model, const std::vector<int>& ci, int i,
                         VecchiaFactor& f) {
  const int k = static_cast<int>(ci.size());
  Matrix sub(k + 1, k + 1);
  auto idx = [&](int t) { return t == 0 ? i : ci[t - 1]; };
  for (int r = 0; r <= k; ++r)
    for (int c = r; c <= k; ++c) {
      const double v = kernel_value(model, idx(r), idx(c));
      sub(r, c) = v;
      sub(c, r) = v;
    }
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success)
    throw factorization_error("local covariance block not positive definite at index " +
                              std::to_string(i));
  Vector e1 = Vector::Zero(k + 1);
  e1[0] = 1.0;
  Vector u = llt.solve(e1);
  if (!(u[0] > 0.0))
    throw factorization_error("nonpositive precision diagonal at index " + std::to_string(i));
  const double scale = 1.0 / std::sqrt(u[0]);
  f.vdiag[i] = u[0] * scale;  // sqrt(u_1)
  auto& col = f.voff[i];
  col.resize(k);
  for (int t = 0; t < k; ++t) col[t] = u[t + 1] * scale;
}

}  // namespace detail

// Eq.-style per-column construction: column i is u_i / sqrt(u_{i,1})
// with u_i = (Sigma_{[i,c(i)],[i,c(i)]})^{-1} e_1. Columns are
// independent, so they can be built in parallel; the result is
// bit-identical for any worker count.
inline VecchiaFactor inverse_cholesky_columns(const CovarianceModel& model,
                                              const ConditioningSets& sets,
                                              int threads = 1) {
  const int n = static_cast<int>(model.n);
  VecchiaFactor f;
  f.n = n;
  f.m = sets.m;
  f.sets = sets;
  f.vdiag.assign(n, 0.0);
  f.voff.resize(n);
  if (threads <= 1 || n < 64) {
    for (int i = 0; i < n; ++i) detail::build_column(model, sets.sets[i], i, f);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    const int T = threads;
    for (int t = 0; t < T; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int i = t; i < n; i += T) detail::build_column(model, sets.sets[i], i, f);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return f;
}

// Fills (A, l) from the V columns: l_i = 1/V_ii and A = I - diag(l) V^T,
// i.e. A(i, j) = -l_i V(j, i) on the support c(i).
inline void cond_coeffs(VecchiaFactor& f) {
  f.l.resize(f.n);
  f.arow.resize(f.n);
  for (int i = 0; i < f.n; ++i) {
    f.l[i] = 1.0 / f.vdiag[i];
    const auto& col = f.voff[i];
    auto& ai = f.arow[i];
    ai.resize(col.size());
    for (std::size_t t = 0; t < col.size(); ++t) ai[t] = -f.l[i] * col[t];
  }
}

inline VecchiaFactor build_factor(const CovarianceModel& model, int m, int threads = 1) {
  auto sets = build_conditioning_sets(model, m);
  VecchiaFactor f = inverse_cholesky_columns(model, sets, threads);
  cond_coeffs(f);
  return f;
}

// Coordinate-format dumps (row, col, value), one entry per line.
inline void dump_factor(const VecchiaFactor& f, const std::string& v_path,
                        const std::string& a_path) {
  std::ofstream vf(v_path);
  std::ofstream af(a_path);
  vf.precision(17);
  af.precision(17);
  for (int i = 0; i < f.n; ++i) {
    vf << i << ' ' << i << ' ' << f.vdiag[i] << '\n';
    const auto& ci = f.sets.sets[i];
    for (std::size_t t = 0; t < ci.size(); ++t) {
      vf << ci[t] << ' ' << i << ' ' << f.voff[i][t] << '\n';
      af << i << ' ' << ci[t] << ' ' << f.arow[i][t] << '\n';
    }
  }
}

}  // namespace vecmvn
