#pragma once

// Integration-variable reorderings. All three variants run the same
// greedy rule: repeatedly select the variable whose conditional
// interval probability (given everything selected so far, with selected
// variables plugged in at their truncated means) is smallest, breaking
// ties by the smaller original index.
//
//  - univariate_reorder: full conditioning via the classic dense
//    Cholesky recursion, O(n^3).
//  - vecchia_reorder: conditions each candidate on at most m already
//    selected variables with the strongest absolute correlation,
//    updating local factors incrementally. At m >= n-1 it degenerates
//    to the univariate rule and delegates to it.
//  - fic_reorder: greedy for the first m picks, then one ranking pass
//    with the shared conditioning set {first m}, O(n).
//
// A pinned prefix of exactly-observed variables (censored models) can
// be supplied; those condition later picks at their observed values.

#include "vecmvn/kernels.hpp"
#include "vecmvn/normal.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <vector>

namespace vecmvn {

using Permutation = std::vector<int>;

enum class ReorderMethod { kNone, kUnivariate, kVecchia, kFic };

inline Permutation inverse_permutation(const Permutation& order) {
  Permutation inv(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv[order[k]] = static_cast<int>(k);
  return inv;
}

namespace detail {

// Dense greedy recursion. The first `nfixed` variables are forced in
// their given order and conditioned at `fixed_values`; the rest are
// selected greedily.
inline Permutation univariate_greedy(const CovarianceModel& model, const Vector& a,
                                     const Vector& b, int nfixed,
                                     const Vector& fixed_values) {
  const int n = static_cast<int>(model.n);
  if (n > 20000)
    std::cerr << "univariate reordering is cubic in n; n = " << n << " will be slow\n";
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  Vector low(n), up(n), mu = Vector::Zero(n), d(n), e = Vector::Zero(n);
  Matrix L = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    low[j] = a[j];
    up[j] = b[j];
    d[j] = kernel_value(model, j, j);
  }

  for (int i = 0; i < n; ++i) {
    if (i >= nfixed) {
      int best = i;
      double best_lp = kInf;
      for (int j = i; j < n; ++j) {
        if (!(d[j] > 0.0))
          throw numerical_error("conditional variance nonpositive at step " +
                                std::to_string(i));
        const double s = std::sqrt(d[j]);
        const double alpha = std::isinf(low[j]) ? -kInf : (low[j] - mu[j]) / s;
        const double beta = std::isinf(up[j]) ? kInf : (up[j] - mu[j]) / s;
        const double lp = log_interval_prob(alpha, beta);
        if (lp < best_lp || (lp == best_lp && id[j] < id[best])) {
          best_lp = lp;
          best = j;
        }
      }
      if (best != i) {
        std::swap(id[i], id[best]);
        std::swap(low[i], low[best]);
        std::swap(up[i], up[best]);
        std::swap(mu[i], mu[best]);
        std::swap(d[i], d[best]);
        L.row(i).head(i).swap(L.row(best).head(i));
      }
    }
    if (!(d[i] > 0.0))
      throw numerical_error("conditional variance nonpositive at step " +
                            std::to_string(i));
    const double s = std::sqrt(d[i]);
    L(i, i) = s;
    if (i < nfixed) {
      e[i] = (fixed_values[id[i]] - mu[i]) / s;
    } else {
      const double alpha = std::isinf(low[i]) ? -kInf : (low[i] - mu[i]) / s;
      const double beta = std::isinf(up[i]) ? kInf : (up[i] - mu[i]) / s;
      e[i] = trunc_norm_mean(alpha, beta);
    }
    for (int j = i + 1; j < n; ++j) {
      double cov = kernel_value(model, id[j], id[i]);
      for (int k = 0; k < i; ++k) cov -= L(j, k) * L(i, k);
      const double lji = cov / s;
      L(j, i) = lji;
      d[j] -= lji * lji;
      mu[j] += lji * e[i];
    }
  }
  return id;
}

// Candidate state for the size-limited conditioning-set path. The local
// Cholesky factor grows incrementally as members join; replacing a
// member forces a rebuild.
struct LocalCandidate {
  std::vector<int> set;      // original indices, insertion order
  std::vector<double> corr;  // |rho| against each member
  Matrix R;                  // lower Cholesky of Sigma_set (lazy, m x m)
  Vector tvec, uvec;         // R^{-1} cross and R^{-1} plug values
  int processed = 0;
  bool rebuild = false;
  bool stale = true;
  double mu = 0.0, var = 0.0, lp = 0.0;
};

class LocalGreedy {
 public:
  LocalGreedy(const CovarianceModel& model, const Vector& a, const Vector& b, int m)
      : model_(model), a_(a), b_(b), m_(m), n_(static_cast<int>(model.n)) {
    plug_.assign(n_, 0.0);
    cand_.resize(n_);
    sdiag_.resize(n_);
    for (int j = 0; j < n_; ++j) sdiag_[j] = std::sqrt(kernel_value(model_, j, j));
  }

  Permutation run(bool fic, int nfixed, const Vector& fixed_values) {
    std::vector<int> remaining;
    remaining.reserve(n_ - nfixed);
    for (int j = nfixed; j < n_; ++j) remaining.push_back(j);

    Permutation order;
    order.reserve(n_);
    for (int i = 0; i < nfixed; ++i) {
      order.push_back(i);
      plug_[i] = fixed_values[i];
      offer_all(remaining, i);
    }

    const int greedy_picks =
        fic ? std::min(m_, static_cast<int>(remaining.size()))
            : static_cast<int>(remaining.size());
    for (int pick = 0; pick < greedy_picks; ++pick) {
      int best_pos = -1;
      for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
        const int j = remaining[pos];
        if (cand_[j].stale) refresh(j);
        if (best_pos < 0 || cand_[j].lp < cand_[remaining[best_pos]].lp ||
            (cand_[j].lp == cand_[remaining[best_pos]].lp && j < remaining[best_pos]))
          best_pos = static_cast<int>(pos);
      }
      const int sel = remaining[best_pos];
      const auto& c = cand_[sel];
      const double s = std::sqrt(c.var);
      const double alpha = std::isinf(a_[sel]) ? -kInf : (a_[sel] - c.mu) / s;
      const double beta = std::isinf(b_[sel]) ? kInf : (b_[sel] - c.mu) / s;
      plug_[sel] = c.mu + s * trunc_norm_mean(alpha, beta);
      order.push_back(sel);
      remaining.erase(remaining.begin() + best_pos);
      offer_all(remaining, sel);
    }

    if (!remaining.empty()) {
      for (int j : remaining)
        if (cand_[j].stale) refresh(j);
      std::stable_sort(remaining.begin(), remaining.end(), [&](int x, int y) {
        if (cand_[x].lp != cand_[y].lp) return cand_[x].lp < cand_[y].lp;
        return x < y;
      });
      order.insert(order.end(), remaining.begin(), remaining.end());
    }
    return order;
  }

 private:
  void offer_all(const std::vector<int>& remaining, int sel) {
    for (int j : remaining) offer(j, sel);
  }

  void offer(int j, int sel) {
    auto& c = cand_[j];
    const double r = std::abs(kernel_value(model_, j, sel)) / (sdiag_[j] * sdiag_[sel]);
    if (static_cast<int>(c.set.size()) < m_) {
      c.set.push_back(sel);
      c.corr.push_back(r);
      c.stale = true;
      return;
    }
    int weakest = 0;
    for (int t = 1; t < static_cast<int>(c.corr.size()); ++t)
      if (c.corr[t] < c.corr[weakest]) weakest = t;
    if (r > c.corr[weakest]) {
      c.set[weakest] = sel;
      c.corr[weakest] = r;
      c.rebuild = true;
      c.stale = true;
    }
  }

  void refresh(int j) {
    auto& c = cand_[j];
    const int k = static_cast<int>(c.set.size());
    if (c.rebuild) {
      c.processed = 0;
      c.rebuild = false;
    }
    if (k > 0 && c.R.rows() == 0) {
      c.R.setZero(m_, m_);
      c.tvec.setZero(m_);
      c.uvec.setZero(m_);
    }
    for (int t = c.processed; t < k; ++t) extend(j, c, t);
    c.processed = k;
    if (k == 0) {
      c.mu = 0.0;
      c.var = kernel_value(model_, j, j);
    } else {
      c.mu = c.tvec.head(k).dot(c.uvec.head(k));
      c.var = kernel_value(model_, j, j) - c.tvec.head(k).squaredNorm();
    }
    if (!(c.var > 0.0))
      throw numerical_error("conditional variance nonpositive while reordering");
    const double s = std::sqrt(c.var);
    const double alpha = std::isinf(a_[j]) ? -kInf : (a_[j] - c.mu) / s;
    const double beta = std::isinf(b_[j]) ? kInf : (b_[j] - c.mu) / s;
    c.lp = log_interval_prob(alpha, beta);
    c.stale = false;
  }

  // Appends member c.set[t] to the candidate's local factor.
  void extend(int j, LocalCandidate& c, int t) {
    const int idx = c.set[t];
    double row_sq = 0.0;
    for (int q = 0; q < t; ++q) {
      double v = kernel_value(model_, c.set[q], idx);
      for (int p = 0; p < q; ++p) v -= c.R(t, p) * c.R(q, p);
      v /= c.R(q, q);
      c.R(t, q) = v;
      row_sq += v * v;
    }
    const double diag_sq = kernel_value(model_, idx, idx) - row_sq;
    if (!(diag_sq > 0.0))
      throw numerical_error("singular conditioning block while reordering");
    const double diag = std::sqrt(diag_sq);
    c.R(t, t) = diag;
    double cross = kernel_value(model_, j, idx);
    double zval = plug_[idx];
    for (int q = 0; q < t; ++q) {
      cross -= c.R(t, q) * c.tvec[q];
      zval -= c.R(t, q) * c.uvec[q];
    }
    c.tvec[t] = cross / diag;
    c.uvec[t] = zval / diag;
  }

  const CovarianceModel& model_;
  const Vector& a_;
  const Vector& b_;
  int m_;
  int n_;
  std::vector<double> plug_;
  std::vector<double> sdiag_;
  std::vector<LocalCandidate> cand_;
};

inline Permutation local_greedy(const CovarianceModel& model, const Vector& a,
                                const Vector& b, int m, bool fic, int nfixed,
                                const Vector& fixed_values) {
  return LocalGreedy(model, a, b, m).run(fic, nfixed, fixed_values);
}

}  // namespace detail

inline Permutation univariate_reorder(const CovarianceModel& model, const Vector& a,
                                      const Vector& b) {
  return detail::univariate_greedy(model, a, b, 0, Vector());
}

inline Permutation vecchia_reorder(const CovarianceModel& model, const Vector& a,
                                   const Vector& b, int m) {
  if (m < 1) throw parameter_error("reordering needs m >= 1");
  if (m >= static_cast<int>(model.n) - 1) return univariate_reorder(model, a, b);
  return detail::local_greedy(model, a, b, m, /*fic=*/false, 0, Vector());
}

inline Permutation fic_reorder(const CovarianceModel& model, const Vector& a,
                               const Vector& b, int m) {
  if (m < 1) throw parameter_error("reordering needs m >= 1");
  if (m >= static_cast<int>(model.n) - 1) return vecchia_reorder(model, a, b, m);
  return detail::local_greedy(model, a, b, m, /*fic=*/true, 0, Vector());
}

// Reorders only the tail block of a problem whose first nfixed
// variables are pinned at observed values; those keep positions
// 0..nfixed-1.
inline Permutation reorder_with_fixed(const CovarianceModel& model, const Vector& a,
                                      const Vector& b, int m, int nfixed,
                                      const Vector& fixed_values, ReorderMethod method) {
  switch (method) {
    case ReorderMethod::kNone: {
      Permutation id(model.n);
      std::iota(id.begin(), id.end(), 0);
      return id;
    }
    case ReorderMethod::kUnivariate:
      return detail::univariate_greedy(model, a, b, nfixed, fixed_values);
    case ReorderMethod::kVecchia:
      if (m >= static_cast<int>(model.n) - 1)
        return detail::univariate_greedy(model, a, b, nfixed, fixed_values);
      return detail::local_greedy(model, a, b, m, /*fic=*/false, nfixed, fixed_values);
    case ReorderMethod::kFic:
      if (m >= static_cast<int>(model.n) - 1)
        return detail::univariate_greedy(model, a, b, nfixed, fixed_values);
      return detail::local_greedy(model, a, b, m, /*fic=*/true, nfixed, fixed_values);
  }
  throw parameter_error("unknown reorder method");
}

inline Permutation reorder_variables(const CovarianceModel& model, const Vector& a,
                                     const Vector& b, ReorderMethod method, int m) {
  return reorder_with_fixed(model, a, b, m, 0, Vector(), method);
}

}  // namespace vecmvn
