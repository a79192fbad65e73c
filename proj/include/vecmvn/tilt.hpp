#pragma once

// The exponential-tilting saddle point under the Vecchia
// parameterization. psi(x, gamma) is the log density ratio of one
// importance-sampling path; the optimal tilt solves grad psi = 0, found
// by minimizing g = ||grad psi||^2 with grad g = 2 H grad psi, where
// every product with the Hessian H costs O(n m) thanks to the sparse
// conditional-mean coefficients A.
//
// Degenerate coordinates (used by the censored model) pin x_i to an
// observed value: they contribute no psi term, consume no tilt
// parameter, and enter only through the conditional means of later
// variables.

#include "vecmvn/lbfgs.hpp"
#include "vecmvn/normal.hpp"
#include "vecmvn/vecchia.hpp"

#include <cstdint>
#include <vector>

namespace vecmvn {

struct FixedCoords {
  std::vector<std::uint8_t> mask;  // empty, or length n; 1 = pinned
  Vector value;                    // read where mask is 1

  bool any() const { return !mask.empty(); }
  bool at(int i) const { return !mask.empty() && mask[i] != 0; }
};

struct TiltOptions {
  int max_iterations = 1000;
  double grad_tol = 1e-6;  // on ||grad psi||_inf
  int memory = 10;
  double rel_decrease_tol = 1e-12;
  // Refine the solution for accept-reject use: exp(psi_max) must
  // dominate every proposal weight, which needs the saddle pinned far
  // below the estimation tolerance.
  bool polish_max = true;
  double polish_grad_tol = 1e-11;
  int polish_saddle_iterations = 300;
  int polish_iterations = 80;
  bool collect_trace = false;
};

struct TiltSolution {
  Vector xhat;
  Vector gamma;
  double psi_max = kNaN;
  double grad_norm = kNaN;  // ||grad psi||_inf at (xhat, gamma)
  int iterations = 0;
  bool converged = false;
  bool projected = false;  // xhat left [a, b] and was pulled back
  std::vector<double> g_trace;
};

namespace detail {

// Per-evaluation quantities shared by psi, its gradient, and Hessian
// products. Entries at pinned coordinates are zeroed.
struct TiltWorkspace {
  Vector mu, y, lp, psi_i, dpsi_i;
  double psi = 0.0;

  void eval(const VecchiaFactor& f, const Vector& a, const Vector& b, const Vector& x,
            const Vector& gamma, const FixedCoords& fixed, bool need_moments) {
    const int n = f.n;
    mu.resize(n);
    y.resize(n);
    lp.resize(n);
    if (need_moments) {
      psi_i.resize(n);
      dpsi_i.resize(n);
    }
    psi = 0.0;
    for (int i = 0; i < n; ++i) {
      mu[i] = f.cond_mean(x, i);
      if (fixed.at(i)) {
        y[i] = 0.0;
        lp[i] = 0.0;
        if (need_moments) {
          psi_i[i] = 0.0;
          dpsi_i[i] = 0.0;
        }
        continue;
      }
      const double li = f.l[i];
      const double alpha =
          (std::isinf(a[i]) ? -kInf : (a[i] - mu[i]) / li - gamma[i]);
      const double beta = (std::isinf(b[i]) ? kInf : (b[i] - mu[i]) / li - gamma[i]);
      const double lpi = log_interval_prob(alpha, beta);
      if (lpi == -kInf)
        throw numerical_error("interval probability underflowed at coordinate " +
                              std::to_string(i));
      lp[i] = lpi;
      y[i] = (x[i] - mu[i]) / li;
      psi += lpi + 0.5 * gamma[i] * gamma[i] - gamma[i] * y[i];
      if (need_moments) {
        const TruncMoments mom = trunc_norm_moments(alpha, beta, lpi);
        psi_i[i] = mom.psi;
        dpsi_i[i] = mom.dpsi;
      }
    }
  }
};

// out[j] += sum_i A(i, j) w[i] over the sparse support.
inline void add_At_times(const VecchiaFactor& f, const Vector& w, Vector& out) {
  for (int i = 0; i < f.n; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const auto& ci = f.sets.sets[i];
    const auto& ai = f.arow[i];
    for (std::size_t t = 0; t < ci.size(); ++t) out[ci[t]] += ai[t] * wi;
  }
}

inline void zero_fixed(const FixedCoords& fixed, Vector& v) {
  if (!fixed.any()) return;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (fixed.mask[i]) v[i] = 0.0;
}

}  // namespace detail

inline double psi(const VecchiaFactor& factor, const Vector& a, const Vector& b,
                  const Vector& x, const Vector& gamma,
                  const FixedCoords& fixed = FixedCoords()) {
  detail::TiltWorkspace w;
  w.eval(factor, a, b, x, gamma, fixed, /*need_moments=*/false);
  return w.psi;
}

// grad psi: d/dx = -(I-A)^T D_l^{-1} gamma + A^T D_l^{-1} Psi,
//           d/dgamma = gamma - D_l^{-1}(x - mu) + Psi.
inline void grad_psi(const VecchiaFactor& factor, const Vector& a, const Vector& b,
                     const Vector& x, const Vector& gamma, Vector& gx, Vector& ggamma,
                     const FixedCoords& fixed = FixedCoords(),
                     detail::TiltWorkspace* ws = nullptr) {
  detail::TiltWorkspace local;
  detail::TiltWorkspace& w = ws ? *ws : local;
  w.eval(factor, a, b, x, gamma, fixed, /*need_moments=*/true);
  const int n = factor.n;
  gx.setZero(n);
  ggamma.resize(n);
  Vector t(n);
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) {
      t[i] = 0.0;
      ggamma[i] = 0.0;
      continue;
    }
    const double li = factor.l[i];
    gx[i] = -gamma[i] / li;
    t[i] = (gamma[i] + w.psi_i[i]) / li;
    ggamma[i] = gamma[i] - w.y[i] + w.psi_i[i];
  }
  detail::add_At_times(factor, t, gx);
  detail::zero_fixed(fixed, gx);
}

// H * [vx; vgamma] assembled from the four sparse blocks; never forms a
// dense matrix. The workspace must come from a grad_psi call at the
// same (x, gamma).
inline void hessian_product(const VecchiaFactor& factor, const detail::TiltWorkspace& w,
                            const Vector& vx, const Vector& vgamma, Vector& out_x,
                            Vector& out_gamma, const FixedCoords& fixed = FixedCoords()) {
  const int n = factor.n;
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = factor.cond_mean(vx, i);  // A vx
  out_x.setZero(n);
  out_gamma.resize(n);
  Vector inner(n);
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) {
      inner[i] = 0.0;
      out_gamma[i] = 0.0;
      continue;
    }
    const double li = factor.l[i];
    const double dp = w.dpsi_i[i];
    inner[i] = dp * u[i] / (li * li) + (1.0 + dp) * vgamma[i] / li;
    out_x[i] = -vgamma[i] / li;
    out_gamma[i] = -vx[i] / li + (1.0 + dp) * (u[i] / li + vgamma[i]);
  }
  detail::add_At_times(factor, inner, out_x);
  detail::zero_fixed(fixed, out_x);
}

// Hxx * vx only (for the concave maximization of psi over x).
inline void hessian_xx_product(const VecchiaFactor& factor, const detail::TiltWorkspace& w,
                               const Vector& vx, Vector& out_x,
                               const FixedCoords& fixed = FixedCoords()) {
  const int n = factor.n;
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = factor.cond_mean(vx, i);
  out_x.setZero(n);
  Vector inner(n);
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) {
      inner[i] = 0.0;
      continue;
    }
    const double li = factor.l[i];
    inner[i] = w.dpsi_i[i] * u[i] / (li * li);
  }
  detail::add_At_times(factor, inner, out_x);
  detail::zero_fixed(fixed, out_x);
}

namespace detail {

inline Vector initial_x(const VecchiaFactor& f, const Vector& a, const Vector& b,
                        const FixedCoords& fixed) {
  const int n = f.n;
  Vector x(n);
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) {
      x[i] = fixed.value[i];
    } else if (std::isfinite(a[i]) && std::isfinite(b[i])) {
      x[i] = 0.5 * (a[i] + b[i]);
    } else if (std::isfinite(a[i])) {
      x[i] = a[i] + 0.5 * f.l[i];
    } else if (std::isfinite(b[i])) {
      x[i] = b[i] - 0.5 * f.l[i];
    } else {
      x[i] = 0.0;
    }
  }
  return x;
}

// Regularized Newton-CG ascent on the concave psi(., gamma), clipped to
// [a, b]. Tightens max_x psi so that exp(psi_max) dominates every
// proposal. Hxx is singular along conditional-mean null directions, so
// the Newton system carries a small ridge and a step cap; those
// directions contribute only O(grad_tol) to the supremum.
inline double polish_psi_max(const VecchiaFactor& f, const Vector& a, const Vector& b,
                             const Vector& gamma, Vector& x, const FixedCoords& fixed,
                             int max_iters) {
  const int n = f.n;
  TiltWorkspace w;
  Vector gx(n), gg(n);
  Vector d(n), r(n), p(n), hp(n);
  double psi_val = -kInf;
  double lbar = 1.0;
  for (int i = 0; i < n; ++i) lbar = std::max(lbar, f.l[i]);
  for (int iter = 0; iter < max_iters; ++iter) {
    grad_psi(f, a, b, x, gamma, gx, gg, fixed, &w);
    psi_val = w.psi;
    const double gnorm = gx.lpNorm<Eigen::Infinity>();
    if (gnorm <= 1e-12 * std::max(1.0, std::abs(psi_val))) break;

    // CG on (-Hxx + ridge) d = gx  (so x + d is the Newton step uphill).
    const double ridge = 1e-9 + 1e-3 * gnorm;
    d.setZero();
    r = gx;
    p = r;
    double rr = r.squaredNorm();
    const double rr0 = rr;
    bool cg_ok = false;
    for (int k = 0; k < 60 && rr > 1e-24 * rr0; ++k) {
      hessian_xx_product(f, w, p, hp, fixed);
      hp = ridge * p - hp;
      const double ph = p.dot(hp);
      if (!(ph > 1e-300)) break;
      const double step = rr / ph;
      d += step * p;
      r -= step * hp;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
      cg_ok = true;
    }
    if (!cg_ok || d.dot(gx) <= 0.0) d = gx;  // gradient fallback
    const double dmax = d.lpNorm<Eigen::Infinity>();
    const double cap = 10.0 * lbar;
    if (dmax > cap) d *= cap / dmax;

    double t = 1.0;
    const double slope = d.dot(gx);
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vector x_try = x + t * d;
      for (int i = 0; i < n; ++i) {
        if (fixed.at(i)) continue;
        if (x_try[i] < a[i]) x_try[i] = a[i];
        if (x_try[i] > b[i]) x_try[i] = b[i];
      }
      double val;
      try {
        val = psi(f, a, b, x_try, gamma, fixed);
      } catch (const numerical_error&) {
        val = -kInf;  // runaway trial along an unbounded side
      }
      if (val >= psi_val + 1e-4 * t * slope || val > psi_val) {
        x = std::move(x_try);
        psi_val = val;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return psi_val;
}

}  // namespace detail

// Finds the saddle point of psi by minimizing g = ||grad psi||^2 with
// L-BFGS. Returns the best iterate with diagnostics on non-convergence
// rather than throwing.
inline TiltSolution solve_tilting(const VecchiaFactor& factor, const Vector& a,
                                  const Vector& b, const TiltOptions& opt = TiltOptions(),
                                  const FixedCoords& fixed = FixedCoords()) {
  const int n = factor.n;
  Vector z0(2 * n);
  z0.head(n) = detail::initial_x(factor, a, b, fixed);
  z0.tail(n).setZero();

  detail::TiltWorkspace w;
  Vector gx(n), gg(n), hx(n), hg(n);
  double grad_inf = kInf;
  TiltSolution sol;

  // Out-of-range line-search trials (conditional means overflow, interval
  // mass below the representable range) read as +inf so they are rejected.
  auto eval_g = [&](const Vector& z, Vector* grad_out) {
    const Vector x = z.head(n);
    const Vector gamma = z.tail(n);
    try {
      grad_psi(factor, a, b, x, gamma, gx, gg, fixed, &w);
    } catch (const numerical_error&) {
      if (grad_out) grad_out->setZero(2 * n);
      return kInf;
    }
    const double g_val = gx.squaredNorm() + gg.squaredNorm();
    if (grad_out) {
      hessian_product(factor, w, gx, gg, hx, hg, fixed);
      grad_out->resize(2 * n);
      grad_out->head(n) = 2.0 * hx;
      grad_out->tail(n) = 2.0 * hg;
    }
    return g_val;
  };

  if (eval_g(z0, nullptr) == kInf)
    throw numerical_error("interval probabilities vanish at the initial tilt point");

  LbfgsOptions lopt;
  lopt.memory = opt.memory;
  lopt.max_iterations = opt.max_iterations;
  lopt.rel_decrease_tol = opt.rel_decrease_tol;
  auto stop = [&](const Vector&, double) {
    grad_inf = std::max(gx.lpNorm<Eigen::Infinity>(), gg.lpNorm<Eigen::Infinity>());
    if (opt.collect_trace) sol.g_trace.push_back(gx.squaredNorm() + gg.squaredNorm());
    return grad_inf <= opt.grad_tol;
  };

  LbfgsReport rep = lbfgs_minimize(
      [&](const Vector& z, Vector& grad) { return eval_g(z, &grad); },
      [&](const Vector& z) { return eval_g(z, nullptr); }, std::move(z0), lopt, stop);

  Vector xhat = rep.x.head(n);
  Vector gamma = rep.x.tail(n);

  // Feasibility guard: pull xhat back into the box and re-polish.
  bool projected = false;
  for (int i = 0; i < n; ++i) {
    if (fixed.at(i)) continue;
    if (xhat[i] < a[i] || xhat[i] > b[i]) {
      xhat[i] = std::min(std::max(xhat[i], a[i]), b[i]);
      projected = true;
    }
  }
  if (projected) {
    Vector z(2 * n);
    z.head(n) = xhat;
    z.tail(n) = gamma;
    LbfgsOptions repolish = lopt;
    repolish.max_iterations = 50;
    LbfgsReport rep2 = lbfgs_minimize(
        [&](const Vector& zz, Vector& grad) { return eval_g(zz, &grad); },
        [&](const Vector& zz) { return eval_g(zz, nullptr); }, std::move(z), repolish,
        stop);
    xhat = rep2.x.head(n);
    gamma = rep2.x.tail(n);
    rep.iterations += rep2.iterations;
  }

  // For sampling, residual tilt error leaks linearly into the proposal
  // bound through unbounded box sides; pin the saddle much tighter.
  if (opt.polish_max && opt.polish_grad_tol < opt.grad_tol) {
    Vector z(2 * n);
    z.head(n) = xhat;
    z.tail(n) = gamma;
    LbfgsOptions tight = lopt;
    tight.max_iterations = opt.polish_saddle_iterations;
    tight.rel_decrease_tol = 1e-16;
    auto tight_stop = [&](const Vector&, double) {
      const double gi = std::max(gx.lpNorm<Eigen::Infinity>(),
                                 gg.lpNorm<Eigen::Infinity>());
      return gi <= opt.polish_grad_tol;
    };
    LbfgsReport rep3 = lbfgs_minimize(
        [&](const Vector& zz, Vector& grad) { return eval_g(zz, &grad); },
        [&](const Vector& zz) { return eval_g(zz, nullptr); }, std::move(z), tight,
        tight_stop);
    xhat = rep3.x.head(n);
    gamma = rep3.x.tail(n);
  }

  // Final gradient at the returned point.
  grad_psi(factor, a, b, xhat, gamma, gx, gg, fixed, &w);
  grad_inf = std::max(gx.lpNorm<Eigen::Infinity>(), gg.lpNorm<Eigen::Infinity>());

  sol.gamma = gamma;
  sol.iterations = rep.iterations;
  sol.converged = grad_inf <= opt.grad_tol;
  sol.projected = projected;
  sol.grad_norm = grad_inf;
  if (opt.polish_max) {
    // The supremum search may drift along flat directions; keep the
    // saddle iterate itself as the reported solution.
    Vector x_sup = xhat;
    sol.psi_max =
        detail::polish_psi_max(factor, a, b, gamma, x_sup, fixed, opt.polish_iterations);
  } else {
    sol.psi_max = w.psi;
  }
  sol.xhat = std::move(xhat);
  return sol;
}

}  // namespace vecmvn
