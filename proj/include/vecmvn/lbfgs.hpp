#pragma once

// Limited-memory BFGS with Armijo backtracking. The caller supplies an
// external stopping test so domain-specific convergence (e.g. on a
// different gradient than the objective's) can drive termination.

#include "vecmvn/common.hpp"

#include <cmath>
#include <deque>
#include <functional>

namespace vecmvn {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 1000;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 50;
  double rel_decrease_tol = 1e-12;
};

struct LbfgsReport {
  Vector x;
  double f = kNaN;
  int iterations = 0;
  bool stopped = false;       // external stop test fired
  bool stagnated = false;     // relative decrease below tolerance
  bool line_search_failed = false;
};

// fg(x, grad) -> f; value_only(x) -> f; stop(x, f) -> bool.
template <class FG, class F, class Stop>
LbfgsReport lbfgs_minimize(FG&& fg, F&& value_only, Vector x0, const LbfgsOptions& opt,
                           Stop&& stop) {
  const Eigen::Index d = x0.size();
  LbfgsReport rep;
  Vector x = std::move(x0);
  Vector g(d), g_new(d);
  double f = fg(x, g);
  if (std::isnan(f)) throw numerical_error("objective is NaN at the initial point");

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector dir(d), x_new(d), alpha_buf;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    rep.iterations = iter;
    if (stop(x, f)) {
      rep.stopped = true;
      break;
    }

    // Two-loop recursion.
    dir = -g;
    const int k = static_cast<int>(s_hist.size());
    alpha_buf.resize(k);
    for (int j = k - 1; j >= 0; --j) {
      alpha_buf[j] = rho_hist[j] * s_hist[j].dot(dir);
      dir -= alpha_buf[j] * y_hist[j];
    }
    if (k > 0) {
      const double yy = y_hist.back().squaredNorm();
      if (yy > 0.0) dir *= y_hist.back().dot(s_hist.back()) / yy;
    }
    for (int j = 0; j < k; ++j) {
      const double beta = rho_hist[j] * y_hist[j].dot(dir);
      dir += (alpha_buf[j] - beta) * s_hist[j];
    }

    double gd = g.dot(dir);
    if (!(gd < 0.0)) {  // lost descent; restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      gd = -g.squaredNorm();
      if (!(gd < 0.0)) break;  // zero gradient
    }

    double t = 1.0;
    double f_new = kNaN;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_backtracks; ++ls) {
      x_new = x + t * dir;
      f_new = value_only(x_new);
      if (std::isfinite(f_new) && f_new <= f + opt.armijo_c1 * t * gd) {
        accepted = true;
        break;
      }
      t *= opt.backtrack;
    }
    if (!accepted) {
      rep.line_search_failed = true;
      break;
    }

    f_new = fg(x_new, g_new);
    if (std::isnan(f_new)) throw numerical_error("objective became NaN during optimization");

    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    const bool tiny_decrease = (f - f_new) <= opt.rel_decrease_tol * std::abs(f);
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    rep.iterations = iter + 1;
    if (tiny_decrease) {
      rep.stagnated = true;
      break;
    }
  }
  if (!rep.stopped) rep.stopped = stop(x, f);
  rep.x = std::move(x);
  rep.f = f;
  return rep;
}

}  // namespace vecmvn
