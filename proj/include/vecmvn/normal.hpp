#pragma once

// Standard-normal primitives that stay accurate far into the tails:
// log CDF/SF via the scaled complementary error function, interval
// probabilities in log space, quantiles from log-tail masses, and
// truncated-normal moments. These are the accuracy bottleneck of the
// whole sampler, so everything here is double-precision-careful.

#include "vecmvn/common.hpp"

#include <cmath>

namespace vecmvn {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

inline double norm_logpdf(double x) {
  if (std::isinf(x)) return -kInf;
  return -0.5 * x * x - kLogSqrt2Pi;
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Upper tail P(Z > x).
inline double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// exp(z^2) * erfc(z) for z >= 0 without overflow.
inline double erfcx_pos(double z) {
  if (z <= 8.0) return std::exp(z * z) * std::erfc(z);
  // Asymptotic series 1/(z sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2 z^2)^k.
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 24; ++k) {
    term *= -(2 * k - 1) * inv2z2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (z * 1.7724538509055160273);  // sqrt(pi)
}

// log P(Z > x), accurate for all x.
inline double log_norm_sf(double x) {
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x >= 0.0)
    return std::log(0.5 * erfcx_pos(x / kSqrt2)) - 0.5 * x * x;
  // P(Z > x) = 1 - P(Z > -x) with P(Z > -x) <= 1/2.
  return std::log1p(-norm_sf(-x));
}

inline double log_norm_cdf(double x) { return log_norm_sf(-x); }

// log(exp(la) - exp(lb)) for la >= lb.
inline double log_diff_exp(double la, double lb) {
  if (lb == -kInf) return la;
  const double d = lb - la;  // <= 0
  // log(1 - e^d): two forms to dodge cancellation on either side.
  const double res = d > -0.6931471805599453 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
  return la + res;
}

// log P(a < Z < b). Accepts infinite endpoints; requires a < b.
inline double log_interval_prob(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a >= 0.0) return log_diff_exp(log_norm_sf(a), log_norm_sf(b));
  if (b <= 0.0) return log_diff_exp(log_norm_cdf(b), log_norm_cdf(a));
  // a < 0 < b: 1 - lower tail - upper tail, both halves well scaled.
  return std::log1p(-(norm_cdf(a) + norm_sf(b)));
}

namespace detail {
inline double horner8(const double (&c)[8], double r) {
  double s = c[7];
  for (int k = 6; k >= 0; --k) s = s * r + c[k];
  return s;
}
}  // namespace detail

// Inverse standard-normal CDF (Wichura's PPND16 rational approximations,
// relative error below 1e-14 over the full double range).
inline double norm_quantile(double p) {
  static constexpr double A[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static constexpr double B[8] = {
      1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static constexpr double C[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double D[8] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double E[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double F[8] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * detail::horner8(A, r) / detail::horner8(B, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = detail::horner8(C, r) / detail::horner8(D, r);
  } else {
    r -= 5.0;
    val = detail::horner8(E, r) / detail::horner8(F, r);
  }
  return q < 0.0 ? -val : val;
}

// Solves log P(Z > y) = lq for y. Valid for lq <= log(1/2); Newton-polished.
inline double norm_upper_quantile_log(double lq) {
  if (lq == -kInf) return kInf;
  if (lq >= 0.0) return -kInf;
  double y;
  if (lq > -36.0) {
    y = -norm_quantile(std::exp(lq));
  } else {
    // Asymptotic seed from log P(Z>y) ~ -y^2/2 - log(y sqrt(2 pi)).
    double t = -2.0 * lq;
    y = std::sqrt(t - std::log(6.283185307179586 * t));
  }
  for (int it = 0; it < 4; ++it) {
    const double f = log_norm_sf(y) - lq;
    if (f == 0.0) break;
    const double dlog = norm_logpdf(y) - log_norm_sf(y);  // log hazard
    const double step = f * std::exp(-dlog);              // f / hazard
    y += step;
    if (std::abs(step) <= 1e-16 * std::abs(y)) break;
  }
  return y;
}

// Quantile of the standard normal truncated to (a, b): the y with
// P(a < Z < y) = w * P(a < Z < b). Stable when the interval sits in a
// far tail; w is expected in (0, 1).
inline double trunc_norm_quantile(double w, double a, double b) {
  if (a >= 0.0) {
    const double lpa = log_norm_sf(a);
    const double lpb = log_norm_sf(b);
    // Upper-tail mass at y: pa + w*(pb - pa) = pa * (1 + w*expm1(lpb-lpa)).
    const double lu = lpa + std::log1p(w * std::expm1(lpb - lpa));
    return norm_upper_quantile_log(lu);
  }
  if (b <= 0.0) return -trunc_norm_quantile(1.0 - w, -b, -a);
  // Interval straddles zero; pick whichever tail representation is small.
  const double pa = norm_cdf(a);
  const double sb = norm_sf(b);
  const double p = 1.0 - (pa + sb);
  const double u = pa + w * p;
  if (u <= 0.5) return norm_quantile(u);
  const double uc = sb + (1.0 - w) * p;  // 1 - u, computed without cancellation
  return -norm_quantile(uc);
}

// Mean of the standard normal truncated to (a, b):
// (phi(a) - phi(b)) / (Phi(b) - Phi(a)).
inline double trunc_norm_mean(double a, double b) {
  const double lp = log_interval_prob(a, b);
  const double ta = std::isinf(a) ? 0.0 : std::exp(norm_logpdf(a) - lp);
  const double tb = std::isinf(b) ? 0.0 : std::exp(norm_logpdf(b) - lp);
  return ta - tb;
}

// First two "tilt" statistics of a truncated normal interval. For
// window (a, b): psi = (phi(a)-phi(b))/P and
// dpsi = (a phi(a) - b phi(b))/P - psi^2, which is Var - 1 and lies in
// (-1, 0]. `lp` is log P(a < Z < b), passed in to share the evaluation.
struct TruncMoments {
  double psi;
  double dpsi;
};

inline TruncMoments trunc_norm_moments(double a, double b, double lp) {
  const double ta = std::isinf(a) ? 0.0 : std::exp(norm_logpdf(a) - lp);
  const double tb = std::isinf(b) ? 0.0 : std::exp(norm_logpdf(b) - lp);
  const double psi = ta - tb;
  const double ga = std::isinf(a) ? 0.0 : a * ta;
  const double gb = std::isinf(b) ? 0.0 : b * tb;
  return {psi, (ga - gb) - psi * psi};
}

}  // namespace vecmvn
