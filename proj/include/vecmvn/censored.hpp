#pragma once

// Partially censored Gaussian fields: the joint likelihood of observed
// values and below-threshold indicators, derivative-free parameter
// fitting on a fixed randomness stream, posterior sampling of censored
// coordinates (optionally restricted to a buffered region), and
// kriging from imputation ensembles. Variables are arranged observed
// block first, so observed coordinates enter later conditionals as
// exact degenerate values.

#include "vecmvn/io.hpp"
#include "vecmvn/sampler.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace vecmvn {

struct CensoredDataset {
  Matrix locations;                      // n x d
  Vector values;                         // NaN where censored
  std::vector<std::uint8_t> censored;    // 1 = below threshold
  Vector thresholds;                     // detection limits

  Eigen::Index size() const { return locations.rows(); }

  Eigen::Index observed_count() const {
    Eigen::Index c = 0;
    for (auto f : censored) c += f == 0;
    return c;
  }

  // Structural checks only; use validated() to also require a
  // nondegenerate observed/censored split.
  void check_shapes() const {
    const Eigen::Index n = locations.rows();
    if (values.size() != n || thresholds.size() != n ||
        static_cast<Eigen::Index>(censored.size()) != n)
      throw data_error("censored dataset: field lengths disagree");
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool miss = std::isnan(values[i]);
      if (miss != (censored[i] != 0))
        throw data_error("censored dataset: mask and values disagree at row " +
                         std::to_string(i));
      if (!miss && !(values[i] > thresholds[i]))
        throw data_error("censored dataset: observed value at or below threshold at row " +
                         std::to_string(i));
    }
  }

  static CensoredDataset validated(Matrix locations, Vector values, Vector thresholds) {
    CensoredDataset d;
    d.locations = std::move(locations);
    d.values = std::move(values);
    d.thresholds = std::move(thresholds);
    d.censored.resize(d.values.size());
    for (Eigen::Index i = 0; i < d.values.size(); ++i)
      d.censored[i] = std::isnan(d.values[i]) ? 1 : 0;
    d.check_shapes();
    const Eigen::Index obs = d.observed_count();
    if (obs == 0 || obs == d.size())
      throw data_error("censored dataset needs both observed and censored rows");
    return d;
  }
};

// columns: x1..xd, value (empty cell = censored), threshold.
inline CensoredDataset read_censored_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.values.cols() < 3) throw data_error("censored CSV needs x1..xd, value, threshold");
  const Eigen::Index d = t.values.cols() - 2;
  Matrix locs = t.values.leftCols(d);
  if (locs.hasNaN()) throw data_error("censored CSV has empty coordinate cells");
  Vector thr = t.values.col(d + 1);
  if (thr.hasNaN()) throw data_error("censored CSV has empty threshold cells");
  return CensoredDataset::validated(std::move(locs), t.values.col(d), std::move(thr));
}

struct CensoredOptions {
  int m = 30;
  std::int64_t N = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  TiltOptions tilt;
};

namespace detail {

// Observed rows first (original order), censored rows after.
inline Permutation observed_first_order(const CensoredDataset& data) {
  Permutation order;
  order.reserve(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (!data.censored[i]) order.push_back(static_cast<int>(i));
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (data.censored[i]) order.push_back(static_cast<int>(i));
  return order;
}

inline CovarianceModel model_at(const CovarianceModel& tmpl, Matrix locations) {
  CovarianceModel m = tmpl;
  m.locations = std::move(locations);
  m.n = m.locations.rows();
  m.validate();
  return m;
}

struct CensoredAssembly {
  Permutation order;       // position -> dataset row
  CovarianceModel model;   // over the permuted rows in `order`
  VecchiaFactor factor;
  Vector a, b;             // integration limits (censored coords only used)
  FixedCoords fixed;       // observed block pinned at its values
  Eigen::Index n_obs = 0;
};

// `rows` selects the dataset subset (observed must all be present for
// exact conditioning); reorder applies to the censored tail only.
inline CensoredAssembly assemble(const CensoredDataset& data, const CovarianceModel& tmpl,
                                 const std::vector<int>& censored_rows, int m,
                                 int threads, ReorderMethod reorder) {
  CensoredAssembly out;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (!data.censored[i]) out.order.push_back(static_cast<int>(i));
  out.n_obs = static_cast<Eigen::Index>(out.order.size());
  out.order.insert(out.order.end(), censored_rows.begin(), censored_rows.end());

  const auto n = static_cast<Eigen::Index>(out.order.size());
  Matrix locs(n, data.locations.cols());
  Vector a(n), b(n), fixed_values = Vector::Zero(n);
  std::vector<std::uint8_t> mask(n, 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int row = out.order[k];
    locs.row(k) = data.locations.row(row);
    if (k < out.n_obs) {
      mask[k] = 1;
      fixed_values[k] = data.values[row];
      a[k] = data.values[row];
      b[k] = data.values[row];
    } else {
      a[k] = -kInf;
      b[k] = data.thresholds[row];
    }
  }
  CovarianceModel model = model_at(tmpl, std::move(locs));

  if (reorder != ReorderMethod::kNone && n > out.n_obs + 1) {
    const Permutation sub = reorder_with_fixed(model, a, b, m,
                                               static_cast<int>(out.n_obs),
                                               fixed_values, reorder);
    Permutation new_order(n);
    Vector na(n), nb(n), nf(n);
    std::vector<std::uint8_t> nm(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      new_order[k] = out.order[sub[k]];
      na[k] = a[sub[k]];
      nb[k] = b[sub[k]];
      nf[k] = fixed_values[sub[k]];
      nm[k] = mask[sub[k]];
    }
    model = permute_model(model, sub);
    out.order = std::move(new_order);
    a = std::move(na);
    b = std::move(nb);
    fixed_values = std::move(nf);
    mask = std::move(nm);
  }

  out.a = std::move(a);
  out.b = std::move(b);
  out.fixed.mask = std::move(mask);
  out.fixed.value = std::move(fixed_values);
  out.factor = build_factor(model, m, threads);
  out.model = std::move(model);
  return out;
}

// Exact log-density of the pinned (observed) block under the factor.
inline double observed_logdensity(const CensoredAssembly& as) {
  double acc = 0.0;
  for (int i = 0; i < as.factor.n; ++i) {
    if (!as.fixed.at(i)) continue;
    const double mu = as.factor.cond_mean(as.fixed.value, i);
    const double li = as.factor.l[i];
    acc += norm_logpdf((as.fixed.value[i] - mu) / li) - std::log(li);
  }
  return acc;
}

}  // namespace detail

// log f(z): exact Gaussian log-density of the observed block plus the
// estimated conditional probability that every censored coordinate
// falls below its threshold. No variable reordering, so the value is
// continuous in the kernel parameters for a fixed seed.
inline double censored_loglik(const CensoredDataset& data, const CovarianceModel& tmpl,
                              const CensoredOptions& opt = CensoredOptions()) {
  data.check_shapes();
  std::vector<int> cens_rows;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (data.censored[i]) cens_rows.push_back(static_cast<int>(i));

  auto as = detail::assemble(data, tmpl, cens_rows, opt.m, opt.threads,
                             ReorderMethod::kNone);
  double ll = detail::observed_logdensity(as);
  if (!cens_rows.empty()) {
    TiltOptions topt = opt.tilt;
    topt.polish_max = false;  // bound not needed for probability estimation
    const TiltSolution tilt = solve_tilting(as.factor, as.a, as.b, topt, as.fixed);
    SamplerOptions sopt;
    sopt.seed = opt.seed;
    sopt.threads = opt.threads;
    std::vector<double> logw;
    detail::sample_logweights(as.a, as.b, as.factor, tilt.gamma, as.fixed, sopt, opt.N,
                              logw);
    const LogMeanResult res = log_domain_mean(logw);
    if (res.log_mean == -kInf)
      throw numerical_error("censored-probability paths all underflowed");
    ll += res.log_mean;
  }
  return ll;
}

// Plain Vecchia Gaussian log-likelihood of fully observed values (no
// censoring): the level-of-detection baseline plugs substituted values
// into this.
inline double gaussian_loglik(const Matrix& locations, const Vector& values,
                              const CovarianceModel& tmpl, int m, int threads = 1) {
  CovarianceModel model = detail::model_at(tmpl, locations);
  const VecchiaFactor f = build_factor(model, m, threads);
  double acc = 0.0;
  for (int i = 0; i < f.n; ++i) {
    const double mu = f.cond_mean(values, i);
    const double li = f.l[i];
    acc += norm_logpdf((values[i] - mu) / li) - std::log(li);
  }
  return acc;
}

// Values with detection limits substituted at censored rows.
inline Vector lod_values(const CensoredDataset& data) {
  Vector v = data.values;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (data.censored[i]) v[i] = data.thresholds[i];
  return v;
}

// ---------------------------------------------------------------------------
// Parameter fitting

struct FitResult {
  Vector params;      // (variance, ranges..., nugget)
  double loglik = -kInf;
  int evaluations = 0;
  bool converged = false;
  std::vector<std::pair<Vector, double>> trace;
};

inline CovarianceModel model_with_params(const CovarianceModel& tmpl, const Vector& p) {
  if (p.size() != tmpl.ranges.size() + 2)
    throw parameter_error("parameter vector must be (variance, ranges..., nugget)");
  CovarianceModel m = tmpl;
  m.variance = p[0];
  for (Eigen::Index g = 0; g < tmpl.ranges.size(); ++g) m.ranges[g] = p[1 + g];
  m.nugget = p[p.size() - 1];
  m.validate();
  return m;
}

struct FitOptions {
  CensoredOptions eval;
  int max_iterations = 200;
  double f_tol = 1e-4;
};

// Nelder-Mead simplex over log-transformed parameters, clamped to the
// given bounds. Every likelihood evaluation reuses the same seed so the
// objective surface is continuous in the parameters; failed
// evaluations reject the vertex.
inline FitResult fit_params(const CensoredDataset& data, const CovarianceModel& tmpl,
                            const Vector& init, const Vector& lower, const Vector& upper,
                            const FitOptions& opt = FitOptions()) {
  const Eigen::Index p = init.size();
  if (lower.size() != p || upper.size() != p)
    throw parameter_error("bounds must match the parameter vector");
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(lower[j] > 0.0) || !(init[j] >= lower[j]) || !(init[j] <= upper[j]))
      throw parameter_error("fit needs 0 < lower <= init <= upper");

  FitResult result;
  auto objective = [&](const Vector& theta) {
    Vector params = theta.array().exp();
    try {
      const double ll = censored_loglik(data, model_with_params(tmpl, params), opt.eval);
      ++result.evaluations;
      result.trace.emplace_back(params, ll);
      return -ll;
    } catch (const error&) {
      ++result.evaluations;
      return kInf;
    }
  };
  const Vector tlo = lower.array().log();
  const Vector thi = upper.array().log();
  auto clamp = [&](Vector t) {
    for (Eigen::Index j = 0; j < p; ++j) t[j] = std::min(std::max(t[j], tlo[j]), thi[j]);
    return t;
  };

  // Simplex of p+1 vertices around the initial point.
  std::vector<Vector> verts;
  std::vector<double> fv;
  verts.push_back(clamp(init.array().log()));
  for (Eigen::Index j = 0; j < p; ++j) {
    Vector v = verts[0];
    v[j] += (thi[j] - v[j] >= 0.25) ? 0.25 : -0.25;
    verts.push_back(clamp(v));
  }
  for (auto& v : verts) fv.push_back(objective(v));

  const double alpha = 1.0, gamma_nm = 2.0, rho_nm = 0.5, sigma_nm = 0.5;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::vector<std::size_t> idx(verts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return fv[x] < fv[y];
    });
    std::vector<Vector> sv;
    std::vector<double> sf;
    for (auto k : idx) {
      sv.push_back(verts[k]);
      sf.push_back(fv[k]);
    }
    verts = std::move(sv);
    fv = std::move(sf);
    if (std::isfinite(fv[0]) && std::isfinite(fv[p]) &&
        fv[p] - fv[0] < opt.f_tol) {
      result.converged = true;
      break;
    }

    Vector centroid = Vector::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < verts.size() - 1; ++k) centroid[j] += verts[k][j];
      centroid[j] /= static_cast<double>(p);
    }
    const Vector refl = clamp(centroid + alpha * (centroid - verts[p]));
    const double f_refl = objective(refl);
    if (f_refl < fv[0]) {
      const Vector expd = clamp(centroid + gamma_nm * (centroid - verts[p]));
      const double f_exp = objective(expd);
      if (f_exp < f_refl) {
        verts[p] = expd;
        fv[p] = f_exp;
      } else {
        verts[p] = refl;
        fv[p] = f_refl;
      }
    } else if (f_refl < fv[p - 1]) {
      verts[p] = refl;
      fv[p] = f_refl;
    } else {
      const Vector contr = clamp(centroid + rho_nm * (verts[p] - centroid));
      const double f_con = objective(contr);
      if (f_con < fv[p]) {
        verts[p] = contr;
        fv[p] = f_con;
      } else {
        for (std::size_t k = 1; k < verts.size(); ++k) {
          verts[k] = clamp(verts[0] + sigma_nm * (verts[k] - verts[0]));
          fv[k] = objective(verts[k]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < fv.size(); ++k)
    if (fv[k] < fv[best]) best = k;
  result.params = verts[best].array().exp();
  result.loglik = -fv[best];
  return result;
}

// ---------------------------------------------------------------------------
// Posterior sampling and prediction

struct RegionalSamples {
  std::vector<int> censored_rows;  // dataset row per sample column
  SampleBatch batch;               // k x |censored_rows|
};

// Draws joint posterior samples of the censored coordinates inside
// `[lo - buffer, hi + buffer]`, conditioning on every observed value
// exactly; censored locations outside the buffered region are ignored.
inline RegionalSamples regional_sample(const CensoredDataset& data,
                                       const CovarianceModel& tmpl, const Vector& lo,
                                       const Vector& hi, double buffer, int m,
                                       std::int64_t target_k, std::int64_t max_attempts,
                                       const CensoredOptions& opt = CensoredOptions(),
                                       ReorderMethod reorder = ReorderMethod::kVecchia,
                                       TmvnDiagnostics* diag = nullptr) {
  data.check_shapes();
  const Eigen::Index d = data.locations.cols();
  if (lo.size() != d || hi.size() != d)
    throw parameter_error("region bounds must match the location dimension");
  RegionalSamples out;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!data.censored[i]) continue;
    bool inside = true;
    for (Eigen::Index c = 0; c < d && inside; ++c)
      inside = data.locations(i, c) >= lo[c] - buffer &&
               data.locations(i, c) <= hi[c] + buffer;
    if (inside) out.censored_rows.push_back(static_cast<int>(i));
  }
  if (out.censored_rows.empty())
    throw data_error("no censored locations inside the buffered region");

  auto as = detail::assemble(data, tmpl, out.censored_rows, m, opt.threads, reorder);
  TiltOptions topt = opt.tilt;
  const TiltSolution tilt = solve_tilting(as.factor, as.a, as.b, topt, as.fixed);

  PreparedProblem prep;
  prep.order.resize(as.factor.n);
  std::iota(prep.order.begin(), prep.order.end(), 0);
  prep.a = as.a;
  prep.b = as.b;
  prep.factor = std::move(as.factor);
  prep.tilt = tilt;
  prep.gamma = tilt.gamma;
  prep.fixed = as.fixed;
  SamplerOptions sopt;
  sopt.seed = opt.seed;
  sopt.threads = opt.threads;
  const SampleBatch full =
      sample_tmvn_prepared(prep, Vector(), target_k, max_attempts, sopt, diag);

  // Keep only censored columns, in dataset-row order.
  std::sort(out.censored_rows.begin(), out.censored_rows.end());
  std::vector<int> position_of_row(data.size(), -1);
  for (int k = 0; k < static_cast<int>(as.order.size()); ++k)
    position_of_row[as.order[k]] = k;
  out.batch.attempts = full.attempts;
  out.batch.acceptance_rate = full.acceptance_rate;
  out.batch.samples.resize(full.samples.rows(),
                           static_cast<Eigen::Index>(out.censored_rows.size()));
  for (std::size_t c = 0; c < out.censored_rows.size(); ++c)
    out.batch.samples.col(static_cast<Eigen::Index>(c)) =
        full.samples.col(position_of_row[out.censored_rows[c]]);
  return out;
}

// Global variant: every censored location participates.
inline RegionalSamples sample_censored_posterior(const CensoredDataset& data,
                                                 const CovarianceModel& tmpl, int m,
                                                 std::int64_t target_k,
                                                 std::int64_t max_attempts,
                                                 const CensoredOptions& opt = CensoredOptions(),
                                                 ReorderMethod reorder = ReorderMethod::kVecchia,
                                                 TmvnDiagnostics* diag = nullptr) {
  const Eigen::Index d = data.locations.cols();
  return regional_sample(data, tmpl, Vector::Constant(d, -kInf),
                         Vector::Constant(d, kInf), 0.0, m, target_k, max_attempts, opt,
                         reorder, diag);
}

struct KrigeResult {
  Vector mean;        // posterior mean per test point
  Vector sd;          // conditional sd plus imputation spread
  Matrix per_sample;  // k x n_test conditional means
};

// Kriging from an imputation ensemble: condition on observed values and
// each sample's imputed censored values; average over the ensemble.
// Test points are appended after the training block and condition on
// their m nearest training points.
inline KrigeResult krige_predict(const CensoredDataset& data,
                                 const RegionalSamples& imputed,
                                 const CovarianceModel& tmpl,
                                 const Matrix& test_locations, int m) {
  if (imputed.batch.samples.rows() == 0) throw parameter_error("empty imputation ensemble");
  data.check_shapes();
  // Training rows: observed plus the imputed censored rows.
  std::vector<int> train_rows;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (!data.censored[i]) train_rows.push_back(static_cast<int>(i));
  const Eigen::Index n_obs = static_cast<Eigen::Index>(train_rows.size());
  train_rows.insert(train_rows.end(), imputed.censored_rows.begin(),
                    imputed.censored_rows.end());

  const auto n_train = static_cast<Eigen::Index>(train_rows.size());
  const Eigen::Index n_test = test_locations.rows();
  const auto k_samples = imputed.batch.samples.rows();
  Matrix locs(n_train + n_test, data.locations.cols());
  for (Eigen::Index t = 0; t < n_train; ++t) locs.row(t) = data.locations.row(train_rows[t]);
  locs.bottomRows(n_test) = test_locations;
  CovarianceModel model = detail::model_at(tmpl, std::move(locs));

  KrigeResult out;
  out.mean.resize(n_test);
  out.sd.resize(n_test);
  out.per_sample.resize(k_samples, n_test);

  const int mm = static_cast<int>(std::min<Eigen::Index>(m, n_train));
  std::vector<std::pair<double, int>> cand(n_train);
  Matrix train_values(k_samples, n_train);
  for (Eigen::Index t = 0; t < n_train; ++t) {
    if (t < n_obs) {
      train_values.col(t).setConstant(data.values[train_rows[t]]);
    } else {
      train_values.col(t) = imputed.batch.samples.col(t - n_obs);
    }
  }

  for (Eigen::Index q = 0; q < n_test; ++q) {
    const Eigen::Index tq = n_train + q;
    for (Eigen::Index t = 0; t < n_train; ++t)
      cand[t] = {neighbor_distance(model, tq, t), static_cast<int>(t)};
    std::partial_sort(cand.begin(), cand.begin() + mm, cand.end());

    // Exact-interpolation shortcut for a coincident training point
    // without a nugget.
    if (model.nugget == 0.0 && cand[0].first == 0.0) {
      out.per_sample.col(q) = train_values.col(cand[0].second);
      out.mean[q] = out.per_sample.col(q).mean();
      out.sd[q] = 0.0;
      continue;
    }

    Matrix S(mm, mm);
    Vector cross(mm);
    for (int r = 0; r < mm; ++r) {
      for (int c = r; c < mm; ++c) {
        const double v = kernel_value(model, cand[r].second, cand[c].second);
        S(r, c) = v;
        S(c, r) = v;
      }
      cross[r] = kernel_value(model, tq, cand[r].second);
    }
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw factorization_error("singular kriging block at test point " +
                                std::to_string(q));
    const Vector wts = llt.solve(cross);
    const double cvar =
        std::max(0.0, kernel_value(model, tq, tq) - wts.dot(cross));
    Vector vals(mm);
    for (Eigen::Index s = 0; s < k_samples; ++s) {
      for (int r = 0; r < mm; ++r) vals[r] = train_values(s, cand[r].second);
      out.per_sample(s, q) = wts.dot(vals);
    }
    out.mean[q] = out.per_sample.col(q).mean();
    const double spread =
        k_samples > 1
            ? (out.per_sample.col(q).array() - out.mean[q]).square().sum() /
                  static_cast<double>(k_samples - 1)
            : 0.0;
    out.sd[q] = std::sqrt(cvar + spread);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic fields for experiments

// Exact draw from N(0, Sigma) at n <= 2048 (dense factor), sequential
// conditional simulation above.
inline Vector simulate_gp(const CovarianceModel& model, std::uint64_t seed, int m = 50) {
  const Eigen::Index n = model.n;
  CounterRng rng(seed, Stream::kSynthetic, 0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_normal();
  if (n <= 2048) {
    Matrix S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        const double v = kernel_value(model, i, j);
        S(i, j) = v;
        S(j, i) = v;
      }
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw factorization_error("synthetic covariance is not positive definite");
    return llt.matrixL() * z;
  }
  const VecchiaFactor f = build_factor(model, m);
  Vector x(n);
  for (int i = 0; i < f.n; ++i) x[i] = f.cond_mean(x, i) + f.l[i] * z[i];
  return x;
}

// Censors a field at per-location thresholds.
inline CensoredDataset censor_field(const Matrix& locations, const Vector& field,
                                    const Vector& thresholds) {
  Vector values(field.size());
  for (Eigen::Index i = 0; i < field.size(); ++i)
    values[i] = field[i] > thresholds[i] ? field[i] : kNaN;
  return CensoredDataset::validated(locations, std::move(values), thresholds);
}

}  // namespace vecmvn
