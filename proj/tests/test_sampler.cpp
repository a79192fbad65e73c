#include "vecmvn/reference.hpp"
#include "vecmvn/sampler.hpp"
#include "vecmvn/scenarios.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace vecmvn;

namespace {

CovarianceModel random_matern(int n, std::mt19937& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix locs(n, 2);
  for (int i = 0; i < n; ++i) {
    locs(i, 0) = unif(gen);
    locs(i, 1) = unif(gen);
  }
  return CovarianceModel::matern(KernelFamily::kMatern15, 0.5 + unif(gen),
                                 Vector::Constant(1, 0.05 + 0.3 * unif(gen)),
                                 0.02 + 0.1 * unif(gen), locs);
}

// One-sample Kolmogorov-Smirnov p-value against an analytic CDF.
template <class Cdf>
double ks_pvalue(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

TEST_CASE("integrand closed form on independent halves", "[sampler]") {
  const int n = 6;
  auto f = build_factor(CovarianceModel::identity(n), 3);
  Vector a = Vector::Constant(n, -kInf), b = Vector::Constant(n, 0.0);
  Vector gamma = Vector::Zero(n), w = Vector::Constant(n, 0.5), x;
  auto lw = vmet_integrand(a, b, f, gamma, w, x);
  REQUIRE(lw.log_value == Catch::Approx(n * std::log(0.5)).epsilon(1e-13));
  const double y = norm_quantile(0.25);
  for (int i = 0; i < n; ++i) REQUIRE(x[i] == Catch::Approx(y).epsilon(1e-13));
}

TEST_CASE("zero tilt gives the separation-of-variables weight", "[sampler]") {
  std::mt19937 gen(3);
  const int n = 7;
  auto model = random_matern(n, gen);
  auto f = build_factor(model, 3);
  Vector a = Vector::Constant(n, -0.7), b = Vector::Constant(n, 1.1);
  Vector gamma = Vector::Zero(n), w(n), x;
  for (int i = 0; i < n; ++i) w[i] = 0.05 + 0.9 * (i + 1.0) / (n + 1.0);
  auto lw = vmet_integrand(a, b, f, gamma, w, x);
  // Recompute sum of conditional interval log-probs along the same path.
  double expect = 0.0;
  Vector xx = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double mu = f.cond_mean(xx, i);
    const double li = f.l[i];
    const double lp = log_interval_prob((a[i] - mu) / li, (b[i] - mu) / li);
    expect += lp;
    xx[i] = x[i];
  }
  REQUIRE(lw.log_value == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("full conditioning reproduces the dense path sample by sample", "[sampler]") {
  std::mt19937 gen(5);
  std::normal_distribution<double> norm(0.0, 0.4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 2 + static_cast<int>(gen() % 9);
    auto model = random_matern(n, gen);
    auto f = build_factor(model, n - 1);
    const Matrix L = dense_cholesky(materialize_sigma(model));
    Vector a(n), b(n), gamma(n), w(n), x_sparse, x_dense;
    for (int i = 0; i < n; ++i) {
      a[i] = unif(gen) < 0.3 ? -kInf : -2.0 + unif(gen);
      b[i] = unif(gen) < 0.3 ? kInf : 1.0 + unif(gen);
      gamma[i] = norm(gen);
      w[i] = 0.01 + 0.98 * unif(gen);
    }
    const double lh_sparse = vmet_integrand(a, b, f, gamma, w, x_sparse).log_value;
    const double lh_dense = dense_met_path(L, a, b, gamma, w, x_dense);
    INFO("rep " << rep << " n " << n);
    REQUIRE(lh_sparse == Catch::Approx(lh_dense).margin(1e-10));
    REQUIRE((x_sparse - x_dense).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("independent coordinates: estimate is exact and QMC is tight", "[sampler]") {
  auto spec = scenario_identity(10);
  SamplerOptions opt;
  opt.seed = 11;
  opt.qmc = true;
  auto est = estimate_mvn_prob(spec, 3, 10000, opt);
  const double truth = std::pow(2.0, -10.0);
  REQUIRE(std::abs(est.estimate - truth) / truth < 0.005);
  // Independent coordinates have a constant integrand: zero spread.
  REQUIRE(est.std_error <= 1e-12 * truth);
}

TEST_CASE("matern box probability matches the dense oracle", "[sampler][slow]") {
  std::mt19937 gen(7);
  const int n = 5;
  auto model = random_matern(n, gen);
  auto spec = ProblemSpec::make(model, Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
  auto oracle = dense_sov_estimate(materialize_sigma(model), spec.lower, spec.upper,
                                   2000000, 1234);
  SamplerOptions opt;
  opt.seed = 21;
  auto est = estimate_mvn_prob(spec, n - 1, 100000, opt);
  const double se = std::hypot(est.std_error, oracle.std_error);
  REQUIRE(std::abs(est.estimate - oracle.estimate) <= 3.0 * se);
}

TEST_CASE("estimator is unbiased for the factor-implied covariance", "[sampler][slow]") {
  std::mt19937 gen(9);
  for (int m : {1, 2, 4}) {
    const int n = 6;
    auto model = random_matern(n, gen);
    auto spec = ProblemSpec::make(model, Vector::Constant(n, -kInf),
                                  Vector::Constant(n, 0.4));
    SamplerOptions opt;
    opt.seed = 31 + m;
    opt.reorder = ReorderMethod::kNone;
    auto est = estimate_mvn_prob(spec, m, 400000, opt);
    // Reference truth for the *approximate* covariance (V V^T)^{-1}.
    auto f = build_factor(model, m);
    auto oracle =
        dense_sov_estimate(materialize_sigma_v(f), spec.lower, spec.upper, 2000000, 77);
    const double se = std::hypot(est.std_error, oracle.std_error);
    INFO("m = " << m);
    REQUIRE(std::abs(est.estimate - oracle.estimate) <= 3.0 * se);
  }
}

TEST_CASE("importance sampling is unbiased for any tilt", "[sampler][slow]") {
  std::mt19937 gen(13);
  const int n = 8;
  auto model = random_matern(n, gen);
  auto spec =
      ProblemSpec::make(model, Vector::Constant(n, -kInf), Vector::Constant(n, -0.5));
  SamplerOptions tilted;
  tilted.seed = 41;
  SamplerOptions plain = tilted;
  plain.tilt = false;
  plain.seed = 42;
  auto est_tilted = estimate_mvn_prob(spec, 4, 300000, tilted);
  auto est_plain = estimate_mvn_prob(spec, 4, 300000, plain);
  const double se = std::hypot(est_tilted.std_error, est_plain.std_error);
  REQUIRE(std::abs(est_tilted.estimate - est_plain.estimate) <= 3.0 * se);
  // The tilt should not hurt the variance on a tail problem.
  REQUIRE(est_tilted.std_error <= est_plain.std_error * 1.5);
}

TEST_CASE("estimates are deterministic and thread-count independent", "[sampler]") {
  auto spec = scenario1(49);
  SamplerOptions opt1;
  opt1.seed = 55;
  opt1.threads = 1;
  SamplerOptions opt2 = opt1;
  opt2.threads = 2;
  auto e1 = estimate_mvn_prob(spec, 8, 4000, opt1);
  auto e2 = estimate_mvn_prob(spec, 8, 4000, opt2);
  auto e3 = estimate_mvn_prob(spec, 8, 4000, opt1);
  REQUIRE(e1.log_mean == e2.log_mean);
  REQUIRE(e1.log_mean == e3.log_mean);
  REQUIRE(e1.std_error == e2.std_error);
}

TEST_CASE("nonzero mean shifts the problem exactly", "[sampler]") {
  std::mt19937 gen(15);
  const int n = 6;
  auto model = random_matern(n, gen);
  Vector mean = Vector::LinSpaced(n, -0.5, 0.5);
  Vector a = Vector::Constant(n, -kInf);
  Vector b = Vector::Constant(n, 0.3);
  auto with_mean = ProblemSpec::make(model, a, b, mean);
  Vector b_shift = b - mean;
  auto shifted = ProblemSpec::make(model, a, b_shift);
  SamplerOptions opt;
  opt.seed = 60;
  auto e1 = estimate_mvn_prob(with_mean, 3, 5000, opt);
  auto e2 = estimate_mvn_prob(shifted, 3, 5000, opt);
  REQUIRE(e1.log_mean == e2.log_mean);
}

TEST_CASE("multi-level: equal levels give exactly zero correction", "[sampler]") {
  auto spec = scenario_const_corr(36, 0.5);
  SamplerOptions opt;
  opt.seed = 70;
  auto est = estimate_multilevel(spec, 6, 6, 4000, 400, opt);
  REQUIRE(est.bias_correction == 0.0);
  auto plain = estimate_mvn_prob(spec, 6, 4000, opt);
  REQUIRE(est.log_mean == Catch::Approx(plain.log_mean).epsilon(1e-12));
}

TEST_CASE("multi-level: independence makes any pairing unbiased", "[sampler]") {
  auto spec = scenario_identity(25);
  SamplerOptions opt;
  opt.seed = 71;
  opt.tilt = false;  // gamma is exactly zero, so paths are constants
  auto est = estimate_multilevel(spec, 2, 8, 4000, 400, opt);
  // A = 0 for every m, so the two levels produce identical paths.
  REQUIRE(std::abs(est.bias_correction) <= 1e-14 * est.estimate);
  REQUIRE(est.estimate == Catch::Approx(std::pow(2.0, -25.0)).epsilon(1e-10));
}

TEST_CASE("multi-level validates its preconditions", "[sampler]") {
  auto spec = scenario_identity(9);
  SamplerOptions opt;
  REQUIRE_THROWS_AS(estimate_multilevel(spec, 8, 4, 1000, 100, opt), parameter_error);
  REQUIRE_THROWS_AS(estimate_multilevel(spec, 2, 4, 100, 1000, opt), parameter_error);
}

TEST_CASE("univariate truncated sampling is exact", "[sampler]") {
  auto spec = scenario_identity(1);
  SamplerOptions opt;
  opt.seed = 80;
  TmvnDiagnostics diag;
  auto batch = sample_tmvn(spec, 1, 5000, 100000, opt, &diag);
  REQUIRE(batch.samples.rows() == 5000);
  // Proposal equals the target: every draw accepted.
  REQUIRE(batch.acceptance_rate == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(diag.max_log_excess <= 1e-9);
  std::vector<double> xs(batch.samples.rows());
  for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
    xs[i] = batch.samples(i, 0);
    REQUIRE(xs[i] <= 0.0);
  }
  const double p = ks_pvalue(std::move(xs), [](double v) { return 2.0 * norm_cdf(v); });
  REQUIRE(p > 0.01);
}

TEST_CASE("small correlated box sampling matches the naive oracle", "[sampler][slow]") {
  Matrix S(4, 4);
  S << 1.0, 0.6, 0.3, 0.15, 0.6, 1.0, 0.6, 0.3, 0.3, 0.6, 1.0, 0.6, 0.15, 0.3, 0.6, 1.0;
  auto model = CovarianceModel::dense_matrix(S);
  Vector a(4), b(4);
  a << -1.0, -kInf, -0.5, -2.0;
  b << 1.0, 0.5, 2.0, 0.8;
  auto spec = ProblemSpec::make(model, a, b);
  SamplerOptions opt;
  opt.seed = 90;
  TmvnDiagnostics diag;
  auto batch = sample_tmvn(spec, 3, 30000, 4000000, opt, &diag);
  REQUIRE(batch.samples.rows() == 30000);
  REQUIRE(diag.max_log_excess <= 1e-9);
  for (Eigen::Index r = 0; r < batch.samples.rows(); ++r)
    for (int j = 0; j < 4; ++j) {
      REQUIRE(batch.samples(r, j) >= a[j]);
      REQUIRE(batch.samples(r, j) <= b[j]);
    }

  auto oracle = dense_rejection_sample(S, a, b, 30000, 4000000, 91);
  REQUIRE(oracle.samples.rows() > 10000);
  const auto k1 = static_cast<double>(batch.samples.rows());
  const auto k2 = static_cast<double>(oracle.samples.rows());
  for (int j = 0; j < 4; ++j) {
    const double m1 = batch.samples.col(j).mean();
    const double m2 = oracle.samples.col(j).mean();
    const double v1 = (batch.samples.col(j).array() - m1).square().sum() / (k1 - 1);
    const double v2 = (oracle.samples.col(j).array() - m2).square().sum() / (k2 - 1);
    const double se = std::sqrt(v1 / k1 + v2 / k2);
    INFO("coordinate " << j);
    REQUIRE(std::abs(m1 - m2) <= 3.5 * se);
  }
}

TEST_CASE("acceptance bound holds across random problems", "[sampler]") {
  std::mt19937 gen(17);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 3 + static_cast<int>(gen() % 6);
    auto model = random_matern(n, gen);
    auto spec = ProblemSpec::make(model, Vector::Constant(n, -kInf),
                                  Vector::Constant(n, 0.2));
    SamplerOptions opt;
    opt.seed = 100 + rep;
    TmvnDiagnostics diag;
    auto batch = sample_tmvn(spec, 2, 500, 100000, opt, &diag);
    INFO("rep " << rep << " acceptance " << batch.acceptance_rate);
    REQUIRE(diag.max_log_excess <= 1e-9);
    REQUIRE(batch.samples.rows() > 0);
  }
}

TEST_CASE("empty batch when nothing is accepted", "[sampler]") {
  auto spec = scenario_identity(3);
  SamplerOptions opt;
  opt.seed = 110;
  auto batch = sample_tmvn(spec, 1, 10, 0, opt);  // zero attempts allowed
  REQUIRE(batch.samples.rows() == 0);
  REQUIRE(batch.acceptance_rate == 0.0);
}

TEST_CASE("reordering reduces integrand variance on tail problems",
          "[sampler][slow]") {
  // Median relative error across seeds, one prepared pipeline per
  // ordering. The effect needs tail mass and scale to show.
  auto spec = scenario1(900);
  auto median_relerr = [&](ReorderMethod method) {
    SamplerOptions opt;
    opt.reorder = method;
    auto prep = prepare_problem(spec, 30, opt);
    std::vector<double> errs;
    for (int rep = 0; rep < 5; ++rep) {
      opt.seed = 300 + rep;
      errs.push_back(estimate_prepared(prep, 10000, opt).rel_error);
    }
    std::sort(errs.begin(), errs.end());
    return errs[2];
  };
  const double none = median_relerr(ReorderMethod::kNone);
  const double uni = median_relerr(ReorderMethod::kUnivariate);
  const double vec = median_relerr(ReorderMethod::kVecchia);
  INFO("none " << none << " univariate " << uni << " vecchia " << vec);
  // The vec-vs-uni ratio needs ~30 replicates to stabilize; the
  // acceptance suite pins it. Here: both beat no reordering clearly.
  REQUIRE(uni <= none);
  REQUIRE(vec <= none);
}
