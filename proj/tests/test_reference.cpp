#include "vecmvn/reference.hpp"
#include "vecmvn/scenarios.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace vecmvn;

TEST_CASE("dense cholesky basics", "[reference]") {
  REQUIRE(dense_cholesky(Matrix::Identity(5, 5)).isApprox(Matrix::Identity(5, 5)));
  const double rho = 0.4;
  Matrix S(2, 2);
  S << 1.0, rho, rho, 1.0;
  Matrix L = dense_cholesky(S);
  REQUIRE(L(0, 0) == Catch::Approx(1.0));
  REQUIRE(L(1, 0) == Catch::Approx(rho));
  REQUIRE(L(1, 1) == Catch::Approx(std::sqrt(1.0 - rho * rho)));

  std::mt19937 gen(5);
  std::normal_distribution<double> norm(0.0, 1.0);
  Matrix A(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) A(i, j) = norm(gen);
  Matrix SPD = A * A.transpose() + 8.0 * Matrix::Identity(8, 8);
  Matrix L2 = dense_cholesky(SPD);
  REQUIRE(((L2 * L2.transpose() - SPD).norm() / SPD.norm()) < 1e-12);

  Matrix bad = Matrix::Identity(3, 3);
  bad(2, 2) = -1.0;
  REQUIRE_THROWS_AS(dense_cholesky(bad), factorization_error);
}

TEST_CASE("dense SOV oracle: exact cases", "[reference]") {
  // Independent coordinates: zero-variance product of interval probs.
  Vector a = Vector::Constant(4, -1.0), b = Vector::Constant(4, 0.5);
  auto est = dense_sov_estimate(Matrix::Identity(4, 4), a, b, 2000, 3);
  const double p1 = norm_cdf(0.5) - norm_cdf(-1.0);
  REQUIRE(est.estimate == Catch::Approx(std::pow(p1, 4.0)).epsilon(1e-12));
  REQUIRE(est.std_error <= 1e-14);

  // n = 1 is exact.
  Vector a1 = Vector::Constant(1, -kInf), b1 = Vector::Constant(1, -2.0);
  auto est1 = dense_sov_estimate(Matrix::Identity(1, 1), a1, b1, 100, 5);
  REQUIRE(est1.estimate == Catch::Approx(norm_cdf(-2.0)).epsilon(1e-12));
}

TEST_CASE("dense SOV oracle: self-consistency across seeds", "[reference][slow]") {
  auto spec = scenario1(25);
  const Matrix S = materialize_sigma(spec.covariance);
  auto e1 = dense_sov_estimate(S, spec.lower, spec.upper, 400000, 11);
  auto e2 = dense_sov_estimate(S, spec.lower, spec.upper, 400000, 12);
  const double se = std::hypot(e1.std_error, e2.std_error);
  REQUIRE(std::abs(e1.estimate - e2.estimate) <= 3.0 * se);
  // Thread-count independence, bit for bit.
  auto e3 = dense_sov_estimate(S, spec.lower, spec.upper, 50000, 11, 2);
  auto e4 = dense_sov_estimate(S, spec.lower, spec.upper, 50000, 11, 1);
  REQUIRE(e3.log_mean == e4.log_mean);
}

TEST_CASE("rejection oracle acceptance matches the box probability", "[reference]") {
  Vector a = Vector::Constant(3, -1.0), b = Vector::Constant(3, 1.0);
  auto batch = dense_rejection_sample(Matrix::Identity(3, 3), a, b, 100000, 200000, 9);
  const double p1 = norm_cdf(1.0) - norm_cdf(-1.0);
  const double expect = std::pow(p1, 3.0);
  const double se = std::sqrt(expect * (1.0 - expect) / 200000.0);
  REQUIRE(std::abs(batch.acceptance_rate - expect) <= 4.0 * se);
  for (Eigen::Index r = 0; r < batch.samples.rows(); r += 37)
    for (int j = 0; j < 3; ++j) REQUIRE(std::abs(batch.samples(r, j)) <= 1.0);
}

TEST_CASE("materialized factor covariance: exact limits", "[reference]") {
  // Identity stays identity for any m.
  auto f = build_factor(CovarianceModel::identity(7), 3);
  REQUIRE((materialize_sigma_v(f) - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);

  // Full conditioning reproduces Sigma.
  auto spec = scenario1(16);
  auto full = build_factor(spec.covariance, 15);
  const Matrix S = materialize_sigma(spec.covariance);
  REQUIRE((materialize_sigma_v(full) - S).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("factor covariance error decreases with m", "[reference]") {
  auto spec = scenario1(100);
  const Matrix S = materialize_sigma(spec.covariance);
  double prev = kInf;
  for (int m : {1, 5, 20}) {
    auto f = build_factor(spec.covariance, m);
    const double err = (materialize_sigma_v(f) - S).norm();
    INFO("m = " << m);
    REQUIRE(err < prev);
    prev = err;
  }
}
