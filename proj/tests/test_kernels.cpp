#include "vecmvn/kernels.hpp"
#include "vecmvn/reference.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace vecmvn;

namespace {
Matrix grid_2d(int g) {
  Matrix S(g * g, 2);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      S(i * g + j, 0) = g == 1 ? 0.0 : static_cast<double>(j) / (g - 1);
      S(i * g + j, 1) = g == 1 ? 0.0 : static_cast<double>(i) / (g - 1);
    }
  return S;
}
}  // namespace

TEST_CASE("matern kernel values", "[kernels]") {
  Matrix locs(2, 2);
  locs << 0.0, 0.0, 0.1, 0.0;
  auto m = CovarianceModel::matern(KernelFamily::kMatern15, 1.0, Vector::Constant(1, 0.1),
                                   0.01, locs);
  // Diagonal carries the nugget.
  REQUIRE(kernel_value(m, 0, 0) == Catch::Approx(1.01).epsilon(1e-15));
  // (1 + sqrt(3)) exp(-sqrt(3)) at scaled distance 1.
  REQUIRE(kernel_value(m, 0, 1) ==
          Catch::Approx(0.4833577245965076506).epsilon(1e-14));
  REQUIRE(kernel_value(m, 0, 1) == kernel_value(m, 1, 0));
  REQUIRE_THROWS_AS(kernel_value(m, 0, 5), index_error);
}

TEST_CASE("constant correlation family", "[kernels]") {
  auto m = CovarianceModel::constant_correlation(10, 0.5);
  REQUIRE(kernel_value(m, 0, 0) == 1.0);
  REQUIRE(kernel_value(m, 2, 7) == 0.5);
  REQUIRE(correlation_distance(m, 1, 1) == 0.0);
  REQUIRE(correlation_distance(m, 0, 3) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-15));
  REQUIRE_THROWS_AS(CovarianceModel::constant_correlation(10, 1.0), parameter_error);
  REQUIRE_THROWS_AS(CovarianceModel::constant_correlation(10, -0.2), parameter_error);
}

TEST_CASE("correlation distance composes with the kernel", "[kernels]") {
  Matrix locs(2, 2);
  locs << 0.0, 0.0, 0.1, 0.0;
  auto m = CovarianceModel::matern(KernelFamily::kMatern15, 1.0, Vector::Constant(1, 0.1),
                                   0.01, locs);
  // sqrt(1 - (1+sqrt3)e^{-sqrt3}/1.01)
  REQUIRE(correlation_distance(m, 0, 1) ==
          Catch::Approx(0.7220997129545214867).epsilon(1e-13));
}

TEST_CASE("neighbor distances", "[kernels]") {
  Matrix locs(2, 2);
  locs << 0.0, 0.0, 3.0, 4.0;
  auto m = CovarianceModel::matern(KernelFamily::kMatern15, 1.0, Vector::Constant(1, 0.7),
                                   0.0, locs);
  REQUIRE(neighbor_distance(m, 0, 0) == 0.0);
  REQUIRE(neighbor_distance(m, 0, 1) == Catch::Approx(5.0).epsilon(1e-15));

  // Chordal: one degree of longitude on the equator.
  Matrix ll(2, 2);
  ll << 0.0, 0.0, 1.0, 0.0;
  auto mc = CovarianceModel::matern(KernelFamily::kMatern05, 1.0, Vector::Constant(1, 100.0),
                                    0.0, ll, DistanceMetric::kChordal);
  const double chord = neighbor_distance(mc, 0, 1);
  REQUIRE(chord == Catch::Approx(111.1936689073054507).epsilon(1e-12));
  // Close to, and below, the great-circle length.
  REQUIRE(chord < 111.1950802335329129);
  REQUIRE(chord > 111.19);
}

TEST_CASE("anisotropic ranges rescale coordinate groups", "[kernels]") {
  Matrix locs(2, 3);
  locs << 0.0, 0.0, 0.0, 1.0, 0.0, 2.0;
  Vector ranges(3);
  ranges << 2.0, 1.0, 4.0;
  auto m = CovarianceModel::matern(KernelFamily::kMatern05, 1.0, ranges, 0.0, locs);
  // scaled distance = sqrt((1/2)^2 + (2/4)^2)
  const double t = std::sqrt(0.25 + 0.25);
  REQUIRE(kernel_value(m, 0, 1) == Catch::Approx(std::exp(-t)).epsilon(1e-14));
  REQUIRE(neighbor_distance(m, 0, 1) == Catch::Approx(t).epsilon(1e-14));
}

TEST_CASE("kernel symmetry and monotone decay", "[kernels]") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix locs(40, 2);
  for (int i = 0; i < 40; ++i) {
    locs(i, 0) = unif(gen);
    locs(i, 1) = unif(gen);
  }
  for (auto fam : {KernelFamily::kMatern05, KernelFamily::kMatern15, KernelFamily::kMatern25}) {
    auto m = CovarianceModel::matern(fam, 1.3, Vector::Constant(1, 0.2), 0.05, locs);
    for (int i = 0; i < 40; i += 7)
      for (int j = 0; j < 40; j += 5)
        REQUIRE(kernel_value(m, i, j) == kernel_value(m, j, i));
    // Strictly decreasing in distance.
    double prev = kInf;
    for (double d : {0.01, 0.05, 0.2, 0.5, 1.0, 3.0}) {
      Matrix two(2, 2);
      two << 0.0, 0.0, d, 0.0;
      auto m2 = CovarianceModel::matern(fam, 1.3, Vector::Constant(1, 0.2), 0.05, two);
      const double v = kernel_value(m2, 0, 1);
      REQUIRE(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("dense Sigma from a kernel passes Cholesky at desk scale", "[kernels]") {
  auto m = CovarianceModel::matern(KernelFamily::kMatern15, 1.0, Vector::Constant(1, 0.1),
                                   0.01, grid_2d(14));
  REQUIRE_NOTHROW(dense_cholesky(materialize_sigma(m)));
}

TEST_CASE("dense matrix family serves entries", "[kernels]") {
  Matrix S(3, 3);
  S << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.1;
  auto m = CovarianceModel::dense_matrix(S);
  REQUIRE(kernel_value(m, 1, 2) == -0.2);
  REQUIRE(kernel_value(m, 2, 2) == 1.1);
  REQUIRE(neighbor_distance(m, 1, 2) ==
          Catch::Approx(std::sqrt(1.0 - 0.2 / std::sqrt(1.5 * 1.1))).epsilon(1e-14));
}
