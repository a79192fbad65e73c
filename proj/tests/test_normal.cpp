#include "vecmvn/normal.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace vecmvn;

namespace {
double rel_err(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}
}  // namespace

TEST_CASE("norm_quantile matches high-precision references", "[normal]") {
  // Reference values computed with 50-digit arithmetic.
  struct Case {
    double p, x;
  };
  const Case cases[] = {
      {1e-300, -37.04709629936119923722},
      {1e-100, -21.27345356096532429512},
      {1e-20, -9.262340089798407573717},
      {1e-10, -6.361340902404056204695},
      {1e-5, -4.264890793922824628499},
      {0.001, -3.09023230616781354154},
      {0.025, -1.959963984540054235525},
      {0.25, -0.6744897501960817432022},
      {0.5, 0.0},
      {0.75, 0.6744897501960817432022},
      {0.9999, 3.719016485455680564394},
  };
  for (const auto& c : cases) {
    INFO("p = " << c.p);
    if (c.x == 0.0) {
      REQUIRE(std::abs(norm_quantile(c.p)) < 1e-15);
    } else {
      REQUIRE(rel_err(norm_quantile(c.p), c.x) < 1e-14);
    }
  }
  REQUIRE(norm_quantile(0.0) == -kInf);
  REQUIRE(norm_quantile(1.0) == kInf);
}

TEST_CASE("erfcx agrees with references across branches", "[normal]") {
  struct Case {
    double z, v;
  };
  const Case cases[] = {
      {0.5, 0.6156903441929258748708}, {1.0, 0.4275835761558070044108},
      {3.0, 0.1790011511813899504193}, {8.0, 0.06998516620088092772275},
      {9.0, 0.06230772403777468414654}, {15.0, 0.03752960638850576574606},
      {30.0, 0.01879588886141675149713}, {100.0, 0.005641613782989432903556},
  };
  for (const auto& c : cases) {
    INFO("z = " << c.z);
    REQUIRE(rel_err(erfcx_pos(c.z), c.v) < 2e-14);
  }
}

TEST_CASE("log interval probabilities stay accurate into remote tails", "[normal]") {
  struct Case {
    double a, b, lp;
  };
  const Case cases[] = {
      {-1.0, 1.0, -0.3817151463021260722742},
      {-kInf, 0.0, -0.6931471805599453094172},
      {5.0, 6.0, -15.06844609652945335159},
      {-40.0, -39.0, -765.0831565643775444108},
      {10.0, kInf, -53.23128515051247057835},
      {38.0, 40.0, -726.5572160188201300965},
      {-2.0, -1.5, -3.122269455465259012535},
  };
  for (const auto& c : cases) {
    INFO("interval (" << c.a << ", " << c.b << ")");
    REQUIRE(rel_err(log_interval_prob(c.a, c.b), c.lp) < 1e-13);
  }
  REQUIRE(log_interval_prob(-kInf, kInf) == 0.0);
}

TEST_CASE("truncated-normal means match references", "[normal]") {
  REQUIRE(std::abs(trunc_norm_mean(-1.0, 1.0)) < 1e-15);
  REQUIRE(rel_err(trunc_norm_mean(3.0, kInf), 3.283098654930436506928) < 1e-13);
  REQUIRE(rel_err(trunc_norm_mean(-kInf, -10.0), -10.09809323396251196284) < 1e-13);
  REQUIRE(rel_err(trunc_norm_mean(38.0, 40.0), 38.02627946657586898752) < 1e-12);
}

TEST_CASE("upper quantile inverts the log survival function", "[normal]") {
  REQUIRE(rel_err(norm_upper_quantile_log(-1000.0), 44.61574773196940302048) < 1e-13);
  REQUIRE(rel_err(norm_upper_quantile_log(-50.0), 9.67482528361235650875) < 1e-13);
  for (double x : {0.3, 1.0, 2.5, 7.0, 13.0, 25.0, 37.0}) {
    const double lq = log_norm_sf(x);
    REQUIRE(rel_err(norm_upper_quantile_log(lq), x) < 1e-12);
  }
}

TEST_CASE("truncated quantile is consistent with the CDF", "[normal]") {
  // P(a < Z < y) should equal w * P(a < Z < b) at y = quantile(w).
  const double pairs[][2] = {{-1.0, 1.0}, {-kInf, 0.0}, {2.0, kInf},   {5.0, 6.0},
                             {-6.0, -5.0}, {-0.3, 8.0},  {30.0, 31.0}, {-kInf, -20.0}};
  for (const auto& ab : pairs) {
    const double a = ab[0], b = ab[1];
    for (double w : {1e-10, 0.001, 0.25, 0.5, 0.75, 0.999, 1.0 - 1e-10}) {
      const double y = trunc_norm_quantile(w, a, b);
      REQUIRE(y >= a);
      REQUIRE(y <= b);
      // Verify in log space: log(P(a<Z<y)) == log w + log P(a<Z<b).
      if (y > a && y < b && w > 1e-9 && w < 1.0 - 1e-9) {
        const double lhs = log_interval_prob(a, y);
        const double rhs = std::log(w) + log_interval_prob(a, b);
        INFO("a=" << a << " b=" << b << " w=" << w);
        REQUIRE(std::abs(lhs - rhs) < 5e-11 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("truncated moments: dpsi lies in (-1, 0]", "[normal]") {
  const double pairs[][2] = {{-1.0, 1.0}, {-kInf, 0.0}, {2.0, kInf}, {5.0, 6.0},
                             {-6.0, -5.0}, {-0.3, 8.0}, {20.0, 22.0}};
  for (const auto& ab : pairs) {
    const double lp = log_interval_prob(ab[0], ab[1]);
    const auto mom = trunc_norm_moments(ab[0], ab[1], lp);
    INFO("a=" << ab[0] << " b=" << ab[1]);
    REQUIRE(mom.dpsi <= 1e-12);
    REQUIRE(mom.dpsi > -1.0);
    REQUIRE(rel_err(mom.psi, trunc_norm_mean(ab[0], ab[1])) < 1e-12);
  }
}
