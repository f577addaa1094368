#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "merton/errors.hpp"
#include "merton/normal.hpp"
#include "merton/quadrature.hpp"

using namespace merton;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Phi by direct quadrature of the density: an oracle independent of erfc.
double cdf_by_quadrature(double x) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (x <= 0.0) return integrate(std_normal_pdf, -inf, x, {1e-14, 100000});
  return 1.0 - integrate(std_normal_pdf, x, inf, {1e-14, 100000});
}

double quantile_by_bisection(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("cdf at the origin is one half") { CHECK(std_normal_cdf(0.0) == 0.5); }

TEST_CASE("cdf matches quadrature of the density") {
  CHECK_THAT(std_normal_cdf(-2.65925), WithinRel(cdf_by_quadrature(-2.65925), 1e-10));
  CHECK_THAT(std_normal_cdf(-2.65925), WithinAbs(3.915e-3, 1e-6));
  for (double x : {-8.0, -3.3, -1.0, 0.4, 2.0, 5.5}) {
    CHECK_THAT(std_normal_cdf(x), WithinAbs(cdf_by_quadrature(x), 1e-13));
  }
}

TEST_CASE("cdf symmetry") {
  for (double x = -7.0; x <= 7.0; x += 0.37) {
    CHECK_THAT(std_normal_cdf(x) + std_normal_cdf(-x), WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("cdf rejects non-finite input") {
  CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("quantile at the median is zero") { CHECK_THAT(std_normal_quantile(0.5), WithinAbs(0.0, 1e-15)); }

TEST_CASE("quantile matches bisection") {
  CHECK_THAT(std_normal_quantile(0.99), WithinAbs(quantile_by_bisection(0.99), 1e-12));
  CHECK_THAT(std_normal_quantile(0.99), WithinAbs(2.32635, 1e-5));
  for (double p : {1e-300, 1e-20, 1e-8, 0.003, 0.2, 0.77, 0.999999}) {
    CHECK_THAT(std_normal_quantile(p), WithinAbs(quantile_by_bisection(p), 1e-9));
  }
}

TEST_CASE("quantile inverts the cdf on [-6, 6]") {
  for (double x = -6.0; x <= 6.0; x += 0.05) {
    // In the upper tail the rounding of Phi(x) near 1 alone moves x by
    // about eps / phi(x).
    const double conditioning = std::numeric_limits<double>::epsilon() / std_normal_pdf(x);
    CHECK_THAT(std_normal_quantile(std_normal_cdf(x)), WithinAbs(x, 1e-9 + conditioning));
  }
}

TEST_CASE("quantile rejects probabilities outside (0, 1)") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::numeric_limits<double>::quiet_NaN()}) {
    CHECK_THROWS_AS(std_normal_quantile(p), DomainError);
  }
}

TEST_CASE("pdf integrates to one and peaks at 1/sqrt(2 pi)") {
  CHECK(std_normal_pdf(0.0) == kInvSqrt2Pi);
  CHECK(std_normal_pdf(1.3) == std_normal_pdf(-1.3));
}
