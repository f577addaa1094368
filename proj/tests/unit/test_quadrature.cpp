#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "merton/errors.hpp"
#include "merton/normal.hpp"
#include "merton/quadrature.hpp"

using namespace merton;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("polynomial on the unit interval") {
  CHECK_THAT(integrate([](double x) { return x; }, 0.0, 1.0), WithinAbs(0.5, 1e-14));
  CHECK_THAT(integrate([](double x) { return 3 * x * x; }, -1.0, 2.0), WithinAbs(9.0, 1e-12));
}

TEST_CASE("normal density normalization over the real line and half lines") {
  CHECK_THAT(integrate(std_normal_pdf, -kInf, kInf), WithinAbs(1.0, 1e-10));
  CHECK_THAT(integrate(std_normal_pdf, -kInf, 0.0), WithinAbs(0.5, 1e-10));
  CHECK_THAT(integrate(std_normal_pdf, 0.0, kInf), WithinAbs(0.5, 1e-10));
}

TEST_CASE("lognormal mean by integration") {
  const double m = -0.01125 / 2.0;
  const double v = 0.01125;
  const auto f = [&](double z) { return std::exp(m + std::sqrt(v) * z) * std_normal_pdf(z); };
  CHECK_THAT(integrate(f, -kInf, kInf, {1e-13, 1000}), WithinRel(std::exp(m + v / 2.0), 1e-12));
}

TEST_CASE("reversed bounds flip the sign") {
  const auto f = [](double x) { return std::cos(x); };
  CHECK_THAT(integrate(f, 1.0, 0.0), WithinAbs(-std::sin(1.0), 1e-13));
  CHECK(integrate(f, 0.3, 0.3) == 0.0);
}

TEST_CASE("error bound is reported") {
  const auto r = integrate_with_error([](double x) { return std::exp(-x); }, 0.0, kInf);
  CHECK_THAT(r.value, WithinAbs(1.0, 1e-10));
  CHECK(r.error_bound <= 1e-10);
}

TEST_CASE("exhausted subdivision budget raises with the best estimate") {
  // Oscillatory integrand that a handful of subintervals cannot resolve.
  const auto f = [](double x) { return std::sin(200.0 * x) * std::sin(200.0 * x); };
  try {
    integrate(f, 0.0, 10.0, {1e-14, 2});
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(std::isfinite(e.estimate()));
    CHECK(e.error_bound() > 0.0);
  }
}

TEST_CASE("invalid specs and integrand exceptions") {
  CHECK_THROWS(integrate([](double) { return 1.0; }, 0.0, 1.0, {-1.0, 100}));
  CHECK_THROWS(integrate([](double) { return 1.0; }, 0.0, 1.0, {1e-10, 0}));
  CHECK_THROWS_AS(integrate([](double) -> double { throw DomainError("boom"); }, 0.0, 1.0), DomainError);
}
