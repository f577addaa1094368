#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "merton/analytics.hpp"
#include "merton/errors.hpp"
#include "merton/normal.hpp"
#include "merton/quadrature.hpp"
#include "merton/risk.hpp"

using namespace merton;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ContractSpec kContract{};
const MarketReturnLaw kLaw{};
const StructuralParam kB{std::sqrt(0.5 * 0.0225)};

// Conditional on the market, ln(V/F) = -A - B^2/2 + B e with e standard
// normal. Oracles integrate over e directly.
double oracle_pd(double a, double b) {
  return integrate(std_normal_pdf, -kInf, (a + 0.5 * b * b) / b);
}

double oracle_recovery(double a, double b) {
  const double z = (a + 0.5 * b * b) / b;
  const double num = integrate([&](double e) { return std::exp(-a - 0.5 * b * b + b * e) * std_normal_pdf(e); },
                               -kInf, z);
  return num / std_normal_cdf(z);
}

// Single-firm expected loss with lognormal V(T): E[(1 - V/F)^+].
double oracle_single_firm_el() {
  const double s = 0.15;
  const double d2 = (std::log(100.0 / 75.0) + 0.05 - 0.5 * s * s) / s;
  const double d1 = d2 + s;
  return std_normal_cdf(-d2) - (100.0 * std::exp(0.05) / 75.0) * std_normal_cdf(-d1);
}

}  // namespace

TEST_CASE("compound parameter B") {
  CHECK_THAT(compound_b(0.5, 0.15, 1.0).b, WithinAbs(0.1060660, 5e-8));
  CHECK_THAT(compound_b(0.0, 0.2, 0.25).b, WithinAbs(0.1, 1e-15));
  CHECK_THROWS_AS(compound_b(1.0, 0.15, 1.0), DomainError);
  CHECK_THROWS_AS(compound_b(0.5, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(compound_b(1.5, 0.15, 1.0), DomainError);
}

TEST_CASE("log distance A") {
  CHECK_THAT(log_distance_a(0.0, kContract), WithinAbs(std::log(0.75), 1e-15));
  CHECK_THAT(log_distance_a(-0.25, kContract), WithinAbs(0.0, 1e-15));
  CHECK_THAT(log_distance_a(0.5, kContract), WithinAbs(std::log(0.75 / 1.5), 1e-15));
  CHECK_THROWS_AS(log_distance_a(-1.0, kContract), DomainError);
}

TEST_CASE("market return law") {
  CHECK_THAT(kLaw.log_mean(), WithinAbs(0.044375, 1e-15));
  CHECK_THAT(kLaw.log_variance(), WithinAbs(0.01125, 1e-15));
  CHECK_THAT(market_return_quantile(0.5, kLaw), WithinAbs(0.045374, 1e-6));
  CHECK_THAT(integrate([](double x) { return market_return_pdf(x, kLaw); }, -1.0, kInf), WithinAbs(1.0, 1e-9));
  const double mean = integrate([](double x) { return x * market_return_pdf(x, kLaw); }, -1.0, kInf);
  CHECK_THAT(mean, WithinAbs(std::exp(0.05) - 1.0, 1e-9));
  for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
    CHECK_THAT(market_return_cdf(market_return_quantile(q, kLaw), kLaw), WithinRel(q, 1e-10));
  }
  CHECK_THROWS_AS(market_return_pdf(-1.0, kLaw), DomainError);
  CHECK_THROWS_AS(market_return_cdf(-1.5, kLaw), DomainError);
  CHECK_THROWS_AS(market_return_quantile(0.0, kLaw), DomainError);
}

TEST_CASE("conditional default probability and recovery at x_m = 0") {
  const double a = std::log(0.75);
  const double pd = default_prob_given_xm(0.0, kContract, kB);
  CHECK_THAT(pd, WithinRel(3.92e-3, 3e-3));
  CHECK_THAT(pd, WithinRel(std_normal_cdf(-2.65925), 1e-4));
  CHECK_THAT(pd, WithinRel(oracle_pd(a, kB.b), 1e-8));
  const double r = expected_recovery_given_xm(0.0, kContract, kB);
  CHECK_THAT(r, WithinAbs(0.969, 1e-3));
  CHECK_THAT(r, WithinRel(4.0 / 3.0 * std_normal_cdf(-2.76533) / std_normal_cdf(-2.65925), 1e-4));
  CHECK_THAT(r, WithinRel(oracle_recovery(a, kB.b), 1e-9));
  CHECK_THAT(expected_lgd_given_xm(0.0, kContract, kB), WithinAbs(1.0 - r, 1e-15));
  CHECK_THAT(expected_loss_given_xm(0.0, kContract, kB), WithinRel(pd * (1.0 - r), 1e-14));
}

TEST_CASE("conditional quantities against the oracle over a market grid") {
  for (double x : {-0.3, -0.2, -0.1, 0.0, 0.05}) {
    const double a = log_distance_a(x, kContract);
    CHECK_THAT(default_prob_given_xm(x, kContract, kB), WithinRel(oracle_pd(a, kB.b), 1e-8));
    CHECK_THAT(expected_recovery_given_xm(x, kContract, kB), WithinRel(oracle_recovery(a, kB.b), 1e-8));
  }
}

TEST_CASE("structural recovery and loss at known points") {
  const StructuralParam b{0.2};
  CHECK_THAT(structural_recovery(0.5, b), WithinAbs(0.8585, 1e-4));
  CHECK_THAT(structural_recovery(0.5, b), WithinRel(std::exp(0.02) * std_normal_cdf(-0.2) / 0.5, 1e-14));
  CHECK_THAT(structural_loss(0.5, b), WithinAbs(0.07076, 1e-5));
  CHECK(structural_recovery(0.3, StructuralParam{0.0}) == 1.0);
  CHECK_THROWS_AS(structural_recovery(0.0, b), DomainError);
  CHECK_THROWS_AS(structural_recovery(1.0, b), DomainError);
}

TEST_CASE("structural curves against the conditional oracle") {
  for (double b : {0.05, 0.1060660, 0.3, 1.0}) {
    for (double pd : {1e-4, 0.01, 0.2, 0.7, 0.99}) {
      const double a = a_from_pd(pd, StructuralParam{b});
      CHECK_THAT(structural_recovery(pd, StructuralParam{b}), WithinRel(oracle_recovery(a, b), 1e-8));
    }
  }
}

TEST_CASE("structural recovery decreases in P_D and in B; loss increases in P_D") {
  for (double b : {0.05, 0.2, 0.6}) {
    double prev_r = 2.0, prev_l = -1.0;
    for (double pd = 0.001; pd < 0.999; pd += 0.01) {
      const double r = structural_recovery(pd, StructuralParam{b});
      const double l = structural_loss(pd, StructuralParam{b});
      CHECK(r < prev_r);
      CHECK(l > prev_l);
      CHECK(r > 0.0);
      CHECK(r < 1.0);
      prev_r = r;
      prev_l = l;
    }
  }
  for (double pd : {0.01, 0.3, 0.8}) {
    CHECK(structural_recovery(pd, StructuralParam{0.1}) > structural_recovery(pd, StructuralParam{0.3}));
  }
}

TEST_CASE("loss slope matches finite differences") {
  const StructuralParam b{0.25};
  for (double pd : {0.01, 0.1, 0.5, 0.9}) {
    const double h = 1e-6 * pd;
    const double fd = (structural_loss(pd + h, b) - structural_loss(pd - h, b)) / (2 * h);
    CHECK_THAT(structural_loss_slope(pd, b), WithinRel(fd, 1e-6));
  }
}

TEST_CASE("A and x_m from P_D invert the conditional default probability") {
  CHECK_THAT(a_from_pd(0.5, StructuralParam{0.2}), WithinAbs(-0.02, 1e-15));
  CHECK_THAT(a_from_pd(std_normal_cdf(1.0), StructuralParam{0.2}), WithinAbs(0.18, 1e-12));
  for (double x : {-0.3, -0.1, 0.0, 0.1}) {
    const double pd = default_prob_given_xm(x, kContract, kB);
    CHECK_THAT(a_from_pd(pd, kB), WithinAbs(log_distance_a(x, kContract), 1e-10));
    CHECK_THAT(xm_from_pd(pd, kContract, kB), WithinAbs(x, 1e-10));
  }
}

TEST_CASE("structural curves agree with the conditional route") {
  for (double x : {-0.35, -0.25, -0.15, -0.05, 0.0, 0.05}) {
    const double pd = default_prob_given_xm(x, kContract, kB);
    CHECK_THAT(structural_recovery(pd, kB), WithinAbs(expected_recovery_given_xm(x, kContract, kB), 1e-10));
    CHECK_THAT(structural_loss(pd, kB), WithinAbs(expected_loss_given_xm(x, kContract, kB), 1e-10));
  }
}

TEST_CASE("P_D from loss inverts the structural loss") {
  const StructuralParam b{0.3};
  for (double pd : {1e-6, 1e-3, 0.05, 0.5, 0.95}) {
    CHECK_THAT(pd_from_structural_loss(structural_loss(pd, b), b), WithinRel(pd, 1e-8));
  }
  CHECK_THROWS_AS(pd_from_structural_loss(0.0, b), DomainError);
  CHECK_THROWS_AS(pd_from_structural_loss(1.0, b), DomainError);
}

TEST_CASE("expected loss equals the single-firm closed form") {
  CHECK_THAT(el_analytic(kLaw, kContract, kB), WithinRel(oracle_single_firm_el(), 1e-8));
  CHECK_THAT(oracle_single_firm_el(), WithinRel(7.4768e-4, 1e-4));
}

TEST_CASE("loss density from the market law: normalization and mean") {
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) {
    const double z = -8.0 + 16.0 * i / 4000;
    grid.push_back(market_return_quantile(std_normal_cdf(z), kLaw));
  }
  const auto pdf = loss_pdf_from_market(kLaw, kContract, kB, grid);
  REQUIRE(pdf.x.size() == pdf.density.size());
  double mass = 0.0, mean = 0.0;
  for (std::size_t i = 1; i < pdf.x.size(); ++i) {
    REQUIRE(pdf.x[i] >= pdf.x[i - 1]);
    const double w = pdf.x[i] - pdf.x[i - 1];
    mass += 0.5 * w * (pdf.density[i] + pdf.density[i - 1]);
    mean += 0.5 * w * (pdf.x[i] * pdf.density[i] + pdf.x[i - 1] * pdf.density[i - 1]);
  }
  CHECK_THAT(mass, WithinAbs(1.0, 1e-3));
  CHECK_THAT(mean, WithinAbs(el_analytic(kLaw, kContract, kB), 1e-6));
}

TEST_CASE("loss density on a loss grid agrees with the cdf") {
  const double lo = 1e-3, hi = 2e-2;
  const auto grid = log_grid(lo, hi, 2001);
  const auto pdf = loss_pdf_on_loss_grid(kLaw, kContract, kB, grid);
  double mass = 0.0;
  for (std::size_t i = 1; i < pdf.x.size(); ++i) {
    mass += 0.5 * (pdf.x[i] - pdf.x[i - 1]) * (pdf.density[i] + pdf.density[i - 1]);
  }
  const double exact = loss_cdf(hi, kLaw, kContract, kB) - loss_cdf(lo, kLaw, kContract, kB);
  CHECK_THAT(mass, WithinRel(exact, 1e-5));
}

TEST_CASE("loss cdf") {
  CHECK(loss_cdf(0.0, kLaw, kContract, kB) == 0.0);
  CHECK(loss_cdf(1.0, kLaw, kContract, kB) == 1.0);
  // VaR at tail mass alpha leaves probability alpha above it.
  const double var = var_analytic(0.01, kLaw, kContract, kB);
  CHECK_THAT(loss_cdf(var, kLaw, kContract, kB), WithinAbs(0.99, 1e-9));
  double prev = 0.0;
  for (double l : log_grid(1e-8, 0.5, 50)) {
    const double c = loss_cdf(l, kLaw, kContract, kB);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("loss density from P_D samples") {
  const StructuralParam b{0.2};
  const std::vector<double> same(100, 0.1);
  const auto atom = loss_pdf_from_pd(same, b, std::vector<double>{});
  CHECK(atom.atom_mass == 1.0);
  CHECK_THAT(atom.atom_location, WithinRel(structural_loss(0.1, b), 1e-15));
  CHECK(atom.x.empty());

  // Half the samples at zero, the rest spread log-uniformly.
  std::vector<double> samples(2000, 0.0);
  const auto spread = log_grid(1e-3, 0.5, 2000);
  samples.insert(samples.end(), spread.begin(), spread.end());
  const auto edges = log_grid(1e-3, 0.5, 41);
  const auto pdf = loss_pdf_from_pd(samples, b, edges);
  CHECK(pdf.atom_location == 0.0);
  CHECK_THAT(pdf.atom_mass, WithinAbs(0.5, 1e-15));
  double mass = pdf.atom_mass;
  for (std::size_t i = 0; i < pdf.x.size(); ++i) {
    REQUIRE(pdf.upper[i] > pdf.lower[i]);
    mass += pdf.density[i] * (pdf.upper[i] - pdf.lower[i]);
  }
  CHECK_THAT(mass, WithinAbs(1.0, 1e-2));
  CHECK_THROWS_AS(loss_pdf_from_pd(std::vector<double>{}, b, edges), DomainError);
}

TEST_CASE("grids") {
  const auto g = log_grid(1e-3, 1.0, 4);
  REQUIRE(g.size() == 4);
  CHECK_THAT(g[1], WithinRel(1e-2, 1e-12));
  CHECK(g.back() == 1.0);
  const auto l = linear_grid(-1.0, 1.0, 5);
  CHECK(l[2] == 0.0);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 4), DomainError);
}
