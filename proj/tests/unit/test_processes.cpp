#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "merton/errors.hpp"
#include "merton/processes.hpp"

using namespace merton;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  double sum = 0.0, sq = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / xs.size();
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, sq / (xs.size() - 1)};
}

std::vector<double> logs(const std::vector<double>& values, double v0) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(std::log(v / v0));
  return out;
}

}  // namespace

TEST_CASE("process names round-trip") {
  for (auto kind : {ProcessKind::Diffusion, ProcessKind::JumpDiffusion, ProcessKind::Garch}) {
    CHECK(parse_process_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_process_kind("heston"), ConfigError);
}

TEST_CASE("zero volatility gives the deterministic compounding limit") {
  const ContractSpec contract;
  const DiffusionParams params{0.05, 0.0, 0.5};
  const auto out = simulate_diffusion(contract, params, 10, RngStream(1, 0, 0));
  const double expected = 100.0 * std::pow(1.0 + 0.05 / 250, 250);
  for (double v : out.values) CHECK_THAT(v, WithinRel(expected, 1e-12));
  CHECK_THAT(out.market_return, WithinRel(expected / 100.0 - 1.0, 1e-10));
}

TEST_CASE("full correlation makes every firm identical") {
  const auto out = simulate_diffusion(ContractSpec{}, DiffusionParams{0.05, 0.15, 1.0}, 25, RngStream(3, 8, 0));
  for (double v : out.values) CHECK(v == out.values.front());
}

TEST_CASE("market return is the mean relative change of the firms") {
  const auto out = simulate_diffusion(ContractSpec{}, DiffusionParams{}, 40, RngStream(4, 2, 0));
  double sum = 0.0;
  for (double v : out.values) sum += v;
  CHECK_THAT(out.market_return, WithinAbs(sum / (40 * 100.0) - 1.0, 1e-14));
}

TEST_CASE("independent diffusion firms: terminal moments") {
  const int firms = 100000;
  const auto out = simulate_diffusion(ContractSpec{}, DiffusionParams{0.05, 0.15, 0.0}, firms, RngStream(11, 0, 0));
  const auto v = moments(out.values);
  // The Euler product is a martingale times (1 + mu dt)^N.
  const double exact_mean = 100.0 * std::pow(1.0 + 0.05 / 250, 250);
  CHECK(std::abs(v.mean - exact_mean) < 4.0 * std::sqrt(v.variance / firms));
  const auto l = moments(logs(out.values, 100.0));
  CHECK(std::abs(l.mean - (0.05 - 0.5 * 0.0225)) < 4.0 * 0.15 / std::sqrt(firms));
  CHECK_THAT(l.variance, WithinRel(0.0225, 0.02));
}

TEST_CASE("diffusion is reproducible and firm draws do not depend on portfolio size") {
  const RngStream r(99, 5, 0);
  const auto a = simulate_diffusion(ContractSpec{}, DiffusionParams{}, 30, r);
  const auto b = simulate_diffusion(ContractSpec{}, DiffusionParams{}, 30, r);
  CHECK(a.values == b.values);
  const auto c = simulate_diffusion(ContractSpec{}, DiffusionParams{}, 10, r);
  for (int k = 0; k < 10; ++k) CHECK(c.values[k] == a.values[k]);
}

TEST_CASE("zero jump intensity reproduces the diffusion bit for bit") {
  const RngStream r(2010, 17, 0);
  const auto d = simulate_diffusion(ContractSpec{}, DiffusionParams{}, 50, r);
  const auto j = simulate_jump_diffusion(ContractSpec{}, DiffusionParams{}, JumpParams{0.0, 0.4, 0.3}, 50, r);
  CHECK(d.values == j.values);
  CHECK(d.market_return == j.market_return);
}

TEST_CASE("jump schedule: per-step frequency of rare jumps") {
  const ContractSpec contract;
  const JumpParams jumps;
  const int paths = 400000;
  long events = 0;
  for (int p = 0; p < paths; ++p) {
    RngStream s(5, p, 3);
    events += static_cast<long>(draw_jump_schedule(s, contract, jumps).size());
  }
  const double firm_steps = double(paths) * contract.steps;
  const double rate = events / firm_steps;
  const double expected = jumps.intensity * contract.dt();
  CHECK_THAT(expected, WithinRel(2e-5, 1e-12));
  CHECK(std::abs(rate - expected) < 4.0 * std::sqrt(expected / firm_steps));
}

TEST_CASE("jump schedule: 1e7 firm-steps at lambda dt = 2e-5") {
  const ContractSpec contract;
  const JumpParams jumps;
  const int paths = 40000;
  long events = 0;
  for (int p = 0; p < paths; ++p) {
    RngStream s(20100601, p, substream::firm_jumps(0));
    events += static_cast<long>(draw_jump_schedule(s, contract, jumps).size());
  }
  const double rate = events / 1e7;
  CHECK(std::abs(rate - 2e-5) <= 3.0 * std::sqrt(2e-5 / 1e7));
}

TEST_CASE("jump schedule: per-step counts are Poisson and sizes lognormal") {
  const ContractSpec contract;
  const JumpParams jumps{50.0, 0.4, 0.3};
  const double mean = jumps.intensity * contract.dt();
  std::vector<long> per_count(4, 0);
  std::vector<double> sizes;
  const int paths = 2000;
  for (int p = 0; p < paths; ++p) {
    RngStream s(6, p, 0);
    const auto schedule = draw_jump_schedule(s, contract, jumps);
    std::vector<int> counts(contract.steps, 0);
    int previous = 0;
    for (const auto& e : schedule) {
      REQUIRE(e.step >= previous);
      REQUIRE(e.step < contract.steps);
      previous = e.step;
      ++counts[e.step];
      sizes.push_back(e.increment);
    }
    for (int c : counts) ++per_count[std::min(c, 3)];
  }
  const double steps = double(paths) * contract.steps;
  const double p0 = std::exp(-mean), p1 = mean * p0, p2 = mean * mean / 2 * p0;
  CHECK_THAT(per_count[0] / steps, WithinAbs(p0, 4.0 * std::sqrt(p0 * (1 - p0) / steps)));
  CHECK_THAT(per_count[1] / steps, WithinAbs(p1, 4.0 * std::sqrt(p1 * (1 - p1) / steps)));
  CHECK_THAT(per_count[2] / steps, WithinAbs(p2, 4.0 * std::sqrt(p2 * (1 - p2) / steps)));
  const auto m = moments(sizes);
  CHECK(std::abs(m.mean - jumps.mean_jump()) < 4.0 * std::sqrt(m.variance / sizes.size()));
  const double sd = (1.0 + jumps.mean_jump()) * std::sqrt(std::exp(0.09) - 1.0);
  CHECK_THAT(std::sqrt(m.variance), WithinRel(sd, 0.02));
  for (double x : sizes) REQUIRE(x > -1.0);
}

TEST_CASE("market path carries jumps only for the jump engine") {
  const JumpParams jumps{200.0, 0.0, 0.1};
  const auto plain = draw_market_path(ContractSpec{}, RngStream(1, 1, 0));
  const auto jumpy = draw_market_path(ContractSpec{}, RngStream(1, 1, 0), &jumps);
  CHECK(plain.jumps.empty());
  CHECK(plain.normals == jumpy.normals);
  REQUIRE(jumpy.jumps.size() == 250);
  int nonzero = 0;
  for (double j : jumpy.jumps) nonzero += j != 0.0;
  CHECK(nonzero > 0);
}

TEST_CASE("jump-diffusion mean given the market path") {
  const int firms = 100000;
  const JumpParams jumps{2.0, 0.1, 0.2};
  const ContractSpec contract;
  const RngStream r(8, 0, 0);
  const auto out = simulate_jump_diffusion(contract, DiffusionParams{0.05, 0.15, 0.0}, jumps, firms, r);
  const auto v = moments(out.values);
  // Conditional on the shared market jumps, each step multiplies the mean by
  // 1 + mu dt + lambda dt E[J] + dJ_m.
  const auto market = draw_market_path(contract, r, &jumps);
  double expected = 100.0;
  for (double mj : market.jumps) expected *= 1.0 + 0.05 * contract.dt() + jumps.intensity * contract.dt() * jumps.mean_jump() + mj;
  CHECK(std::abs(v.mean - expected) < 4.0 * std::sqrt(v.variance / firms));
}

TEST_CASE("GARCH with no feedback matches the diffusion engine") {
  const ContractSpec contract;
  const DiffusionParams d{0.05, 0.15, 0.5};
  const double var = d.sigma * d.sigma * contract.dt();
  const GarchParams g{var, 0.0, 0.0, std::sqrt(var)};
  const RngStream r(123, 4, 0);
  const auto diffusion = simulate_diffusion(contract, d, 40, r);
  const auto garch = simulate_garch(contract, d.mu, g, d.corr, 40, r);
  for (int k = 0; k < 40; ++k) CHECK_THAT(garch.values[k], WithinRel(diffusion.values[k], 1e-10));
}

TEST_CASE("GARCH defaults: terminal moments match the stationary variance") {
  const ContractSpec contract;
  const GarchParams g = GarchParams::defaults_for(0.15, contract.dt());
  const int firms = 100000;
  const auto out = simulate_garch(contract, 0.05, g, 0.0, firms, RngStream(17, 0, 0));
  const auto v = moments(out.values);
  const double exact_mean = 100.0 * std::pow(1.0 + 0.05 / 250, 250);
  CHECK(std::abs(v.mean - exact_mean) < 4.0 * std::sqrt(v.variance / firms));
  const auto l = moments(logs(out.values, 100.0));
  CHECK_THAT(l.variance, WithinRel(0.0225, 0.04));
}

TEST_CASE("GARCH is reproducible") {
  const ContractSpec contract;
  const GarchParams g = GarchParams::defaults_for(0.15, contract.dt());
  const RngStream r(5, 5, 0);
  CHECK(simulate_garch(contract, 0.05, g, 0.5, 20, r).values ==
        simulate_garch(contract, 0.05, g, 0.5, 20, r).values);
}

TEST_CASE("process dispatch and validation") {
  ProcessParams p;
  p.kind = ProcessKind::Garch;
  p.garch = GarchParams::defaults_for(0.15, 1.0 / 250);
  const RngStream r(5, 5, 0);
  CHECK(simulate(ContractSpec{}, p, 5, r).values ==
        simulate_garch(ContractSpec{}, 0.05, p.garch, 0.5, 5, r).values);
  CHECK_THROWS_AS(simulate_diffusion(ContractSpec{}, DiffusionParams{}, 0, r), ConfigError);
  p.garch.alpha1 = 0.5;
  p.garch.beta1 = 0.5;
  CHECK_THROWS_AS(simulate(ContractSpec{}, p, 5, r), ConfigError);
}

TEST_CASE("a crash through zero pins the value at zero") {
  // A huge downward market jump drives every factor negative.
  const JumpParams jumps{1000.0, -5.0, 0.1};
  const auto out = simulate_jump_diffusion(ContractSpec{}, DiffusionParams{0.05, 0.15, 0.5}, jumps, 5,
                                           RngStream(1, 0, 0));
  for (double v : out.values) CHECK(v == 0.0);
}
