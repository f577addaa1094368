#include "merton/analytics.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "merton/errors.hpp"
#include "merton/normal.hpp"

namespace merton {

namespace {

void require_b(StructuralParam b) {
  if (!(b.b > 0.0) || !std::isfinite(b.b)) {
    throw DomainError("structural parameter B must be finite and > 0");
  }
}

void require_pd(double pd, const char* where) {
  if (!(pd > 0.0 && pd < 1.0)) throw DomainError(std::string(where) + ": P_D must lie in (0, 1)");
}

// exp(-B z + B^2/2) Phi(z - B), the recovered mass per unit face value.
double recovered_mass(double z, double b) {
  return std::exp(-b * z + 0.5 * b * b) * std_normal_cdf(z - b);
}

struct Conditional {
  double pd;
  double recovery_mass;  // e^{-A} Phi((A - B^2/2)/B)
};

Conditional conditional(double x_m, const ContractSpec& contract, StructuralParam b) {
  require_b(b);
  if (x_m == -1.0) return {1.0, 0.0};
  const double a = log_distance_a(x_m, contract);
  const double half_b2 = 0.5 * b.b * b.b;
  return {std_normal_cdf((a + half_b2) / b.b), std::exp(-a) * std_normal_cdf((a - half_b2) / b.b)};
}

}  // namespace

StructuralParam compound_b(double corr, double sigma, double maturity) {
  if (!(corr >= 0.0 && corr <= 1.0)) throw DomainError("compound_b: correlation outside [0, 1]");
  if (!(sigma > 0.0)) throw DomainError("compound_b: volatility must be > 0");
  if (!(maturity > 0.0)) throw DomainError("compound_b: maturity must be > 0");
  if (corr == 1.0) {
    throw DomainError("compound_b: degenerate B (c = 1 leaves no idiosyncratic risk)");
  }
  return {std::sqrt((1.0 - corr) * sigma * sigma * maturity)};
}

double log_distance_a(double x_m, const ContractSpec& contract) {
  if (!(x_m > -1.0)) throw DomainError("log_distance_a: market return must exceed -1");
  return std::log(contract.face_value / contract.initial_value) - std::log1p(x_m);
}

MarketReturnLaw MarketReturnLaw::from(const DiffusionParams& params, const ContractSpec& contract) {
  return {params.mu, params.sigma, params.corr, contract.maturity};
}

void MarketReturnLaw::validate() const {
  if (!(log_variance() > 0.0) || !std::isfinite(log_variance()) || !std::isfinite(mu)) {
    throw DomainError("market return law is degenerate (c sigma^2 T must be > 0)");
  }
}

double market_return_pdf(double x_m, const MarketReturnLaw& law) {
  law.validate();
  if (!(x_m > -1.0)) throw DomainError("market_return_pdf: market return must exceed -1");
  const double v = law.log_variance();
  const double u = std::log1p(x_m) - law.log_mean();
  return std::exp(-u * u / (2.0 * v)) / ((x_m + 1.0) * std::sqrt(2.0 * std::numbers::pi * v));
}

double market_return_cdf(double x_m, const MarketReturnLaw& law) {
  law.validate();
  if (!(x_m > -1.0)) throw DomainError("market_return_cdf: market return must exceed -1");
  return std_normal_cdf((std::log1p(x_m) - law.log_mean()) / std::sqrt(law.log_variance()));
}

double market_return_quantile(double q, const MarketReturnLaw& law) {
  law.validate();
  if (!(q > 0.0 && q < 1.0)) throw DomainError("market_return_quantile: q must lie in (0, 1)");
  return std::expm1(law.log_mean() + std::sqrt(law.log_variance()) * std_normal_quantile(q));
}

double default_prob_given_xm(double x_m, const ContractSpec& contract, StructuralParam b) {
  return conditional(x_m, contract, b).pd;
}

double expected_recovery_given_xm(double x_m, const ContractSpec& contract, StructuralParam b) {
  const Conditional c = conditional(x_m, contract, b);
  if (!(c.pd > 0.0)) {
    throw NumericError("expected recovery undefined: P_D(x_m) underflows to zero");
  }
  return c.recovery_mass / c.pd;
}

double expected_lgd_given_xm(double x_m, const ContractSpec& contract, StructuralParam b) {
  return 1.0 - expected_recovery_given_xm(x_m, contract, b);
}

double expected_loss_given_xm(double x_m, const ContractSpec& contract, StructuralParam b) {
  const Conditional c = conditional(x_m, contract, b);
  if (!(c.pd > 0.0)) return 0.0;
  return c.pd * (1.0 - c.recovery_mass / c.pd);
}

double structural_recovery(double pd, StructuralParam b) {
  require_pd(pd, "structural_recovery");
  if (!(b.b >= 0.0)) throw DomainError("structural_recovery: B must be >= 0");
  if (b.b == 0.0) return 1.0;
  return recovered_mass(std_normal_quantile(pd), b.b) / pd;
}

double structural_loss(double pd, StructuralParam b) {
  require_pd(pd, "structural_loss");
  if (!(b.b >= 0.0)) throw DomainError("structural_loss: B must be >= 0");
  if (b.b == 0.0) return 0.0;
  return pd - recovered_mass(std_normal_quantile(pd), b.b);
}

double structural_loss_slope(double pd, StructuralParam b) {
  require_pd(pd, "structural_loss_slope");
  if (!(b.b >= 0.0)) throw DomainError("structural_loss_slope: B must be >= 0");
  const double z = std_normal_quantile(pd);
  return b.b * recovered_mass(z, b.b) / std_normal_pdf(z);
}

double a_from_pd(double pd, StructuralParam b) {
  require_pd(pd, "a_from_pd");
  require_b(b);
  return b.b * std_normal_quantile(pd) - 0.5 * b.b * b.b;
}

double xm_from_pd(double pd, const ContractSpec& contract, StructuralParam b) {
  const double a = a_from_pd(pd, b);
  return contract.face_value / contract.initial_value * std::exp(-a) - 1.0;
}

double pd_from_structural_loss(double loss, StructuralParam b) {
  require_b(b);
  if (!(loss > 0.0 && loss < 1.0)) throw DomainError("pd_from_structural_loss: loss outside (0, 1)");
  // Solve in z = Phi^{-1}(P_D), where the loss is smooth and increasing.
  auto f = [&](double z) { return std_normal_cdf(z) - recovered_mass(z, b.b) - loss; };
  double lo = -38.0;
  double hi = 38.0;
  if (f(lo) >= 0.0 || f(hi) <= 0.0) {
    throw DomainError("pd_from_structural_loss: loss outside the attainable range");
  }
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  const double pd = std_normal_cdf(0.5 * (bracket.first + bracket.second));
  return std::clamp(pd, std::numeric_limits<double>::min(), 1.0 - kPdFloor);
}

double loss_slope_step(double x_m) noexcept {
  return std::max(1e-6, 1e-4 * (1.0 + std::abs(x_m)));
}

TabulatedDensity loss_pdf_from_market(const MarketReturnLaw& law, const ContractSpec& contract,
                                      StructuralParam b, std::span<const double> xm_grid) {
  law.validate();
  require_b(b);
  std::vector<std::pair<double, double>> points;
  points.reserve(xm_grid.size());
  for (double x : xm_grid) {
    if (!(x > -1.0)) throw DomainError("loss_pdf_from_market: grid point at or below -1");
    const double h = loss_slope_step(x);
    double slope;
    if (x - h > -1.0) {
      slope = (expected_loss_given_xm(x + h, contract, b) - expected_loss_given_xm(x - h, contract, b)) /
              (2.0 * h);
    } else {
      slope = (expected_loss_given_xm(x + h, contract, b) - expected_loss_given_xm(x, contract, b)) / h;
    }
    if (!(std::abs(slope) >= std::numeric_limits<double>::min())) {
      throw NumericError("loss_pdf_from_market: |L'(x_m)| below threshold; refine the grid");
    }
    points.emplace_back(expected_loss_given_xm(x, contract, b),
                        market_return_pdf(x, law) / std::abs(slope));
  }
  std::sort(points.begin(), points.end());
  TabulatedDensity out;
  for (const auto& [loss, density] : points) {
    out.x.push_back(loss);
    out.density.push_back(density);
  }
  return out;
}

TabulatedDensity loss_pdf_on_loss_grid(const MarketReturnLaw& law, const ContractSpec& contract,
                                       StructuralParam b, std::span<const double> loss_grid) {
  std::vector<double> xm;
  xm.reserve(loss_grid.size());
  for (double loss : loss_grid) xm.push_back(xm_from_pd(pd_from_structural_loss(loss, b), contract, b));
  return loss_pdf_from_market(law, contract, b, xm);
}

TabulatedDensity loss_pdf_from_pd(std::span<const double> pd_samples, StructuralParam b,
                                  std::span<const double> pd_edges) {
  require_b(b);
  if (pd_samples.empty()) throw DomainError("loss_pdf_from_pd: empty sample set");
  const auto n = static_cast<double>(pd_samples.size());
  TabulatedDensity out;

  const auto [min_it, max_it] = std::minmax_element(pd_samples.begin(), pd_samples.end());
  if (*min_it == *max_it) {
    const double p = *min_it;
    out.atom_location = (p <= 0.0) ? 0.0 : (p >= 1.0 ? 1.0 : structural_loss(p, b));
    out.atom_mass = 1.0;
    return out;
  }
  if (pd_edges.size() < 2 || !std::is_sorted(pd_edges.begin(), pd_edges.end())) {
    throw DomainError("loss_pdf_from_pd: need at least two ascending bin edges");
  }

  std::vector<double> counts(pd_edges.size() - 1, 0.0);
  double zeros = 0.0;
  for (double p : pd_samples) {
    if (p <= 0.0) {
      zeros += 1.0;
      continue;
    }
    if (p < pd_edges.front() || p > pd_edges.back()) continue;
    auto it = std::upper_bound(pd_edges.begin(), pd_edges.end(), p);
    std::size_t bin = static_cast<std::size_t>(it - pd_edges.begin());
    bin = (bin == 0) ? 0 : bin - 1;
    if (bin >= counts.size()) bin = counts.size() - 1;
    counts[bin] += 1.0;
  }
  out.atom_location = 0.0;
  out.atom_mass = zeros / n;

  auto loss_at = [&](double p) {
    const double clamped = std::clamp(p, kPdFloor, 1.0 - kPdFloor);
    return p <= 0.0 ? 0.0 : structural_loss(clamped, b);
  };
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double lo = pd_edges[i];
    const double hi = pd_edges[i + 1];
    const double centre = std::clamp(0.5 * (lo + hi), kPdFloor, 1.0 - kPdFloor);
    const double pd_density = counts[i] / (n * (hi - lo));
    out.x.push_back(structural_loss(centre, b));
    out.density.push_back(pd_density / structural_loss_slope(centre, b));
    out.lower.push_back(loss_at(lo));
    out.upper.push_back(loss_at(hi));
  }
  return out;
}

double loss_cdf(double loss, const MarketReturnLaw& law, const ContractSpec& contract,
                StructuralParam b) {
  law.validate();
  require_b(b);
  if (loss <= 0.0) return 0.0;
  if (loss >= 1.0) return 1.0;
  const double pd = pd_from_structural_loss(loss, b);
  const double z = (std::log(contract.face_value / contract.initial_value) - a_from_pd(pd, b) -
                    law.log_mean()) /
                   std::sqrt(law.log_variance());
  return std_normal_cdf(-z);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw DomainError("log_grid: need 0 < lo < hi, count >= 2");
  std::vector<double> grid(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = lo * std::exp(step * i);
  grid.back() = hi;
  return grid;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (!(hi > lo) || count < 2) throw DomainError("linear_grid: need lo < hi, count >= 2");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * i / (count - 1);
  grid.back() = hi;
  return grid;
}

}  // namespace merton
