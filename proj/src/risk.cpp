#include "merton/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "merton/errors.hpp"
#include "merton/format.hpp"
#include "merton/normal.hpp"

namespace merton {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

// ceil(q) that treats q within relative rounding noise of an integer as that
// integer, so 0.99 * 1000 ranks 990 rather than 991.
std::size_t guarded_ceil(double q) {
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

// Loss conditional on a standard-normal market shock z.
double loss_at_shock(double z, const MarketReturnLaw& law, const ContractSpec& contract,
                     StructuralParam b) {
  const double x_m = std::expm1(law.log_mean() + std::sqrt(law.log_variance()) * z);
  if (!(x_m > -1.0)) return 1.0;
  return expected_loss_given_xm(x_m, contract, b);
}

}  // namespace

std::string_view to_string(RiskMethod method) noexcept {
  switch (method) {
    case RiskMethod::AnalyticXm: return "analytic-xm";
    case RiskMethod::AnalyticPdEmpirical: return "analytic-pd-empirical";
    case RiskMethod::AnalyticXmEmpirical: return "analytic-xm-empirical";
    case RiskMethod::Empirical: return "empirical";
  }
  return "unknown";
}

double var_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                    StructuralParam b) {
  require_alpha(alpha);
  law.validate();
  return loss_at_shock(std_normal_quantile(alpha), law, contract, b);
}

double etl_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                    StructuralParam b, const QuadratureSpec& quad) {
  require_alpha(alpha);
  law.validate();
  const double z_alpha = std_normal_quantile(alpha);
  const double tail = integrate(
      [&](double z) { return loss_at_shock(z, law, contract, b) * std_normal_pdf(z); },
      -std::numeric_limits<double>::infinity(), z_alpha, quad);
  return tail / alpha;
}

double el_analytic(const MarketReturnLaw& law, const ContractSpec& contract, StructuralParam b,
                   const QuadratureSpec& quad) {
  law.validate();
  const double inf = std::numeric_limits<double>::infinity();
  return integrate(
      [&](double z) { return loss_at_shock(z, law, contract, b) * std_normal_pdf(z); }, -inf, inf,
      quad);
}

RiskReport risk_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                         StructuralParam b, const QuadratureSpec& quad) {
  RiskReport r;
  r.alpha = alpha;
  r.method = RiskMethod::AnalyticXm;
  r.expected_loss = el_analytic(law, contract, b, quad);
  r.var = var_analytic(alpha, law, contract, b);
  r.etl = etl_analytic(alpha, law, contract, b, quad);
  return r;
}

std::size_t var_rank(double alpha, std::size_t n) {
  require_alpha(alpha);
  if (n == 0) throw DomainError("var_rank: no samples");
  const std::size_t j = guarded_ceil((1.0 - alpha) * static_cast<double>(n));
  return std::clamp<std::size_t>(j, 1, n);
}

RiskReport risk_empirical(double alpha, std::span<const double> losses) {
  require_alpha(alpha);
  const std::size_t needed = guarded_ceil(1.0 / alpha);
  if (losses.size() < needed) {
    throw DomainError("risk_empirical: need at least " + std::to_string(needed) +
                      " samples for alpha = " + format_number(alpha) + ", got " +
                      std::to_string(losses.size()));
  }
  std::vector<double> sorted(losses.begin(), losses.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw DomainError("risk_empirical: non-finite loss sample");
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const std::size_t j = var_rank(alpha, n);

  RiskReport r;
  r.alpha = alpha;
  r.method = RiskMethod::Empirical;
  r.samples = n;
  // Sums over the sorted copy, so the result does not depend on sample order.
  r.expected_loss = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  r.var = sorted[j - 1];
  r.etl = std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(j - 1), sorted.end(), 0.0) /
          static_cast<double>(n - j + 1);
  return r;
}

std::vector<double> losses_from_pd(std::span<const double> pd_samples, StructuralParam b) {
  std::vector<double> out;
  out.reserve(pd_samples.size());
  for (double p : pd_samples) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("losses_from_pd: P_D sample outside [0, 1]");
    if (p == 0.0) {
      out.push_back(0.0);
    } else if (p == 1.0) {
      out.push_back(1.0);
    } else {
      out.push_back(structural_loss(p, b));
    }
  }
  return out;
}

std::vector<double> losses_from_xm(std::span<const double> xm_samples, const ContractSpec& contract,
                                   StructuralParam b) {
  std::vector<double> out;
  out.reserve(xm_samples.size());
  for (double x : xm_samples) out.push_back(expected_loss_given_xm(x, contract, b));
  return out;
}

RiskReport risk_from_pd_samples(double alpha, std::span<const double> pd_samples,
                                StructuralParam b) {
  // L(P_D) is increasing, so quantiles of the mapped samples are the mapped
  // quantiles of P_D.
  RiskReport r = risk_empirical(alpha, losses_from_pd(pd_samples, b));
  r.method = RiskMethod::AnalyticPdEmpirical;
  return r;
}

RiskReport risk_from_xm_samples(double alpha, std::span<const double> xm_samples,
                                const ContractSpec& contract, StructuralParam b) {
  RiskReport r = risk_empirical(alpha, losses_from_xm(xm_samples, contract, b));
  r.method = RiskMethod::AnalyticXmEmpirical;
  return r;
}

RiskStandardErrors batch_standard_errors(double alpha, std::span<const double> losses,
                                         int batches) {
  if (batches < 2) throw DomainError("batch_standard_errors: need at least 2 batches");
  const std::size_t size = losses.size() / static_cast<std::size_t>(batches);
  std::vector<RiskReport> reports;
  reports.reserve(batches);
  for (int i = 0; i < batches; ++i) {
    reports.push_back(risk_empirical(alpha, losses.subspan(i * size, size)));
  }
  auto spread = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : reports) mean += field(r);
    mean /= batches;
    double ss = 0.0;
    for (const auto& r : reports) ss += (field(r) - mean) * (field(r) - mean);
    return std::sqrt(ss / (batches - 1)) / std::sqrt(static_cast<double>(batches));
  };
  RiskStandardErrors se;
  se.batches = batches;
  se.expected_loss = spread([](const RiskReport& r) { return r.expected_loss; });
  se.var = spread([](const RiskReport& r) { return r.var; });
  se.etl = spread([](const RiskReport& r) { return r.etl; });
  return se;
}

std::string to_key_value(const RiskReport& report) {
  std::string s;
  s += "method=" + std::string(to_string(report.method)) + "\n";
  s += "alpha=" + format_number(report.alpha) + "\n";
  s += "confidence=" + format_number(report.confidence()) + "\n";
  s += "samples=" + std::to_string(report.samples) + "\n";
  s += "expected_loss=" + format_number(report.expected_loss) + "\n";
  s += "var=" + format_number(report.var) + "\n";
  s += "etl=" + format_number(report.etl) + "\n";
  return s;
}

std::string risk_csv_header() { return "method,alpha,confidence,samples,expected_loss,var,etl"; }

std::string to_csv_row(const RiskReport& report) {
  return std::string(to_string(report.method)) + "," + format_number(report.alpha) + "," +
         format_number(report.confidence()) + "," + std::to_string(report.samples) + "," +
         format_number(report.expected_loss) + "," + format_number(report.var) + "," +
         format_number(report.etl);
}

}  // namespace merton
