#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merton/analytics.hpp"
#include "merton/model.hpp"
#include "merton/quadrature.hpp"

namespace merton {

/// How a report was produced.
enum class RiskMethod {
  AnalyticXm,           ///< closed-form loss integrated over the lognormal market law
  AnalyticPdEmpirical,  ///< closed-form L(P_D) over empirical default-probability samples
  AnalyticXmEmpirical,  ///< closed-form L(x_m) over empirical market-return samples
  Empirical,            ///< realized portfolio losses
};

std::string_view to_string(RiskMethod method) noexcept;

/// alpha is the tail mass; confidence = 1 - alpha is the label (0.99 for
/// alpha = 0.01).
struct RiskReport {
  double expected_loss = 0.0;
  double var = 0.0;
  double etl = 0.0;
  double alpha = 0.01;
  RiskMethod method = RiskMethod::Empirical;
  std::size_t samples = 0;  ///< 0 for analytic reports

  double confidence() const noexcept { return 1.0 - alpha; }
};

/// VaR = L(x_m) at the market-return quantile leaving tail mass alpha below.
double var_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                    StructuralParam b);
/// Mean loss over the alpha tail of bad market outcomes.
double etl_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                    StructuralParam b, const QuadratureSpec& quad = {});
double el_analytic(const MarketReturnLaw& law, const ContractSpec& contract, StructuralParam b,
                   const QuadratureSpec& quad = {});
RiskReport risk_analytic(double alpha, const MarketReturnLaw& law, const ContractSpec& contract,
                         StructuralParam b, const QuadratureSpec& quad = {});

/// 1-based rank of the VaR order statistic: ceil((1 - alpha) n).
std::size_t var_rank(double alpha, std::size_t n);

/// Empirical EL / VaR / ETL over loss samples. VaR is the order statistic at
/// var_rank; ETL is the mean of the samples at or above that rank. Requires
/// at least ceil(1 / alpha) samples.
RiskReport risk_empirical(double alpha, std::span<const double> losses);

/// L(P_D) per sample; P_D = 0 maps to 0 and P_D = 1 to 1.
std::vector<double> losses_from_pd(std::span<const double> pd_samples, StructuralParam b);
/// L(x_m) per sample.
std::vector<double> losses_from_xm(std::span<const double> xm_samples, const ContractSpec& contract,
                                   StructuralParam b);

/// Risk from default-probability samples pushed through the structural loss.
RiskReport risk_from_pd_samples(double alpha, std::span<const double> pd_samples, StructuralParam b);
/// Risk from market-return samples pushed through the conditional loss.
RiskReport risk_from_xm_samples(double alpha, std::span<const double> xm_samples,
                                const ContractSpec& contract, StructuralParam b);

struct RiskStandardErrors {
  double expected_loss = 0.0;
  double var = 0.0;
  double etl = 0.0;
  int batches = 0;
};

/// Batch-means standard errors: the samples are cut into contiguous batches
/// in their given order and the spread of per-batch estimates is scaled by
/// 1/sqrt(batches).
RiskStandardErrors batch_standard_errors(double alpha, std::span<const double> losses,
                                         int batches = 20);

/// key=value lines.
std::string to_key_value(const RiskReport& report);
std::string risk_csv_header();
std::string to_csv_row(const RiskReport& report);

}  // namespace merton
