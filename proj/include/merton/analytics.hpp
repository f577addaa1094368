#pragma once

#include <span>
#include <vector>

#include "merton/model.hpp"

namespace merton {

/// The compound parameter B = sqrt((1 - c) sigma^2 T), the only parameter of
/// the structural recovery and loss relations.
struct StructuralParam {
  double b;
};

/// Throws DomainError when B vanishes (c = 1 or sigma = 0).
StructuralParam compound_b(double corr, double sigma, double maturity);

/// A(x_m) = ln(F / V0) - ln(x_m + 1).
double log_distance_a(double x_m, const ContractSpec& contract);

/// Law of the market return: ln(X_m + 1) ~ N(mu T - c sigma^2 T / 2, c sigma^2 T).
struct MarketReturnLaw {
  double mu = 0.05;
  double sigma = 0.15;
  double corr = 0.5;
  double maturity = 1.0;

  static MarketReturnLaw from(const DiffusionParams& params, const ContractSpec& contract);

  double log_mean() const noexcept { return mu * maturity - 0.5 * corr * sigma * sigma * maturity; }
  double log_variance() const noexcept { return corr * sigma * sigma * maturity; }
  void validate() const;
};

double market_return_pdf(double x_m, const MarketReturnLaw& law);
double market_return_cdf(double x_m, const MarketReturnLaw& law);
double market_return_quantile(double q, const MarketReturnLaw& law);

// Conditional on the market return.
double default_prob_given_xm(double x_m, const ContractSpec& contract, StructuralParam b);
/// <R(x_m)>; throws NumericError when P_D(x_m) underflows to zero.
double expected_recovery_given_xm(double x_m, const ContractSpec& contract, StructuralParam b);
/// <L*(x_m)> = 1 - <R(x_m)>.
double expected_lgd_given_xm(double x_m, const ContractSpec& contract, StructuralParam b);
/// <L(x_m)> = P_D <L*>; zero when P_D underflows.
double expected_loss_given_xm(double x_m, const ContractSpec& contract, StructuralParam b);

/// Default probabilities are clamped into [kPdFloor, 1 - kPdFloor] before
/// inversion when curves are tabulated.
inline constexpr double kPdFloor = 1e-12;

/// Structural recovery rate
///   <R(P_D)> = exp(-B z + B^2/2) Phi(z - B) / P_D,  z = Phi^{-1}(P_D).
/// B = 0 gives 1.
double structural_recovery(double pd, StructuralParam b);
/// Structural loss <L(P_D)> = P_D - exp(-B z + B^2/2) Phi(z - B).
double structural_loss(double pd, StructuralParam b);
/// dL/dP_D = B P_D <R(P_D)> / phi(z).
double structural_loss_slope(double pd, StructuralParam b);
/// A = B Phi^{-1}(P_D) - B^2/2.
double a_from_pd(double pd, StructuralParam b);
/// Market return at which the conditional default probability equals pd.
double xm_from_pd(double pd, const ContractSpec& contract, StructuralParam b);
/// Inverse of structural_loss on (0, 1); loss must lie in (0, L(1-)).
double pd_from_structural_loss(double loss, StructuralParam b);

/// Tabulated density. Pointwise tables leave the edge vectors empty;
/// histogram-derived tables carry the image of each source bin in
/// lower/upper. A probability atom (e.g. a point mass) is reported
/// separately from the continuous part.
struct TabulatedDensity {
  std::vector<double> x;
  std::vector<double> density;
  std::vector<double> lower;
  std::vector<double> upper;
  double atom_location = 0.0;
  double atom_mass = 0.0;
};

/// Finite-difference step used for L'(x_m).
double loss_slope_step(double x_m) noexcept;

/// p_L(L) = p_X(x_m) / |L'(x_m)| evaluated at each grid point; the output is
/// ordered by increasing loss. Throws NumericError if |L'| underflows.
TabulatedDensity loss_pdf_from_market(const MarketReturnLaw& law, const ContractSpec& contract,
                                      StructuralParam b, std::span<const double> xm_grid);

/// Same transform on a loss grid (each loss is mapped back to its x_m).
TabulatedDensity loss_pdf_on_loss_grid(const MarketReturnLaw& law, const ContractSpec& contract,
                                       StructuralParam b, std::span<const double> loss_grid);

/// p_L(L) = p_PD(P_D) / L'(P_D) with p_PD a histogram of the samples over
/// pd_edges. Zero-PD samples form an atom at L = 0; identical samples form
/// an atom at L(P_D). Throws DomainError for an empty sample set.
TabulatedDensity loss_pdf_from_pd(std::span<const double> pd_samples, StructuralParam b,
                                  std::span<const double> pd_edges);

/// P(L <= loss) when X_m follows the lognormal market law. L decreases in
/// X_m, so this is the upper tail of X_m beyond the return that produces
/// `loss`.
double loss_cdf(double loss, const MarketReturnLaw& law, const ContractSpec& contract,
                StructuralParam b);

/// `count` points spaced evenly in log between lo and hi (inclusive).
std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace merton
