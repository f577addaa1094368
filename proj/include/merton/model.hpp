#pragma once

#include <cstdint>

namespace merton {

/// Zero-coupon debt contract shared by every firm of a homogeneous portfolio.
struct ContractSpec {
  double initial_value = 100.0;  ///< V0
  double face_value = 75.0;      ///< F
  double maturity = 1.0;         ///< T in years
  int steps = 250;               ///< N time steps to maturity

  double dt() const noexcept { return maturity / steps; }
  void validate() const;
};

/// Correlated diffusion: drift mu, volatility sigma, market correlation c.
struct DiffusionParams {
  double mu = 0.05;
  double sigma = 0.15;
  double corr = 0.5;

  void validate() const;
};

/// Compound-Poisson jumps with shifted lognormal sizes, Lambda + 1 ~ LN(log_mean, log_sd).
/// The same parameters drive market-wide and idiosyncratic jumps.
struct JumpParams {
  double intensity = 0.005;  ///< lambda, jumps per year
  double log_mean = 0.4;
  double log_sd = 0.3;

  /// E[Lambda] for a single jump.
  double mean_jump() const noexcept;
  void validate() const;
};

/// GARCH(1,1) per-step variance recursion
///   sigma_t^2 = alpha0 + alpha1 r_{t-1}^2 + beta1 sigma_{t-1}^2.
struct GarchParams {
  double alpha0 = 0.0;
  double alpha1 = 0.05;
  double beta1 = 0.90;
  double initial_vol = 0.0;  ///< per-step volatility sigma_{k,0}

  /// Stationary per-step variance alpha0 / (1 - alpha1 - beta1).
  double stationary_variance() const noexcept;
  void validate() const;

  /// alpha1 = 0.05, beta1 = 0.90 with alpha0 chosen so the stationary
  /// per-step variance equals sigma^2 dt; initial volatility sigma sqrt(dt).
  static GarchParams defaults_for(double sigma, double dt);
};

struct PortfolioSpec {
  int size = 500;  ///< K
  ContractSpec contract{};

  void validate() const;
};

/// Loss given default L* = (F - V(T)) / F. Requires V(T) < F.
double loss_given_default(double terminal_value, double face_value);

/// Individual loss (1 - V/F) Theta(1 - V/F), with Theta(0) = 0.
double individual_loss(double terminal_value, double face_value);

}  // namespace merton
