#pragma once

namespace merton {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

/// Standard normal density.
double std_normal_pdf(double x) noexcept;

/// Standard normal CDF, Phi(x). Throws DomainError for non-finite input.
double std_normal_cdf(double x);

/// Inverse of Phi on the open interval (0, 1). Throws DomainError outside.
double std_normal_quantile(double p);

}  // namespace merton
