#pragma once

#include <cstddef>
#include <functional>

namespace merton {

struct QuadratureSpec {
  double abs_tolerance = 1e-10;
  std::size_t max_subdivisions = 1'000'000;

  void validate() const;
};

struct QuadratureResult {
  double value;
  double error_bound;
};

/// Adaptive Gauss-Kronrod integration of f over [lower, upper]. Either bound
/// may be infinite; infinite ranges are mapped onto (0, 1] before
/// subdivision. Throws QuadratureError (carrying the best estimate) when the
/// subdivision budget runs out before abs_tolerance is met.
QuadratureResult integrate_with_error(const std::function<double(double)>& f,
                                      double lower, double upper,
                                      const QuadratureSpec& spec = {});

double integrate(const std::function<double(double)>& f, double lower,
                 double upper, const QuadratureSpec& spec = {});

}  // namespace merton
