#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "merton/analytics.hpp"
#include "merton/errors.hpp"

namespace merton {

enum class ObservationKind { Recovery, Loss };

struct Observation {
  double pd = 0.0;     ///< default probability, strictly inside (0, 1)
  double value = 0.0;  ///< recovery rate or loss, in [0, 1]
  ObservationKind kind = ObservationKind::Recovery;
  double weight = 1.0;
  std::optional<int> year;
};

struct ObservationSet {
  std::vector<Observation> records;

  void validate() const;
};

struct FitOptions {
  double b_lo = 1e-3;
  double b_hi = 10.0;
  /// Requested accuracy on B. Brent's method cannot locate a minimizer
  /// closer than about sqrt(machine epsilon) relative, so smaller values are
  /// capped there.
  double tolerance = 1e-9;
  int max_iterations = 500;  ///< per start
  int starts = 3;            ///< log-spaced sub-intervals searched independently

  void validate() const;
};

struct FitResult {
  double b_hat = 0.0;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false;  ///< minimum sits on an edge of the search interval
};

/// Raised when no start converges within the iteration cap.
class FitError : public NumericError {
 public:
  FitError(const std::string& what, FitResult best) : NumericError(what), best_(best) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Model value for one record: structural recovery or structural loss.
double model_value(const Observation& obs, StructuralParam b);

/// value_i - model(pd_i; b) per record.
std::vector<double> residuals(const ObservationSet& obs, StructuralParam b);

/// Sum of w_i * residual_i^2.
double weighted_sse(const ObservationSet& obs, StructuralParam b);

/// Least-squares fit of B over [b_lo, b_hi].
FitResult fit_b(const ObservationSet& obs, const FitOptions& options = {});

struct IngestResult {
  ObservationSet observations;
  std::vector<std::string> warnings;
};

/// Reads the calibration CSV. Required columns: default_rate and one of
/// recovery_rate or loss_rate; optional: year, weight. Other columns are
/// ignored. Lines starting with '#' and blank lines are skipped. Rows with a
/// default rate of exactly 0 or 1 are dropped with a warning. Malformed rows
/// raise ConfigError naming the line.
IngestResult read_observations(std::istream& in, const std::string& source = "input");

/// key=value lines.
std::string to_key_value(const FitResult& fit, const FitOptions& options, std::size_t records);

}  // namespace merton
