#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "merton/model.hpp"
#include "merton/processes.hpp"

namespace merton {

/// Estimators for one market realization of a K-firm portfolio.
struct PortfolioOutcome {
  double x_m = 0.0;       ///< market return
  int n_default = 0;      ///< firms with V_k(T) < F
  double pd_hat = 0.0;    ///< n_default / K
  double loss_hat = 0.0;  ///< mean individual loss
  /// 1 - K loss_hat / n_default; absent when nobody defaulted.
  std::optional<double> recovery_hat;
};

/// Portfolio estimators from simulated terminal values.
PortfolioOutcome summarize_portfolio(const TerminalValues& terminal, const ContractSpec& contract);

PortfolioOutcome run_realization(const ContractSpec& contract, const ProcessParams& params,
                                 int firms, const RngStream& realization);

struct SimulationConfig {
  ContractSpec contract{};
  ProcessParams process{};
  int firms = 500;                      ///< K
  std::int64_t realizations = 100'000;  ///< M
  std::uint64_t seed = 20100601;
  int threads = 0;          ///< 0 selects the hardware concurrency
  int chunk_size = 256;     ///< realizations per work item

  void validate() const;
};

struct SimulationResult {
  std::vector<PortfolioOutcome> outcomes;
  SimulationConfig config;
  double seconds = 0.0;
  int threads_used = 1;
};

/// Realization m draws from RngStream(seed, m, *); results therefore do not
/// depend on the worker count or on scheduling.
RngStream realization_stream(std::uint64_t seed, std::int64_t realization);

using ProgressHook = std::function<void(std::int64_t done, std::int64_t total)>;
/// Receives consecutive blocks of outcomes in realization order.
using OutcomeSink = std::function<void(std::int64_t first, std::span<const PortfolioOutcome>)>;

/// Thrown when a worker fails; carries the number of realizations that were
/// completed and delivered in order before the failure.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::int64_t completed)
      : std::runtime_error(what), completed_(completed) {}
  std::int64_t completed() const noexcept { return completed_; }

 private:
  std::int64_t completed_;
};

/// Streams outcomes chunk by chunk with bounded memory. Returns the number of
/// worker threads used.
int run_simulation_streaming(const SimulationConfig& config, const OutcomeSink& sink,
                             const ProgressHook& progress = {});

SimulationResult run_simulation(const SimulationConfig& config, const ProgressHook& progress = {});

enum class CurveAxis { PdHat, MarketReturn, RecoveryHat, LossHat };

std::optional<double> axis_value(const PortfolioOutcome& outcome, CurveAxis axis);

/// Local averages of y over bins of x.
struct BinnedCurve {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> centers;
  std::vector<double> x_means;
  std::vector<double> y_means;
  std::vector<std::int64_t> counts;
};

/// Bins are [edges[i], edges[i+1]) with the last bin closed. Outcomes with
/// an absent y value or an x outside the edges are skipped; empty bins are
/// omitted.
BinnedCurve bin_curve(std::span<const PortfolioOutcome> outcomes, CurveAxis x_axis,
                      CurveAxis y_axis, std::span<const double> edges);

struct Histogram {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::int64_t> counts;
  std::vector<double> density;  ///< normalized over in-range samples
  std::int64_t total = 0;
  std::int64_t in_range = 0;
};

/// Histogram over the given ascending edges; sum(density * width) = 1 over
/// the samples that fall inside.
Histogram empirical_histogram(std::span<const double> samples, std::span<const double> edges);

/// Log-spaced bins spanning the positive samples; a point mass collapses to
/// a single narrow bin.
Histogram empirical_histogram(std::span<const double> samples, int bins);

}  // namespace merton
