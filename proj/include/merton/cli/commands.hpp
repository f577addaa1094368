#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "merton/cli/config.hpp"
#include "merton/montecarlo.hpp"

namespace merton::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

/// Maps an exception from a command onto the tool's exit code.
int exit_code_for(const std::exception& e) noexcept;

// Each command writes into config.out_dir and returns the files it wrote.
// Diagnostics (warnings, progress, timing) go to `diag`, never into files.

/// Closed-form risk report plus curve tabulations.
std::vector<std::string> cmd_analytic(const RunConfig& config, std::ostream& diag);
/// Structural recovery and loss curves for a sweep of B values.
std::vector<std::string> cmd_curves(const RunConfig& config, std::ostream& diag);
/// Monte Carlo run: outcomes, histogram, binned curves and risk reports.
std::vector<std::string> cmd_simulate(const RunConfig& config, std::ostream& diag);
/// Fit of B to the observations in config.input.
std::vector<std::string> cmd_calibrate(const RunConfig& config, std::ostream& diag);
/// Risk reports recomputed from an outcomes file (config.input).
std::vector<std::string> cmd_report(const RunConfig& config, std::ostream& diag);

/// Outcomes CSV header (after the config line).
std::string outcomes_header();
std::string outcome_row(std::int64_t realization, const PortfolioOutcome& o);
/// Reads an outcomes CSV written by cmd_simulate.
std::vector<PortfolioOutcome> read_outcomes(std::istream& in, const std::string& source);

}  // namespace merton::cli
