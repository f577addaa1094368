#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "merton/analytics.hpp"
#include "merton/calibration.hpp"
#include "merton/model.hpp"
#include "merton/montecarlo.hpp"
#include "merton/processes.hpp"

namespace merton::cli {

/// Everything a subcommand needs. Keys accepted by set() are the long flag
/// names without the leading dashes.
struct RunConfig {
  ProcessKind process = ProcessKind::Diffusion;
  ContractSpec contract{};
  DiffusionParams diffusion{};
  JumpParams jumps{};
  // Unset GARCH fields fall back to GarchParams::defaults_for(sigma, dt).
  std::optional<double> garch_a0;
  std::optional<double> garch_a1;
  std::optional<double> garch_b1;
  std::optional<double> garch_vol0;
  int portfolio_size = 500;
  std::int64_t realizations = 100'000;
  std::uint64_t seed = 20100601;
  double alpha = 0.01;
  std::string out_dir = ".";
  int threads = 0;
  int chunk_size = 256;
  std::vector<double> b_values;  ///< explicit B sweep for curve output
  double b_lo = 1e-3;
  double b_hi = 10.0;
  std::string input;

  /// Applies one key=value setting; throws ConfigError on unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  GarchParams garch() const;
  ProcessParams process_params() const;
  SimulationConfig simulation() const;
  MarketReturnLaw market_law() const;
  /// B implied by the diffusion parameters.
  StructuralParam model_b() const;
  FitOptions fit_options() const;

  /// Validates every parameter block used by the chosen process.
  void validate() const;

  /// One-line key=value echo of the model inputs. Thread count, output
  /// directory and input paths are left out, so the echo (and with it every
  /// output file) does not depend on how or where a run was launched.
  std::string echo() const;
};

/// Keys recognised by RunConfig::set, in echo order.
const std::vector<std::string>& config_keys();

/// Reads `key = value` lines; '#' starts a comment. Throws ConfigError with
/// the line number on malformed lines or unknown keys.
std::map<std::string, std::string> read_config_file(std::istream& in, const std::string& source);

}  // namespace merton::cli
