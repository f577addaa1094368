#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "merton/model.hpp"
#include "merton/rng.hpp"

namespace merton {

enum class ProcessKind { Diffusion, JumpDiffusion, Garch };

std::string_view to_string(ProcessKind kind) noexcept;
/// Parses "diffusion", "jump-diffusion" or "garch"; throws ConfigError.
ProcessKind parse_process_kind(std::string_view name);

/// Parameters of all three engines. The diffusion block supplies drift and
/// correlation to every engine; jumps and garch are read only by their
/// respective engines.
struct ProcessParams {
  ProcessKind kind = ProcessKind::Diffusion;
  DiffusionParams diffusion{};
  JumpParams jumps{};
  GarchParams garch{};

  void validate() const;
};

/// Market draws for one realization.
struct MarketFactorPath {
  std::vector<double> normals;  ///< eta_{m,t}
  std::vector<double> jumps;    ///< dJ_{m,t}; empty when the engine has no jumps
};

struct TerminalValues {
  std::vector<double> values;  ///< V_k(T), never negative
  double market_return = 0.0;  ///< X_m = mean_k(V_k(T)/V0 - 1)
};

/// Substream layout inside one realization's stream index. Firm k owns two
/// substreams so that jump draws never shift the diffusion draws.
namespace substream {
inline constexpr std::uint32_t kMarketNormals = 0;
inline constexpr std::uint32_t kMarketJumps = 1;
constexpr std::uint32_t firm_normals(std::uint32_t k) noexcept { return 2 + 2 * k; }
constexpr std::uint32_t firm_jumps(std::uint32_t k) noexcept { return 3 + 2 * k; }
}  // namespace substream

struct JumpEvent {
  int step;          ///< time step the jump lands in
  double increment;  ///< exp(mu_J + sigma_J z) - 1
};

/// Jumps of one compound-Poisson path over [0, T): exponential waiting times
/// at the given intensity, so every step receives a Poisson(intensity dt)
/// number of jumps. Events are ordered by time; a zero intensity draws
/// nothing.
std::vector<JumpEvent> draw_jump_schedule(RngStream& stream, const ContractSpec& contract,
                                          const JumpParams& jumps);

/// Market draws for the realization addressed by `realization`.
MarketFactorPath draw_market_path(const ContractSpec& contract, const RngStream& realization,
                                  const JumpParams* jumps = nullptr);

/// Realization-level RNG address: substreams are derived from its seed and
/// stream index; its own counter is not consumed.
TerminalValues simulate_diffusion(const ContractSpec& contract, const DiffusionParams& params,
                                  int firms, const RngStream& realization);

TerminalValues simulate_jump_diffusion(const ContractSpec& contract,
                                       const DiffusionParams& diffusion, const JumpParams& jumps,
                                       int firms, const RngStream& realization);

/// GARCH(1,1) engine; drift stays in the price recursion,
/// V_k(T) = V0 prod_t (1 + mu dt + r_{k,t}).
TerminalValues simulate_garch(const ContractSpec& contract, double mu, const GarchParams& garch,
                              double corr, int firms, const RngStream& realization);

/// Dispatches on params.kind.
TerminalValues simulate(const ContractSpec& contract, const ProcessParams& params, int firms,
                        const RngStream& realization);

}  // namespace merton
