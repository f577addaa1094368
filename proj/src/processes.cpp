#include "merton/processes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "merton/errors.hpp"

namespace merton {

namespace {

void require_firms(int firms) {
  if (firms < 1) throw ConfigError("portfolio size must be >= 1");
}

RngStream substream_of(const RngStream& realization, std::uint32_t index) {
  return RngStream(realization.master_seed(), realization.stream_index(), index);
}

double market_return(const std::vector<double>& values, double initial_value) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / (static_cast<double>(values.size()) * initial_value) - 1.0;
}

// Shared diffusion / jump-diffusion engine. With jumps == nullptr no jump
// substream is touched and no jump term is added.
TerminalValues simulate_correlated(const ContractSpec& contract, const DiffusionParams& params,
                                   const JumpParams* jumps, int firms,
                                   const RngStream& realization) {
  contract.validate();
  params.validate();
  if (jumps) jumps->validate();
  require_firms(firms);

  const int steps = contract.steps;
  const double dt = contract.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double market_scale = std::sqrt(params.corr) * params.sigma * sqrt_dt;
  const double idio_scale = std::sqrt(1.0 - params.corr) * params.sigma * sqrt_dt;
  const double drift = 1.0 + params.mu * dt;

  const MarketFactorPath market = draw_market_path(contract, realization, jumps);
  std::vector<double> base(steps);
  for (int t = 0; t < steps; ++t) base[t] = drift + market_scale * market.normals[t];

  TerminalValues out;
  out.values.resize(firms);
  for (int k = 0; k < firms; ++k) {
    RngStream normals = substream_of(realization, substream::firm_normals(k));
    double value = contract.initial_value;
    if (jumps) {
      RngStream jump_draws = substream_of(realization, substream::firm_jumps(k));
      const auto schedule = draw_jump_schedule(jump_draws, contract, *jumps);
      auto next = schedule.begin();
      for (int t = 0; t < steps; ++t) {
        double own = 0.0;
        for (; next != schedule.end() && next->step == t; ++next) own += next->increment;
        double factor = base[t] + idio_scale * draw_standard_normal(normals);
        factor = factor + market.jumps[t] + own;
        if (!(factor > 0.0)) {
          value = 0.0;
          break;
        }
        value *= factor;
      }
    } else {
      for (int t = 0; t < steps; ++t) {
        const double factor = base[t] + idio_scale * draw_standard_normal(normals);
        if (!(factor > 0.0)) {
          value = 0.0;
          break;
        }
        value *= factor;
      }
    }
    out.values[k] = value;
  }
  out.market_return = market_return(out.values, contract.initial_value);
  return out;
}

}  // namespace

std::string_view to_string(ProcessKind kind) noexcept {
  switch (kind) {
    case ProcessKind::Diffusion: return "diffusion";
    case ProcessKind::JumpDiffusion: return "jump-diffusion";
    case ProcessKind::Garch: return "garch";
  }
  return "unknown";
}

ProcessKind parse_process_kind(std::string_view name) {
  if (name == "diffusion") return ProcessKind::Diffusion;
  if (name == "jump-diffusion") return ProcessKind::JumpDiffusion;
  if (name == "garch") return ProcessKind::Garch;
  throw ConfigError("unknown process '" + std::string(name) +
                    "' (expected diffusion, jump-diffusion or garch)");
}

void ProcessParams::validate() const {
  diffusion.validate();
  if (kind == ProcessKind::JumpDiffusion) jumps.validate();
  if (kind == ProcessKind::Garch) garch.validate();
}

std::vector<JumpEvent> draw_jump_schedule(RngStream& stream, const ContractSpec& contract,
                                          const JumpParams& jumps) {
  std::vector<JumpEvent> events;
  if (jumps.intensity == 0.0) return events;
  const double dt = contract.dt();
  double time = -std::log(stream.uniform()) / jumps.intensity;
  while (time < contract.maturity) {
    const int step = std::min(static_cast<int>(time / dt), contract.steps - 1);
    const double size = std::exp(jumps.log_mean + jumps.log_sd * draw_standard_normal(stream)) - 1.0;
    events.push_back({step, size});
    time += -std::log(stream.uniform()) / jumps.intensity;
  }
  return events;
}

MarketFactorPath draw_market_path(const ContractSpec& contract, const RngStream& realization,
                                  const JumpParams* jumps) {
  MarketFactorPath path;
  path.normals.resize(contract.steps);
  RngStream normals = substream_of(realization, substream::kMarketNormals);
  for (double& eta : path.normals) eta = draw_standard_normal(normals);
  if (jumps) {
    RngStream draws = substream_of(realization, substream::kMarketJumps);
    path.jumps.assign(contract.steps, 0.0);
    for (const auto& e : draw_jump_schedule(draws, contract, *jumps)) path.jumps[e.step] += e.increment;
  }
  return path;
}

TerminalValues simulate_diffusion(const ContractSpec& contract, const DiffusionParams& params,
                                  int firms, const RngStream& realization) {
  return simulate_correlated(contract, params, nullptr, firms, realization);
}

TerminalValues simulate_jump_diffusion(const ContractSpec& contract,
                                       const DiffusionParams& diffusion, const JumpParams& jumps,
                                       int firms, const RngStream& realization) {
  return simulate_correlated(contract, diffusion, &jumps, firms, realization);
}

TerminalValues simulate_garch(const ContractSpec& contract, double mu, const GarchParams& garch,
                              double corr, int firms, const RngStream& realization) {
  contract.validate();
  garch.validate();
  if (!std::isfinite(mu)) throw ConfigError("garch: drift must be finite");
  if (!(corr >= 0.0 && corr <= 1.0)) throw ConfigError("garch: correlation must lie in [0, 1]");
  require_firms(firms);

  const int steps = contract.steps;
  const double drift = 1.0 + mu * contract.dt();
  const double market_weight = std::sqrt(corr);
  const double idio_weight = std::sqrt(1.0 - corr);
  const MarketFactorPath market = draw_market_path(contract, realization);

  TerminalValues out;
  out.values.resize(firms);
  for (int k = 0; k < firms; ++k) {
    RngStream normals = substream_of(realization, substream::firm_normals(k));
    double value = contract.initial_value;
    // The first step runs at the initial volatility; the recursion feeds
    // every later step.
    double variance = garch.initial_vol * garch.initial_vol;
    for (int t = 0; t < steps; ++t) {
      const double shock =
          market_weight * market.normals[t] + idio_weight * draw_standard_normal(normals);
      const double ret = std::sqrt(variance) * shock;
      const double factor = drift + ret;
      if (!(factor > 0.0)) {
        value = 0.0;
        break;
      }
      value *= factor;
      variance = garch.alpha0 + garch.alpha1 * ret * ret + garch.beta1 * variance;
    }
    out.values[k] = value;
  }
  out.market_return = market_return(out.values, contract.initial_value);
  return out;
}

TerminalValues simulate(const ContractSpec& contract, const ProcessParams& params, int firms,
                        const RngStream& realization) {
  switch (params.kind) {
    case ProcessKind::Diffusion:
      return simulate_diffusion(contract, params.diffusion, firms, realization);
    case ProcessKind::JumpDiffusion:
      return simulate_jump_diffusion(contract, params.diffusion, params.jumps, firms, realization);
    case ProcessKind::Garch:
      return simulate_garch(contract, params.diffusion.mu, params.garch, params.diffusion.corr,
                            firms, realization);
  }
  throw ConfigError("unknown process kind");
}

}  // namespace merton
