#include "merton/model.hpp"

#include <cmath>
#include <string>

#include "merton/errors.hpp"

namespace merton {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ConfigError(message);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void ContractSpec::validate() const {
  require(finite(initial_value) && initial_value > 0.0, "contract: initial value must be > 0");
  require(finite(face_value) && face_value > 0.0, "contract: face value must be > 0");
  require(finite(maturity) && maturity > 0.0, "contract: maturity must be > 0");
  require(steps >= 1, "contract: steps must be >= 1");
}

void DiffusionParams::validate() const {
  require(finite(mu), "diffusion: drift must be finite");
  require(finite(sigma) && sigma >= 0.0, "diffusion: volatility must be >= 0");
  require(corr >= 0.0 && corr <= 1.0, "diffusion: correlation must lie in [0, 1]");
}

double JumpParams::mean_jump() const noexcept {
  return std::exp(log_mean + 0.5 * log_sd * log_sd) - 1.0;
}

void JumpParams::validate() const {
  require(finite(intensity) && intensity >= 0.0, "jumps: intensity must be >= 0");
  require(finite(log_mean), "jumps: log mean must be finite");
  require(finite(log_sd) && log_sd > 0.0, "jumps: log sd must be > 0");
}

double GarchParams::stationary_variance() const noexcept {
  return alpha0 / (1.0 - alpha1 - beta1);
}

void GarchParams::validate() const {
  require(finite(alpha0) && alpha0 > 0.0, "garch: alpha0 must be > 0");
  require(finite(alpha1) && alpha1 >= 0.0, "garch: alpha1 must be >= 0");
  require(finite(beta1) && beta1 >= 0.0, "garch: beta1 must be >= 0");
  require(alpha1 + beta1 < 1.0, "garch: alpha1 + beta1 must be < 1");
  require(finite(initial_vol) && initial_vol > 0.0, "garch: initial volatility must be > 0");
}

GarchParams GarchParams::defaults_for(double sigma, double dt) {
  GarchParams g;
  g.alpha1 = 0.05;
  g.beta1 = 0.90;
  g.alpha0 = (1.0 - g.alpha1 - g.beta1) * sigma * sigma * dt;
  g.initial_vol = sigma * std::sqrt(dt);
  return g;
}

void PortfolioSpec::validate() const {
  require(size >= 1, "portfolio: size must be >= 1");
  contract.validate();
}

double loss_given_default(double terminal_value, double face_value) {
  if (!(face_value > 0.0)) throw DomainError("loss_given_default: face value must be > 0");
  if (!(terminal_value >= 0.0)) throw DomainError("loss_given_default: negative terminal value");
  if (terminal_value >= face_value) {
    throw DomainError("loss_given_default: terminal value " + std::to_string(terminal_value) +
                      " is not below the face value (no default)");
  }
  return (face_value - terminal_value) / face_value;
}

double individual_loss(double terminal_value, double face_value) {
  if (!(face_value > 0.0)) throw DomainError("individual_loss: face value must be > 0");
  if (!(terminal_value >= 0.0)) throw DomainError("individual_loss: negative terminal value");
  if (terminal_value < face_value) return (face_value - terminal_value) / face_value;
  return 0.0;
}

}  // namespace merton
