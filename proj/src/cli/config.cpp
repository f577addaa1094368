#include "merton/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "merton/errors.hpp"
#include "merton/format.hpp"

namespace merton::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("invalid value '" + text + "' for --" + key);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError("non-finite value for --" + key);
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError("empty list for --" + key);
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_number(values[i]);
  }
  return s;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "process",   "v0",        "face",      "maturity",   "steps",          "mu",
      "sigma",     "corr",      "lambda",    "jump-mu",    "jump-sigma",     "garch-a0",
      "garch-a1",  "garch-b1",  "garch-vol0", "portfolio-size", "realizations", "seed",
      "alpha",     "b",         "b-lo",      "b-hi",       "chunk-size",     "threads",
      "out-dir",   "input",
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "process") process = parse_process_kind(trim(value));
  else if (key == "v0") contract.initial_value = parse_number<double>(key, value);
  else if (key == "face") contract.face_value = parse_number<double>(key, value);
  else if (key == "maturity") contract.maturity = parse_number<double>(key, value);
  else if (key == "steps") contract.steps = parse_number<int>(key, value);
  else if (key == "mu") diffusion.mu = parse_number<double>(key, value);
  else if (key == "sigma") diffusion.sigma = parse_number<double>(key, value);
  else if (key == "corr") diffusion.corr = parse_number<double>(key, value);
  else if (key == "lambda") jumps.intensity = parse_number<double>(key, value);
  else if (key == "jump-mu") jumps.log_mean = parse_number<double>(key, value);
  else if (key == "jump-sigma") jumps.log_sd = parse_number<double>(key, value);
  else if (key == "garch-a0") garch_a0 = parse_number<double>(key, value);
  else if (key == "garch-a1") garch_a1 = parse_number<double>(key, value);
  else if (key == "garch-b1") garch_b1 = parse_number<double>(key, value);
  else if (key == "garch-vol0") garch_vol0 = parse_number<double>(key, value);
  else if (key == "portfolio-size") portfolio_size = parse_number<int>(key, value);
  else if (key == "realizations") realizations = parse_number<std::int64_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "alpha") alpha = parse_number<double>(key, value);
  else if (key == "b") b_values = parse_list(key, value);
  else if (key == "b-lo") b_lo = parse_number<double>(key, value);
  else if (key == "b-hi") b_hi = parse_number<double>(key, value);
  else if (key == "chunk-size") chunk_size = parse_number<int>(key, value);
  else if (key == "threads") threads = parse_number<int>(key, value);
  else if (key == "out-dir") out_dir = trim(value);
  else if (key == "input") input = trim(value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

GarchParams RunConfig::garch() const {
  GarchParams g = GarchParams::defaults_for(diffusion.sigma, contract.dt());
  if (garch_a0) g.alpha0 = *garch_a0;
  if (garch_a1) g.alpha1 = *garch_a1;
  if (garch_b1) g.beta1 = *garch_b1;
  if (garch_vol0) g.initial_vol = *garch_vol0;
  return g;
}

ProcessParams RunConfig::process_params() const {
  ProcessParams p;
  p.kind = process;
  p.diffusion = diffusion;
  p.jumps = jumps;
  p.garch = garch();
  return p;
}

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.contract = contract;
  s.process = process_params();
  s.firms = portfolio_size;
  s.realizations = realizations;
  s.seed = seed;
  s.threads = threads;
  s.chunk_size = chunk_size;
  return s;
}

MarketReturnLaw RunConfig::market_law() const { return MarketReturnLaw::from(diffusion, contract); }

StructuralParam RunConfig::model_b() const {
  return compound_b(diffusion.corr, diffusion.sigma, contract.maturity);
}

FitOptions RunConfig::fit_options() const {
  FitOptions f;
  f.b_lo = b_lo;
  f.b_hi = b_hi;
  return f;
}

void RunConfig::validate() const {
  contract.validate();
  process_params().validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (portfolio_size < 1) throw ConfigError("portfolio-size must be >= 1");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (chunk_size < 1) throw ConfigError("chunk-size must be >= 1");
  for (double b : b_values) {
    if (!(b > 0.0)) throw ConfigError("every --b value must be > 0");
  }
  fit_options().validate();
}

std::string RunConfig::echo() const {
  const GarchParams g = garch();
  std::string s = "process=" + std::string(to_string(process));
  auto add = [&](const char* key, const std::string& value) {
    s += ' ';
    s += key;
    s += '=';
    s += value;
  };
  add("v0", format_number(contract.initial_value));
  add("face", format_number(contract.face_value));
  add("maturity", format_number(contract.maturity));
  add("steps", std::to_string(contract.steps));
  add("mu", format_number(diffusion.mu));
  add("sigma", format_number(diffusion.sigma));
  add("corr", format_number(diffusion.corr));
  if (process == ProcessKind::JumpDiffusion) {
    add("lambda", format_number(jumps.intensity));
    add("jump-mu", format_number(jumps.log_mean));
    add("jump-sigma", format_number(jumps.log_sd));
  }
  if (process == ProcessKind::Garch) {
    add("garch-a0", format_number(g.alpha0));
    add("garch-a1", format_number(g.alpha1));
    add("garch-b1", format_number(g.beta1));
    add("garch-vol0", format_number(g.initial_vol));
  }
  add("portfolio-size", std::to_string(portfolio_size));
  add("realizations", std::to_string(realizations));
  add("seed", std::to_string(seed));
  add("alpha", format_number(alpha));
  if (!b_values.empty()) add("b", join(b_values));
  add("b-lo", format_number(b_lo));
  add("b-hi", format_number(b_hi));
  return s;
}

std::map<std::string, std::string> read_config_file(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  const auto& keys = config_keys();
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(text.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    out[key] = trim(text.substr(eq + 1));
  }
  return out;
}

}  // namespace merton::cli
