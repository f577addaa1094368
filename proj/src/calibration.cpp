#include "merton/calibration.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <sstream>
#include <tuple>

#include "merton/format.hpp"

namespace merton {

void ObservationSet::validate() const {
  if (records.empty()) throw DomainError("observation set is empty");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string at = " (record " + std::to_string(i + 1) + ")";
    if (!(r.pd > 0.0 && r.pd < 1.0)) throw DomainError("pd must lie strictly inside (0, 1)" + at);
    if (!(r.value >= 0.0 && r.value <= 1.0)) throw DomainError("value must lie in [0, 1]" + at);
    if (!(r.weight >= 0.0) || !std::isfinite(r.weight)) throw DomainError("weight must be >= 0" + at);
  }
}

void FitOptions::validate() const {
  if (!(b_lo > 0.0) || !(b_hi > b_lo) || !std::isfinite(b_hi)) {
    throw ConfigError("fit interval must satisfy 0 < b_lo < b_hi < inf");
  }
  if (!(tolerance > 0.0)) throw ConfigError("fit tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("fit iteration cap must be >= 1");
  if (starts < 1) throw ConfigError("fit needs at least one start");
}

double model_value(const Observation& obs, StructuralParam b) {
  return obs.kind == ObservationKind::Recovery ? structural_recovery(obs.pd, b)
                                               : structural_loss(obs.pd, b);
}

std::vector<double> residuals(const ObservationSet& obs, StructuralParam b) {
  obs.validate();
  std::vector<double> out;
  out.reserve(obs.records.size());
  for (const auto& r : obs.records) out.push_back(r.value - model_value(r, b));
  return out;
}

double weighted_sse(const ObservationSet& obs, StructuralParam b) {
  double sse = 0.0;
  for (const auto& r : obs.records) {
    const double e = r.value - model_value(r, b);
    sse += r.weight * e * e;
  }
  return sse;
}

FitResult fit_b(const ObservationSet& obs, const FitOptions& options) {
  obs.validate();
  options.validate();

  // Brent's tolerance is relative: 2^(1 - bits).
  const int max_bits = std::numeric_limits<double>::digits / 2;
  const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(options.tolerance))), 2,
                              max_bits);
  // A canonical record order makes the floating-point sums, and with them
  // the result, independent of the input order.
  ObservationSet sorted = obs;
  std::sort(sorted.records.begin(), sorted.records.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.pd, a.value, a.weight, a.kind) < std::tie(b.pd, b.value, b.weight, b.kind);
  });
  auto objective = [&](double b) { return weighted_sse(sorted, StructuralParam{b}); };

  const double ratio = std::pow(options.b_hi / options.b_lo, 1.0 / options.starts);
  FitResult best;
  best.sse = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  double lo = options.b_lo;
  for (int s = 0; s < options.starts; ++s) {
    const double hi = (s + 1 == options.starts) ? options.b_hi : lo * ratio;
    std::uintmax_t iterations = static_cast<std::uintmax_t>(options.max_iterations);
    const auto [b, sse] = boost::math::tools::brent_find_minima(objective, lo, hi, bits, iterations);
    total_iterations += static_cast<int>(iterations);
    const bool converged = iterations < static_cast<std::uintmax_t>(options.max_iterations);
    // Ties go to the earlier start, so the result is independent of noise in
    // later sub-intervals.
    if (sse < best.sse) {
      best.b_hat = b;
      best.sse = sse;
      best.converged = converged;
    }
    lo = hi;
  }
  best.iterations = total_iterations;
  const double edge = 1e-6;
  best.at_boundary = best.b_hat <= options.b_lo * (1.0 + edge) || best.b_hat >= options.b_hi * (1.0 - edge);

  if (!best.converged) {
    throw FitError("fit_b: no convergence within " + std::to_string(options.max_iterations) +
                       " iterations (best B = " + format_number(best.b_hat) + ")",
                   best);
  }
  return best;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& column, const std::string& where) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError(where + ": cannot parse " + column + " value '" + text + "'");
  }
  return v;
}

}  // namespace

IngestResult read_observations(std::istream& in, const std::string& source) {
  IngestResult out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  int col_year = -1, col_pd = -1, col_value = -1, col_weight = -1;
  ObservationKind kind = ObservationKind::Recovery;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text);

    if (header.empty()) {
      header = fields;
      for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        const auto& h = header[i];
        if (h == "year") col_year = i;
        else if (h == "default_rate") col_pd = i;
        else if (h == "weight") col_weight = i;
        else if (h == "recovery_rate" || h == "loss_rate") {
          if (col_value >= 0) throw ConfigError(where + ": both recovery_rate and loss_rate given");
          col_value = i;
          kind = (h == "recovery_rate") ? ObservationKind::Recovery : ObservationKind::Loss;
        }
      }
      if (col_pd < 0 || col_value < 0) {
        throw ConfigError(where + ": header must contain default_rate and recovery_rate (or loss_rate)");
      }
      continue;
    }

    if (fields.size() != header.size()) {
      throw ConfigError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    Observation obs;
    obs.kind = kind;
    obs.pd = parse_double(fields[col_pd], "default_rate", where);
    obs.value = parse_double(fields[col_value], header[col_value], where);
    if (col_weight >= 0) obs.weight = parse_double(fields[col_weight], "weight", where);
    if (col_year >= 0 && !fields[col_year].empty()) {
      const double y = parse_double(fields[col_year], "year", where);
      if (y != std::floor(y)) throw ConfigError(where + ": year must be an integer");
      obs.year = static_cast<int>(y);
    }
    if (!(obs.pd >= 0.0 && obs.pd <= 1.0)) throw ConfigError(where + ": default_rate outside [0, 1]");
    if (!(obs.value >= 0.0 && obs.value <= 1.0)) {
      throw ConfigError(where + ": " + header[col_value] + " outside [0, 1]");
    }
    if (!(obs.weight >= 0.0)) throw ConfigError(where + ": weight must be >= 0");
    if (obs.pd == 0.0 || obs.pd == 1.0) {
      out.warnings.push_back(where + ": default_rate " + format_number(obs.pd) +
                             " has no structural counterpart; row skipped");
      continue;
    }
    out.observations.records.push_back(obs);
  }
  if (header.empty()) throw ConfigError(source + ": no header line");
  if (out.observations.records.empty()) throw ConfigError(source + ": no usable observations");
  return out;
}

std::string to_key_value(const FitResult& fit, const FitOptions& options, std::size_t records) {
  std::string s;
  s += "b_hat=" + format_number(fit.b_hat) + "\n";
  s += "sse=" + format_number(fit.sse) + "\n";
  s += "iterations=" + std::to_string(fit.iterations) + "\n";
  s += std::string("converged=") + (fit.converged ? "true" : "false") + "\n";
  s += std::string("at_boundary=") + (fit.at_boundary ? "true" : "false") + "\n";
  s += "records=" + std::to_string(records) + "\n";
  s += "b_lo=" + format_number(options.b_lo) + "\n";
  s += "b_hi=" + format_number(options.b_hi) + "\n";
  return s;
}

}  // namespace merton
