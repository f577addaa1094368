#include "merton/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "merton/calibration.hpp"
#include "merton/cli/csv.hpp"
#include "merton/errors.hpp"
#include "merton/format.hpp"
#include "merton/normal.hpp"
#include "merton/risk.hpp"

namespace merton::cli {

namespace {

using merton::format_number;

constexpr int kPdCurvePoints = 499;
constexpr double kCurveZRange = 6.0;
constexpr int kXmCurvePoints = 241;
constexpr double kPdfZRange = 8.0;
constexpr int kPdfPoints = 2001;
constexpr double kHistogramMax = 0.1;
constexpr int kHistogramBins = 200;
constexpr int kPdBins = 40;
constexpr int kXmBins = 50;
constexpr std::int64_t kMinFitCount = 30;
constexpr int kBatches = 20;
constexpr double kTailThreshold = 0.05;

std::string prefixed(const std::string& prefix, const std::string& key_values) {
  std::istringstream in(key_values);
  std::string line, out;
  while (std::getline(in, line)) out += prefix + "." + line + "\n";
  return out;
}

void write_text(OutputDir& dir, const std::string& name, const std::string& body) {
  OutputFile f = dir.open(name);
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) f.line(line);
  f.finish();
}

void write_pd_curves(OutputDir& dir, const std::vector<double>& b_values) {
  const auto pd = linear_grid(0.002, 0.998, kPdCurvePoints);
  OutputFile rec = dir.open("recovery_vs_pd.csv");
  OutputFile loss = dir.open("loss_vs_pd.csv");
  rec.line("b,pd,recovery");
  loss.line("b,pd,loss");
  for (double b : b_values) {
    for (double p : pd) {
      rec.row({format_number(b), format_number(p), format_number(structural_recovery(p, {b}))});
      loss.row({format_number(b), format_number(p), format_number(structural_loss(p, {b}))});
    }
  }
  rec.finish();
  loss.finish();
}

// ---------------------------------------------------------------------------
// Analysis shared by `simulate` and `report`.

struct Columns {
  std::vector<double> xm, pd, loss;
};

Columns columns_of(const std::vector<PortfolioOutcome>& outcomes) {
  Columns c;
  c.xm.reserve(outcomes.size());
  c.pd.reserve(outcomes.size());
  c.loss.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    c.xm.push_back(o.x_m);
    c.pd.push_back(o.pd_hat);
    c.loss.push_back(o.loss_hat);
  }
  return c;
}

std::optional<StructuralParam> try_model_b(const RunConfig& config) {
  try {
    return config.model_b();
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

void analyse_outcomes(const RunConfig& config, const std::vector<PortfolioOutcome>& outcomes,
                      OutputDir& dir, std::ostream& diag) {
  if (outcomes.empty()) throw NumericError("no outcomes to analyse");
  const Columns cols = columns_of(outcomes);
  const auto n = static_cast<double>(outcomes.size());
  const std::optional<StructuralParam> b_model = try_model_b(config);
  std::string report;

  // Binned recovery vs default rate, also the input of the B fit.
  const auto pd_edges = log_grid(0.5 / config.portfolio_size, 1.0, kPdBins + 1);
  const BinnedCurve rec_pd = bin_curve(outcomes, CurveAxis::PdHat, CurveAxis::RecoveryHat, pd_edges);
  {
    OutputFile f = dir.open("binned_recovery.csv");
    f.line("default_rate,recovery_rate,count");
    for (std::size_t i = 0; i < rec_pd.counts.size(); ++i) {
      f.row({format_number(rec_pd.x_means[i]), format_number(rec_pd.y_means[i]),
             std::to_string(rec_pd.counts[i])});
    }
    f.finish();
  }

  ObservationSet fit_data;
  for (std::size_t i = 0; i < rec_pd.counts.size(); ++i) {
    const double p = rec_pd.x_means[i];
    if (rec_pd.counts[i] >= kMinFitCount && p > 0.0 && p < 1.0) {
      fit_data.records.push_back({p, rec_pd.y_means[i], ObservationKind::Recovery, 1.0, {}});
    }
  }
  std::optional<StructuralParam> b_fit;
  if (!fit_data.records.empty()) {
    try {
      const FitResult fit = fit_b(fit_data, config.fit_options());
      b_fit = StructuralParam{fit.b_hat};
      report += "b_fitted=" + format_number(fit.b_hat) + "\n";
      report += "b_fit_points=" + std::to_string(fit_data.records.size()) + "\n";
      report += std::string("b_fit_at_boundary=") + (fit.at_boundary ? "true" : "false") + "\n";
    } catch (const FitError& e) {
      diag << "warning: " << e.what() << "\n";
    }
  } else {
    diag << "warning: too few populated default-rate bins to fit B\n";
  }
  if (b_model) report = "b_model=" + format_number(b_model->b) + "\n" + report;

  // GARCH has no closed-form B; the fitted one stands in for it.
  std::optional<StructuralParam> b_used = (config.process == ProcessKind::Garch) ? b_fit : b_model;
  if (b_used) report += "b_used=" + format_number(b_used->b) + "\n";

  // Binned curves against the structural model.
  {
    OutputFile f = dir.open("binned_curves.csv");
    f.line("curve,x_lower,x_upper,x_mean,y_mean,count,model");
    auto emit = [&](const std::string& name, const BinnedCurve& c, auto model) {
      for (std::size_t i = 0; i < c.counts.size(); ++i) {
        std::string m;
        if (b_used) {
          try {
            m = format_number(model(c.x_means[i]));
          } catch (const std::exception&) {
            m.clear();
          }
        }
        f.row({name, format_number(c.lower[i]), format_number(c.upper[i]), format_number(c.x_means[i]),
               format_number(c.y_means[i]), std::to_string(c.counts[i]), m});
      }
    };
    const auto& b = b_used;
    emit("recovery_vs_pd", rec_pd, [&](double p) { return structural_recovery(p, *b); });
    emit("loss_vs_pd", bin_curve(outcomes, CurveAxis::PdHat, CurveAxis::LossHat, pd_edges),
         [&](double p) { return structural_loss(p, *b); });

    const auto [xmin, xmax] = std::minmax_element(cols.xm.begin(), cols.xm.end());
    if (*xmax > *xmin) {
      const auto xm_edges = linear_grid(*xmin, *xmax, kXmBins + 1);
      emit("pd_vs_xm", bin_curve(outcomes, CurveAxis::MarketReturn, CurveAxis::PdHat, xm_edges),
           [&](double x) { return default_prob_given_xm(x, config.contract, *b); });
      emit("loss_vs_xm", bin_curve(outcomes, CurveAxis::MarketReturn, CurveAxis::LossHat, xm_edges),
           [&](double x) { return expected_loss_given_xm(x, config.contract, *b); });
    }
    f.finish();
  }

  // Loss histogram with the transformed densities alongside. Bins are linear
  // from zero so the first bin also holds the zero-loss realizations, and
  // densities are per realization (mass beyond the last edge is left out).
  {
    const auto edges = linear_grid(0.0, kHistogramMax, kHistogramBins + 1);
    auto per_sample = [&](const Histogram& h, std::size_t i) {
      return h.density[i] * static_cast<double>(h.in_range) / n;
    };
    const Histogram h = empirical_histogram(cols.loss, edges);
    std::optional<Histogram> xm_route;
    if (b_used) xm_route = empirical_histogram(losses_from_xm(cols.xm, config.contract, *b_used), edges);
    std::vector<double> analytic;
    if (config.process == ProcessKind::Diffusion && b_model) {
      const MarketReturnLaw law = config.market_law();
      std::vector<double> cdf;
      for (double e : edges) cdf.push_back(loss_cdf(e, law, config.contract, *b_model));
      for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        analytic.push_back((cdf[i + 1] - cdf[i]) / (edges[i + 1] - edges[i]));
      }
    }
    OutputFile f = dir.open("loss_histogram.csv");
    f.line("lower,upper,count,density,xm_route_density,analytic_density");
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      f.row({format_number(h.lower[i]), format_number(h.upper[i]), std::to_string(h.counts[i]),
             format_number(per_sample(h, i)), xm_route ? format_number(per_sample(*xm_route, i)) : "",
             analytic.empty() ? "" : format_number(analytic[i])});
    }
    f.finish();
  }

  const auto zero = std::count(cols.loss.begin(), cols.loss.end(), 0.0);
  const auto tail = std::count_if(cols.loss.begin(), cols.loss.end(),
                                  [](double x) { return x > kTailThreshold; });
  report += "realizations=" + std::to_string(outcomes.size()) + "\n";
  report += "zero_loss_fraction=" + format_number(static_cast<double>(zero) / n) + "\n";
  report += "tail_mass_above_0.05=" + format_number(static_cast<double>(tail) / n) + "\n";

  std::vector<RiskReport> reports;
  try {
    reports.push_back(risk_empirical(config.alpha, cols.loss));
    report += prefixed("empirical", to_key_value(reports.back()));
    try {
      const RiskStandardErrors se = batch_standard_errors(config.alpha, cols.loss, kBatches);
      report += "empirical.se_expected_loss=" + format_number(se.expected_loss) + "\n";
      report += "empirical.se_var=" + format_number(se.var) + "\n";
      report += "empirical.se_etl=" + format_number(se.etl) + "\n";
    } catch (const DomainError&) {
      diag << "note: too few realizations for batch standard errors\n";
    }
    if (b_used) {
      reports.push_back(risk_from_pd_samples(config.alpha, cols.pd, *b_used));
      report += prefixed("pd_route", to_key_value(reports.back()));
      reports.push_back(risk_from_xm_samples(config.alpha, cols.xm, config.contract, *b_used));
      report += prefixed("xm_route", to_key_value(reports.back()));
    }
  } catch (const DomainError& e) {
    diag << "warning: risk measures skipped: " << e.what() << "\n";
  }
  if (config.process == ProcessKind::Diffusion && b_model) {
    reports.push_back(risk_analytic(config.alpha, config.market_law(), config.contract, *b_model));
    report += prefixed("analytic", to_key_value(reports.back()));
  }
  write_text(dir, "risk_report.txt", report);
  OutputFile csv = dir.open("risk_report.csv");
  csv.line(risk_csv_header());
  for (const auto& r : reports) csv.line(to_csv_row(r));
  csv.finish();
}

double parse_field(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse '" + text + "'");
  }
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e)) {
    return kExitConfig;
  }
  return kExitNumeric;
}

std::vector<std::string> cmd_analytic(const RunConfig& config, std::ostream& diag) {
  config.validate();
  const StructuralParam b = config.model_b();
  const MarketReturnLaw law = config.market_law();
  const auto start = std::chrono::steady_clock::now();
  const RiskReport risk = risk_analytic(config.alpha, law, config.contract, b);

  OutputDir dir(config.out_dir, config.echo());
  write_text(dir, "analytic_report.txt", "b=" + format_number(b.b) + "\n" + to_key_value(risk));
  write_pd_curves(dir, config.b_values.empty() ? std::vector<double>{b.b} : config.b_values);

  const double sd = std::sqrt(law.log_variance());
  {
    OutputFile pd = dir.open("pd_vs_xm.csv");
    OutputFile loss = dir.open("loss_vs_xm.csv");
    pd.line("xm,pd");
    loss.line("xm,loss");
    for (double z : linear_grid(-kCurveZRange, kCurveZRange, kXmCurvePoints)) {
      const double x = std::expm1(law.log_mean() + sd * z);
      pd.row({format_number(x), format_number(default_prob_given_xm(x, config.contract, b))});
      loss.row({format_number(x), format_number(expected_loss_given_xm(x, config.contract, b))});
    }
    pd.finish();
    loss.finish();
  }
  {
    std::vector<double> xm;
    for (double z : linear_grid(-kPdfZRange, kPdfZRange, kPdfPoints)) {
      xm.push_back(std::expm1(law.log_mean() + sd * z));
    }
    const TabulatedDensity pdf = loss_pdf_from_market(law, config.contract, b, xm);
    OutputFile f = dir.open("loss_pdf.csv");
    f.line("loss,density");
    for (std::size_t i = 0; i < pdf.x.size(); ++i) {
      f.row({format_number(pdf.x[i]), format_number(pdf.density[i])});
    }
    f.finish();
  }
  diag << "analytic: " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
       << " s\n";
  return dir.completed();
}

std::vector<std::string> cmd_curves(const RunConfig& config, std::ostream&) {
  config.validate();
  OutputDir dir(config.out_dir, config.echo());
  write_pd_curves(dir, config.b_values.empty() ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}
                                               : config.b_values);
  return dir.completed();
}

std::string outcomes_header() { return "realization,x_m,n_default,pd_hat,loss_hat,recovery_hat"; }

std::string outcome_row(std::int64_t realization, const PortfolioOutcome& o) {
  return std::to_string(realization) + "," + format_number(o.x_m) + "," + std::to_string(o.n_default) +
         "," + format_number(o.pd_hat) + "," + format_number(o.loss_hat) + "," +
         (o.recovery_hat ? format_number(*o.recovery_hat) : "");
}

std::vector<PortfolioOutcome> read_outcomes(std::istream& in, const std::string& source) {
  std::vector<PortfolioOutcome> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header) {
      if (line != outcomes_header()) throw ConfigError(where + ": unexpected outcomes header");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 6) throw ConfigError(where + ": expected 6 fields");
    PortfolioOutcome o;
    o.x_m = parse_field(f[1], where);
    o.n_default = static_cast<int>(parse_field(f[2], where));
    o.pd_hat = parse_field(f[3], where);
    o.loss_hat = parse_field(f[4], where);
    if (!f[5].empty()) o.recovery_hat = parse_field(f[5], where);
    out.push_back(o);
  }
  if (!header) throw ConfigError(source + ": no outcomes header");
  return out;
}

std::vector<std::string> cmd_simulate(const RunConfig& config, std::ostream& diag) {
  config.validate();
  const SimulationConfig sim = config.simulation();
  OutputDir dir(config.out_dir, config.echo());

  std::vector<PortfolioOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(config.realizations));
  OutputFile file = dir.open("outcomes.csv");
  file.line(outcomes_header());
  std::int64_t next_report = config.realizations / 10;
  const auto start = std::chrono::steady_clock::now();
  int threads = 0;
  try {
    threads = run_simulation_streaming(
        sim,
        [&](std::int64_t first, std::span<const PortfolioOutcome> block) {
          for (std::size_t i = 0; i < block.size(); ++i) {
            file.line(outcome_row(first + static_cast<std::int64_t>(i), block[i]));
          }
          outcomes.insert(outcomes.end(), block.begin(), block.end());
        },
        [&](std::int64_t done, std::int64_t total) {
          if (done >= next_report || done == total) {
            diag << "simulate: " << done << "/" << total << "\n";
            next_report = done + total / 10;
          }
        });
  } catch (const SimulationError& e) {
    throw SimulationError(std::string(e.what()) + " after " + std::to_string(e.completed()) +
                              " realizations (written to " + (dir.path() / "outcomes.csv").string() + ")",
                          e.completed());
  }
  file.finish();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  diag << "simulate: " << config.realizations << " realizations in " << seconds << " s on " << threads
       << " thread(s)\n";

  analyse_outcomes(config, outcomes, dir, diag);
  return dir.completed();
}

std::vector<std::string> cmd_calibrate(const RunConfig& config, std::ostream& diag) {
  if (config.input.empty()) throw ConfigError("calibrate needs --input");
  const FitOptions options = config.fit_options();
  options.validate();
  std::ifstream in(config.input);
  if (!in) throw IoError("cannot read " + config.input);
  const IngestResult data = read_observations(in, config.input);
  for (const auto& w : data.warnings) diag << "warning: " << w << "\n";
  const auto& obs = data.observations;

  const FitResult fit = fit_b(obs, options);
  if (fit.at_boundary) diag << "warning: fitted B lies on the search boundary\n";

  OutputDir dir(config.out_dir, "input=" + std::filesystem::path(config.input).filename().string() +
                                    " b-lo=" + format_number(options.b_lo) +
                                    " b-hi=" + format_number(options.b_hi));
  const bool recovery = obs.records.front().kind == ObservationKind::Recovery;
  write_text(dir, "fit_report.txt",
             to_key_value(fit, options, obs.records.size()) +
                 "kind=" + (recovery ? "recovery" : "loss") + "\n" +
                 "skipped_rows=" + std::to_string(data.warnings.size()) + "\n");

  {
    double lo = 1.0, hi = 0.0;
    for (const auto& r : obs.records) {
      lo = std::min(lo, r.pd);
      hi = std::max(hi, r.pd);
    }
    OutputFile f = dir.open("fitted_curve.csv");
    f.line(recovery ? "pd,recovery" : "pd,loss");
    const auto grid = hi > lo ? log_grid(lo, hi, 200) : std::vector<double>{lo};
    for (double p : grid) {
      Observation probe{p, 0.0, obs.records.front().kind, 1.0, {}};
      f.row({format_number(p), format_number(model_value(probe, {fit.b_hat}))});
    }
    f.finish();
  }
  {
    const auto res = residuals(obs, {fit.b_hat});
    OutputFile f = dir.open("residuals.csv");
    f.line("year,default_rate,observed,model,residual");
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto& r = obs.records[i];
      f.row({r.year ? std::to_string(*r.year) : "", format_number(r.pd), format_number(r.value),
             format_number(model_value(r, {fit.b_hat})), format_number(res[i])});
    }
    f.finish();
  }
  return dir.completed();
}

std::vector<std::string> cmd_report(const RunConfig& config, std::ostream& diag) {
  if (config.input.empty()) throw ConfigError("report needs --input (an outcomes.csv)");
  std::ifstream in(config.input);
  if (!in) throw IoError("cannot read " + config.input);

  // Model parameters come from the file's own config line; alpha, the fit
  // interval and the output directory come from the command line.
  RunConfig effective = config;
  std::string first;
  if (std::getline(in, first) && first.rfind("# config: ", 0) == 0) {
    std::istringstream pairs(first.substr(10));
    std::string kv;
    while (pairs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      if (key == "alpha" || key == "b-lo" || key == "b-hi") continue;
      effective.set(key, kv.substr(eq + 1));
    }
  } else {
    diag << "warning: " << config.input << " has no config line; using command-line parameters\n";
  }
  in.clear();
  in.seekg(0);
  const auto outcomes = read_outcomes(in, config.input);
  effective.realizations = static_cast<std::int64_t>(outcomes.size());
  effective.validate();
  OutputDir dir(config.out_dir, effective.echo());
  analyse_outcomes(effective, outcomes, dir, diag);
  return dir.completed();
}

}  // namespace merton::cli
