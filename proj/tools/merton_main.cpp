#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "merton/cli/commands.hpp"
#include "merton/cli/config.hpp"
#include "merton/errors.hpp"

namespace {

using namespace merton::cli;
using Command = std::vector<std::string> (*)(const RunConfig&, std::ostream&);

struct Subcommand {
  CLI::App* app;
  Command run;
  std::map<std::string, std::string> flags;
  std::string config_file;
};

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help = {
      {"process", "diffusion | jump-diffusion | garch"},
      {"v0", "initial asset value V0"},
      {"face", "face value F of the debt"},
      {"maturity", "maturity T in years"},
      {"steps", "time steps N"},
      {"mu", "drift"},
      {"sigma", "volatility"},
      {"corr", "market correlation c"},
      {"lambda", "jump intensity per year"},
      {"jump-mu", "mean of log(1 + jump)"},
      {"jump-sigma", "sd of log(1 + jump)"},
      {"garch-a0", "GARCH alpha0 (per-step variance units)"},
      {"garch-a1", "GARCH alpha1"},
      {"garch-b1", "GARCH beta1"},
      {"garch-vol0", "GARCH initial per-step volatility"},
      {"portfolio-size", "firms per portfolio K"},
      {"realizations", "market realizations M"},
      {"seed", "master seed"},
      {"alpha", "tail mass (0.01 for the 99% level)"},
      {"b", "comma-separated B values for curve output"},
      {"b-lo", "lower end of the B search interval"},
      {"b-hi", "upper end of the B search interval"},
      {"chunk-size", "realizations per work item"},
      {"threads", "worker threads (0 = all cores)"},
      {"out-dir", "output directory"},
      {"input", "input CSV (calibrate: observations, report: outcomes)"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Merton-model portfolio credit risk: closed forms, Monte Carlo and calibration"};
  app.require_subcommand(1);

  std::vector<Subcommand> subs;
  subs.reserve(5);
  const std::pair<const char*, Command> table[] = {
      {"analytic", cmd_analytic}, {"simulate", cmd_simulate}, {"calibrate", cmd_calibrate},
      {"curves", cmd_curves},     {"report", cmd_report},
  };
  const std::map<std::string, std::string> descriptions = {
      {"analytic", "closed-form EL / VaR / ETL and curve tables"},
      {"simulate", "Monte Carlo portfolio simulation"},
      {"calibrate", "fit B to default-rate / recovery observations"},
      {"curves", "structural recovery and loss curves for a B sweep"},
      {"report", "recompute risk reports from an outcomes file"},
  };
  for (const auto& [name, run] : table) {
    Subcommand s{app.add_subcommand(name, descriptions.at(name)), run, {}, {}};
    subs.push_back(std::move(s));
  }
  for (auto& s : subs) {
    s.app->add_option("--config", s.config_file, "key = value configuration file");
    for (const auto& key : config_keys()) {
      s.app->add_option("--" + key, s.flags[key], flag_help().at(key));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      std::map<std::string, std::string> settings;
      if (!s.config_file.empty()) {
        std::ifstream in(s.config_file);
        if (!in) throw merton::IoError("cannot read config file " + s.config_file);
        settings = read_config_file(in, s.config_file);
      }
      for (const auto& key : config_keys()) {
        if (s.app->count("--" + key) > 0) settings[key] = s.flags[key];
      }
      RunConfig config;
      // Process first so later keys see the final engine choice.
      for (const auto& key : config_keys()) {
        if (auto it = settings.find(key); it != settings.end()) config.set(key, it->second);
      }
      const auto files = s.run(config, std::cerr);
      for (const auto& f : files) std::cout << (std::filesystem::path(config.out_dir) / f).string() << "\n";
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_code_for(e);
    }
  }
  return kExitConfig;
}
