// Experiment configuration and subcommand dispatch for the lpstab tool.
//
// Exit codes: 0 every asserted check passed, 1 a check failed, 2 the
// configuration or the command line was rejected.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpstab/coefficients.hpp"

namespace lpstab::cli {

/// A rejected configuration; `line` is 1-based, 0 when no line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"lp-check", "para-check", "weights", "mollify",
                                              "simulate", "energy", "stability-scan", "all"};
  return names;
}

struct Options {
  std::string subcommand = "all";
  std::uint64_t seed = 7;
  int grid = 256;
  std::string output_dir = "out";
  bool quiet = false;

  std::string coefficient = "loglip_t";
  FamilyParams coefficient_params;

  double s = 0.5;
  double lambda = 2.0;
  double alpha1 = 1.0;
  double gamma = 1.0;

  double T = 1.0;
  int steps = 200;
  std::string scheme = "crank_nicolson";
  std::string datum = "random";  // random | gaussian:<width> | cos:<k>

  int m = 3;
  int trials = 50;
  int fields = 20;

  int samples = 200;
  int nu_max = 8;

  std::vector<std::string> energy_families{"lip_x", "loglip_t"};
  std::vector<int> energy_grids{128, 256};
  std::vector<int> energy_steps{100, 200, 400};

  int scan_grid = 512;
  double scan_T = 0.05;
  int scan_steps = 500;
  int scan_scales = 21;
  double scan_datum_width = 0.6;

  /// Named pass thresholds replacing the built-in ones (see checks::default_tolerances).
  std::map<std::string, double> tolerance_overrides;

  /// Throws ConfigError (line 0) for values outside their domains.
  void validate(const std::string& source = "options") const;
};

/// Reads a YAML configuration; unknown keys, wrong types and invalid values
/// raise ConfigError with the offending line.
Options parse_config(const std::string& text, const std::string& source = "config");
Options load_config(const std::string& path);

nlohmann::ordered_json to_json(const Options& opts);

/// Runs opts.subcommand, writes reports under opts.output_dir and returns
/// the exit status.
int run(const Options& opts);

}  // namespace lpstab::cli
