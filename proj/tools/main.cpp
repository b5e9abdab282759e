#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lpstab/cli/run.hpp"

namespace {

template <class T>
void apply(std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

}  // namespace

int main(int argc, char** argv) {
  using lpstab::cli::Options;
  CLI::App app{"Littlewood-Paley, paraproduct and backward-parabolic stability checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> grid;
  bool quiet = false;
  app.add_option("--config", config_path, "YAML configuration file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory (overrides OUTPUT_DIR and the config)");
  app.add_option("--grid", grid, "grid size, a power of two >= 16");
  app.add_flag("-q,--quiet", quiet, "print nothing on success");

  std::optional<int> fields, m, trials, samples, nu_max, steps, scales;
  std::optional<double> s, lambda, dt, T;
  std::optional<std::string> coeff, datum, scheme;

  auto* lp = app.add_subcommand("lp-check", "dyadic blocks: completeness, Bernstein, Sobolev equivalence");
  lp->add_option("--fields", fields, "random fields per check");

  auto* para = app.add_subcommand("para-check", "paraproduct identity, mapping, remainder, positivity, commutators");
  para->add_option("--m", m, "modification parameter");
  para->add_option("--s", s, "Sobolev index of the remainder bound");
  para->add_option("--trials", trials, "random pairs per fit");

  auto* wt = app.add_subcommand("weights", "weight function table and identities");
  wt->add_option("--lambda", lambda, "weight exponent, > 1");
  wt->add_option("--samples", samples, "rows in weights.csv");

  auto* mol = app.add_subcommand("mollify", "time mollification bounds");
  mol->add_option("--coeff", coeff, "coefficient family tag");
  mol->add_option("--nu-max", nu_max, "largest nu, eps = 2^-2nu");

  auto* sim = app.add_subcommand("simulate", "manufactured backward solution");
  sim->add_option("--coeff", coeff, "coefficient family tag");
  sim->add_option("--dt", dt, "time step (sets the step count from T)");
  sim->add_option("--T", T, "horizon");
  sim->add_option("--steps", steps, "number of time steps");
  sim->add_option("--scheme", scheme, "crank_nicolson or backward_euler");
  sim->add_option("--datum", datum, "random | gaussian:<width> | cos:<k>");

  auto* en = app.add_subcommand("energy", "weighted energy inequality suite");
  en->add_option("--s", s, "Sobolev index");
  en->add_option("--lambda", lambda, "weight exponent");

  auto* sc = app.add_subcommand("stability-scan", "conditional stability scan and fit");
  sc->add_option("--scales", scales, "number of data scales in [1e-6, 1e-1]");
  sc->add_option("--s", s, "Sobolev index");

  app.add_subcommand("all", "every subcommand in turn");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Options o;
  try {
    if (!config_path.empty()) o = lpstab::cli::load_config(config_path);
  } catch (const lpstab::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  o.subcommand = app.get_subcommands().front()->get_name();
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) o.output_dir = env;
  apply(out, o.output_dir);
  apply(seed, o.seed);
  apply(grid, o.grid);
  apply(fields, o.fields);
  apply(m, o.m);
  apply(trials, o.trials);
  apply(samples, o.samples);
  apply(nu_max, o.nu_max);
  apply(steps, o.steps);
  apply(s, o.s);
  apply(lambda, o.lambda);
  apply(T, o.T);
  apply(coeff, o.coefficient);
  apply(datum, o.datum);
  apply(scheme, o.scheme);
  apply(scales, o.scan_scales);
  if (dt) {
    if (!(*dt > 0.0)) {
      std::cerr << "error: --dt must be positive\n";
      return 2;
    }
    o.steps = static_cast<int>(std::lround(o.T / *dt));
  }
  o.quiet = quiet;
  try {
    return lpstab::cli::run(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
