#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "lpstab/cli/run.hpp"

using namespace lpstab::cli;

namespace {

int error_line(const std::string& text) {
  try {
    parse_config(text, "t.yaml");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("empty configuration gives the defaults") {
  const Options o = parse_config("", "t.yaml");
  CHECK(o.subcommand == "all");
  CHECK(o.seed == 7);
  CHECK(o.grid == 256);
  CHECK(o.coefficient == "loglip_t");
}

TEST_CASE("values are read from every section") {
  const Options o = parse_config(
      "seed: 11\n"
      "grid: 128\n"
      "coefficient:\n"
      "  tag: lip_x\n"
      "  params: {ax: 0.2, kappa: 0.55}\n"
      "weight_params: {s: 0.4, lambda: 3}\n"
      "solver: {T: 0.5, steps: 50, scheme: backward_euler, datum: 'cos:4'}\n"
      "energy: {families: [lip_x], grids: [64], steps: [10, 20]}\n",
      "t.yaml");
  CHECK(o.seed == 11);
  CHECK(o.grid == 128);
  CHECK(o.coefficient == "lip_x");
  CHECK(o.coefficient_params.at("ax") == doctest::Approx(0.2));
  CHECK(o.s == doctest::Approx(0.4));
  CHECK(o.lambda == doctest::Approx(3.0));
  CHECK(o.scheme == "backward_euler");
  CHECK(o.energy_steps == std::vector<int>{10, 20});
}

TEST_CASE("rejections carry the offending line") {
  CHECK(error_line("seed: 1\ngrdi: 64\n") == 2);
  CHECK(error_line("seed: 1\ngrid: 100\n") == 2);
  CHECK(error_line("solver:\n  T: 1\n  steps: many\n") == 3);
  CHECK(error_line("coefficient:\n  tag: lip_x\n  params:\n    kappa: -0.5\n") == 4);
  CHECK(error_line("coefficient:\n  tag: lip_x\n  params:\n    kappa: 1.5\n") == 4);
  CHECK(error_line("coefficient:\n  tag: wavy\n") == 2);
  CHECK(error_line("seed: [1, 2\n") > 0);
}

TEST_CASE("ellipticity failures name the invariant") {
  try {
    parse_config("coefficient:\n  tag: constant\n  params:\n    kappa: 0\n", "t.yaml");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("ellipticity") != std::string::npos);
  }
}

TEST_CASE("out-of-domain values are rejected by validate") {
  Options o;
  o.lambda = 1.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = Options{};
  o.subcommand = "frobnicate";
  CHECK_THROWS_AS(o.validate(), ConfigError);
  CHECK_NOTHROW(Options{}.validate());
}

TEST_CASE("the JSON echo omits the output directory") {
  Options a, b;
  a.output_dir = "x";
  b.output_dir = "y";
  CHECK(to_json(a) == to_json(b));
  CHECK(to_json(a)["seed"] == 7);
}

TEST_CASE("tolerance overrides") {
  const Options o = parse_config("tolerance_overrides:\n  phi: 1.0e-6\n  safety: 1.5\n", "t.yaml");
  CHECK(o.tolerance_overrides.at("phi") == doctest::Approx(1e-6));
  CHECK(error_line("seed: 1\ntolerance_overrides:\n  wobble: 1\n") == 3);
  CHECK(error_line("tolerance_overrides:\n  phi: -1\n") == 2);
}
