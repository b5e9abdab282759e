// Acceptance run: one PASS/FAIL line per criterion. With an argument N only
// criterion N runs; the exit status is nonzero if any criterion that ran failed.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "lpstab/cli/checks.hpp"
#include "lpstab/cli/run.hpp"

using namespace lpstab;
using checks::CheckResult;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void add(const CheckResult& r) {
    pass = pass && r.passed;
    if (!detail.empty()) detail += " | ";
    detail += r.name + (r.passed ? "" : " FAILED") + ": " + r.summary;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

constexpr std::uint64_t kValidationSeed = 0xACCE97;

Outcome lp_support() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.add(checks::lp_completeness(1024, 100, kValidationSeed));
  const double sec = seconds_since(t0);
  o.pass = o.pass && sec < 10.0;
  o.detail += " | runtime " + fmt(sec) + " s (< 10 s)";
  return o;
}

Outcome bernstein() {
  Outcome o;
  o.add(checks::bernstein(1024, 50, kValidationSeed + 1));
  return o;
}

Outcome sobolev() {
  Outcome o;
  o.add(checks::sobolev_equivalence(256, 1024, 100, kValidationSeed + 2));
  return o;
}

Outcome paraproduct() {
  Outcome o;
  o.add(checks::paraproduct_identity(256, kValidationSeed + 3));
  o.add(checks::paraproduct_mapping(256, 1024, 50, kValidationSeed + 4));
  o.add(checks::remainder_bound(256, 3, 0.5, 50, kValidationSeed + 5));
  return o;
}

Outcome positivity() {
  Outcome o;
  o.add(checks::positivity(256, 200, kValidationSeed + 6));
  return o;
}

Outcome coifman_meyer() {
  Outcome o;
  o.add(checks::commutator_uniformity(1024));
  o.add(checks::commutator_dense_oracle(64));
  return o;
}

Outcome weights() {
  Outcome o;
  o.add(checks::weight_ode());
  o.add(checks::weight_scaling());
  o.add(checks::phi_oracle());
  return o;
}

Outcome mollification() {
  Outcome o;
  o.add(checks::mollification({}, 8));
  o.add(checks::mollification({{"t0", 0.37}}, 8));
  return o;
}

Outcome solver() {
  Outcome o;
  const auto suite = checks::solver_suite(512, kValidationSeed + 7);
  o.add(suite.convergence);
  o.add(suite.conservation);
  o.add(suite.smoothing);
  o.pass = o.pass && suite.seconds < 120.0;
  o.detail += " | runtime " + fmt(suite.seconds) + " s (< 120 s)";
  return o;
}

Outcome energy() {
  Outcome o;
  const auto suite = checks::energy_suite(checks::energy_validation_runs());
  o.add(suite.energy);
  o.add(suite.diagnostics);
  return o;
}

Outcome stability() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.add(checks::stability(checks::ScanSetup{}));
  const double sec = seconds_since(t0);
  o.pass = o.pass && sec < 600.0;
  o.detail += " | runtime " + fmt(sec) + " s (< 600 s)";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const auto base = std::filesystem::temp_directory_path() / "lpstab-acceptance-determinism";
  std::filesystem::remove_all(base);
  std::vector<std::filesystem::path> dirs{base / "first", base / "second"};
  for (const auto& d : dirs) {
    cli::Options opts;
    opts.subcommand = "all";
    opts.seed = 7;
    opts.output_dir = d.string();
    opts.quiet = true;
    cli::run(opts);
  }
  int files = 0;
  int differ = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dirs[0])) {
    if (!entry.is_regular_file()) continue;
    const auto name = std::filesystem::relative(entry.path(), dirs[0]);
    if (name == "metadata.json") continue;
    ++files;
    const auto twin = dirs[1] / name;
    if (!std::filesystem::exists(twin) || slurp(entry.path()) != slurp(twin)) {
      ++differ;
      o.detail += "differs: " + name.string() + "; ";
    }
  }
  o.pass = files > 0 && differ == 0;
  o.detail += std::to_string(files) + " report files compared byte for byte, " + std::to_string(differ) +
              " differ (metadata.json holds the timestamps and is excluded)";
  std::filesystem::remove_all(base);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "LP completeness & support", lp_support},
      {2, "Bernstein", bernstein},
      {3, "Sobolev equivalence", sobolev},
      {4, "Paraproduct identity & mapping", paraproduct},
      {5, "Positivity", positivity},
      {6, "Coifman-Meyer commutator", coifman_meyer},
      {7, "Weight ODE, scaling, quadrature", weights},
      {8, "Mollification bounds", mollification},
      {9, "Solver correctness", solver},
      {10, "Weighted energy estimate", energy},
      {11, "Conditional stability", stability},
      {12, "Determinism", determinism},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool ok = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    ok = ok && o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
