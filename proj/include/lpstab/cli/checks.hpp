// Property checks shared by the command line tool, the calibration tool and
// the acceptance binary. Each check draws its random inputs from a seed, so
// a result is a pure function of its options.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpstab/coefficients.hpp"
#include "lpstab/parabolic_solver.hpp"
#include "lpstab/stability_harness.hpp"
#include "lpstab/weights.hpp"

namespace lpstab::checks {

using Json = nlohmann::ordered_json;

struct CheckResult {
  std::string name;
  bool passed = false;
  bool report_only = false;  // never affects an exit status
  std::string summary;
  Json details = Json::object();
};

/// Pass thresholds by name. "safety" multiplies every frozen constant; the
/// others are absolute tolerances on residuals, drifts and slopes.
using Tolerances = std::map<std::string, double>;
const Tolerances& default_tolerances();
/// Replaces the thresholds in effect with the defaults updated by
/// `overrides`; throws std::invalid_argument for an unknown name.
void set_tolerance_overrides(const Tolerances& overrides);
const Tolerances& tolerances();
double tolerance(const std::string& name);

bool all_passed(const std::vector<CheckResult>& results);
Json to_json(const CheckResult& r);

// Littlewood-Paley.
CheckResult lp_completeness(int n, int fields, std::uint64_t seed);
CheckResult bernstein(int n, int fields, std::uint64_t seed);

/// Largest max(r, 1/r) of dyadic/direct Sobolev norm ratios over random fields.
double fit_sobolev_constant(int n, double sigma, int fields, std::uint64_t seed);
CheckResult sobolev_equivalence(int train_n, int test_n, int fields, std::uint64_t seed);

// Paraproduct.
CheckResult paraproduct_identity(int n, std::uint64_t seed);
/// max ||T_a^m u||_{H^sigma} / (||a||_inf ||u||_{H^sigma}).
double fit_mapping_constant(int n, int m, double sigma, int pairs, std::uint64_t seed);
CheckResult paraproduct_mapping(int coarse_n, int fine_n, int pairs, std::uint64_t seed);
/// max ||a u - T_a^m u||_{H^{1-s}} / (||a||_Lip ||u||_{H^-s}).
double fit_remainder_constant(int n, int m, double s, int pairs, std::uint64_t seed);
CheckResult remainder_bound(int n, int m, double s, int pairs, std::uint64_t seed);
/// max ||(T - T^*) d/dx u|| / (||a||_Lip ||u||) over random Lipschitz a.
double fit_adjoint_constant(int n, int m, int trials, std::uint64_t seed);
CheckResult adjoint_bound(int n, int m, int trials, std::uint64_t seed);
CheckResult positivity(int n, int trials, std::uint64_t seed);
CheckResult commutator_uniformity(int n);
CheckResult commutator_dense_oracle(int n);

// Weights.
/// Smallest y (to bisection accuracy) at which Phi'' is a finite double.
double representable_floor(double lambda);
CheckResult weight_ode();
CheckResult weight_scaling();
CheckResult phi_oracle();

// Coefficients.
CheckResult mollification(const FamilyParams& params, int max_nu);

// Solver.
struct SolverSuite {
  CheckResult convergence;
  CheckResult conservation;
  CheckResult smoothing;
  double seconds = 0.0;
};
SolverSuite solver_suite(int n, std::uint64_t seed);

// Weighted energy estimate. The frozen constants belong to energy_params()
// on the horizon T = 1; other parameters make the suite report-only.
WeightParams energy_params();

struct EnergyRun {
  std::string family;
  int n = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  double T = 1.0;
  WeightParams params = energy_params();
};

/// Fitted M for every p in {sigma/8, sigma/2, 7 sigma/8} on one run.
struct EnergyRunResult {
  EnergyRun run;
  std::vector<EnergyReport> reports;
  double gamma0 = 0.0;
  bool monotone = false;  // e^{2 gamma0 t} ||u||^2 nondecreasing at the frozen gamma0
  InteriorH1 interior;
  DiagnosticReport diagnostics;
};

EnergyRunResult energy_run(const EnergyRun& run);
/// The held-out suite: two families, two grids, three time steps.
std::vector<EnergyRun> energy_validation_runs();
std::vector<EnergyRun> energy_calibration_runs();
struct EnergySuite {
  CheckResult energy;
  CheckResult diagnostics;
};
EnergySuite energy_suite(const std::vector<EnergyRun>& runs);

// Conditional stability.
struct ScanSetup {
  int n = 512;
  double T = 0.05;
  int steps = 500;
  double s = 0.5;
  int scales = 21;           // log-spaced over [1e-6, 1e-1]
  double datum_width = 0.6;  // Gaussian bump used as datum shape
};

Field scan_datum(const PeriodicGrid& grid, double width);
std::vector<double> scan_scales(int count);
Json to_json(const StabilityScanResult& r);
CheckResult stability(const ScanSetup& setup);
/// Report-only: the loglip_t fit repeated for each Sobolev index in `s_values`.
CheckResult stability_s_sweep(const ScanSetup& setup, const std::vector<double>& s_values);

}  // namespace lpstab::checks
