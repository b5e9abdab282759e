// Numerical checks of the weighted energy inequality and of conditional
// stability on manufactured backward solutions.
//
// Weighted energy inequality, for p in [0, 7 sigma/8]:
//   int_0^p W(t) ||u(t)||^2_{H^{1-s-alpha t}} dt
//     <= M [ (p + tau) W(p) ||u(p)||^2_{H^{1-s-alpha p}}
//            + tau Phi'(tau/beta) e^{-2 beta Phi(tau/beta)} ||u(0)||^2_{H^{-s}} ],
//   W(t) = e^{2 gamma t} e^{-2 beta Phi((t + tau)/beta)}.
// W overflows doubles for realistic parameters, so every side is carried as
// a natural logarithm.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpstab/coefficients.hpp"
#include "lpstab/parabolic_solver.hpp"
#include "lpstab/weights.hpp"

namespace lpstab {

/// log W(t) = 2 gamma t - 2 beta Phi((t + tau)/beta).
double log_energy_weight(const WeightParams& params, double t);

/// ||Delta_k u(t_j)||^2 for every stored snapshot.
struct BlockEnergies {
  std::vector<double> times;
  std::vector<std::vector<double>> energies;  // [snapshot][k]

  explicit BlockEnergies(const Trajectory& traj);
  /// sum_k 2^{2k sigma} e_k(t), with e_k interpolated linearly in t.
  double sobolev_sq(double t, double sigma) const;
};

struct EnergyReport {
  double p = 0.0;
  double log_lhs = 0.0;       // -inf for a zero trajectory
  double log_endpoint = 0.0;
  double log_data = 0.0;
  double fitted_M = 0.0;      // lhs / (endpoint + data); 0 when lhs = 0
  WeightParams params;
  std::string quadrature;

  double log_rhs_terms() const;
};

EnergyReport energy_inequality_check(const Trajectory& traj, const WeightParams& params, double p);

/// Snapshot times t_j at which e^{2 gamma t} ||u||^2 decreases; empty when
/// the energy is nondecreasing.
std::vector<double> energy_monotonicity_violations(const Trajectory& traj, double gamma);

struct ScanPoint {
  double target = 0.0;     // requested data scale
  double rho = 0.0;        // ||u(0)||_{H^{-s}}
  double sup_norm = 0.0;   // sup over [0, sigma/8] of ||u(t)||
  double window_max = 0.0; // max over [5 sigma/8, 7 sigma/8] of ||u(t)||
  double frequency = 0.0;  // effective datum frequency k + theta
  double fit_value = 0.0;  // fitted log sup at this point
};

struct StabilityFit {
  double log_M = 0.0;
  double N = 0.0;
  double delta = 0.0;
  double r_squared = 0.0;
};

struct ScanConfig {
  SolverConfig solver;   // T is the scan horizon
  double s = 0.5;
  double D = 1.0;        // ||u(T)||, held fixed across the scan
  int max_frequency = 0; // 0: n/4
};

struct StabilityScanResult {
  std::vector<ScanPoint> points;
  std::optional<StabilityFit> fit;  // empty: fewer than 4 usable points
  bool monotone = false;
  double sigma = 0.0;
  double sigma_bar = 0.0;
  double smallness_threshold = 0.0;
  std::string status;  // "ok", "insufficient-data"

  bool pass() const;
};

/// Least-squares fit of log(sup) = log M - N |log rho|^delta, delta in (0, 3].
std::optional<StabilityFit> fit_stability(const std::vector<double>& rho,
                                          const std::vector<double>& sup_norm);

/// Each point holds ||u(T)|| = D and modulates the datum as
/// datum_shape * cos(k x) with k chosen (and blended between neighbouring
/// integers) so that ||u(0)||_{H^{-s}} equals the requested scale.
StabilityScanResult stability_scan(const CoefficientField& a, const Field& datum_shape,
                                   const std::vector<double>& scales, const ScanConfig& config);

/// Same pipeline for the oscillatory control family; never asserted.
StabilityScanResult negative_control_scan(const CoefficientField& a, const Field& datum_shape,
                                          const std::vector<double>& scales,
                                          const ScanConfig& config);

/// Smallest constants making each summed inequality hold at one time.
struct DiagnosticRow {
  double t = 0.0;
  double auxp1 = 0.0;          // C_s with the given N
  double auxp1_weighted = 0.0; // nu-weighted companion
  double comm_pairing = 0.0;   // C_m / (1 - s) ||a||_Lip form, with N
  double comm_square = 0.0;    // squared-commutator bound
  double comm_weighted = 0.0;  // nu-weighted commutator bound
  double transform_residual = 0.0;
};

struct DiagnosticReport {
  std::vector<DiagnosticRow> rows;
  int m = 3;
  double s = 0.5;
  double n_param = 4.0;

  DiagnosticRow max() const;
};

/// Evaluates the summed block inequalities on snapshots in [0, 7 sigma/8]
/// (at most `max_rows`, evenly spread). The transformed field is
/// w = e^{gamma t} e^{-beta Phi((t+tau)/beta)} u; every inequality is
/// homogeneous in w, so the exponential factor is divided out.
DiagnosticReport proof_diagnostics(const Trajectory& traj, const CoefficientField& a, int m,
                                   double s, const WeightParams& params, double n_param = 4.0,
                                   int max_rows = 12);

}  // namespace lpstab
