// Forward solver for v_t = d/dx(a d/dx v) on the periodic grid, and the
// time-reversal construction of solutions of the backward equation
// u_t + d/dx(a d/dx u) = 0.
//
// Space: conservative stencil (L v)_i = (a_{i+1/2}(v_{i+1} - v_i) - a_{i-1/2}(v_i - v_{i-1})) / h^2
// with a sampled at the cell faces. Time: theta scheme
//   (v^{n+1} - v^n) / dt = L(t_n + theta dt) (theta v^{n+1} + (1 - theta) v^n),
// theta = 1/2 for Crank-Nicolson and 1 for backward Euler.
#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lpstab/coefficients.hpp"
#include "lpstab/spectral_grid.hpp"

namespace lpstab {

enum class TimeScheme { backward_euler, crank_nicolson };

std::string to_string(TimeScheme scheme);
TimeScheme scheme_from_string(const std::string& name);

struct SolverConfig {
  PeriodicGrid grid{256};
  double dt = 1e-3;
  double T = 0.1;
  TimeScheme scheme = TimeScheme::crank_nicolson;
  /// Implicitness used by crank_nicolson; backward_euler always uses 1.
  double theta_blend = 0.5;

  int steps() const;
  double theta() const;
  void validate() const;
};

/// A linear solve whose residual is not small.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

enum class Direction { forward, backward };

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  Direction direction = Direction::forward;
  SolverConfig config;
  double max_linear_residual = 0.0;
  /// max_n |mean(v^n) - mean(v^0)| / max(|mean(v^0)|, ||v^0||).
  double max_mass_drift = 0.0;

  const Field& initial() const { return states.front(); }
  const Field& final() const { return states.back(); }
  double dt() const { return config.dt; }
};

/// Periodic tridiagonal system: lower[i] multiplies x[i-1], upper[i]
/// multiplies x[i+1], indices taken mod n. Thomas algorithm plus a
/// Sherman-Morrison correction for the corners.
std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& lower,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& upper,
                                             const std::vector<double>& rhs);

/// (L v)_i with coefficients at the faces.
std::vector<double> apply_stencil(const std::vector<double>& faces, std::span<const double> v,
                                  double h);

Trajectory solve_forward(const CoefficientField& a, const Field& v0, const SolverConfig& config);

/// u(t) = v(T - t) where v solves the forward problem with a(T - t, x) and
/// v(0) = g. Requires config.T <= a.horizon(); the reversal uses a.horizon()
/// only through config.T.
Trajectory manufacture_backward(const CoefficientField& a, const Field& g,
                                const SolverConfig& config);

/// Residual of the backward equation under the centred discretisation
///   (u^{n+1} - u^n)/dt + L(t_{n+1/2}) (u^n + u^{n+1})/2,
/// as max_n ||.||_inf / max_n ||L(t_{n+1/2}) u^n||_inf.
double backward_residual(const Trajectory& traj, const CoefficientField& a);

/// Smallest gamma >= 0 for which e^{2 gamma t} ||u(t)||^2 is nondecreasing
/// along the stored snapshots.
double fitted_gamma0(const Trajectory& traj);

struct InteriorH1 {
  double lhs = 0.0;  // inf over the window of ||u||_{H^1}^2
  double rhs = 0.0;  // sup over the window of ||u||_{L^2}^2 / sigma
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Window defaults to [5 sigma/8, 7 sigma/8].
InteriorH1 interior_h1_check(const Trajectory& traj, double sigma,
                             std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace lpstab
