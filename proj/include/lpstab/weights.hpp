// Weight functions for the weighted energy estimate.
//
//   mu(x)       = x (1 + |log x|)
//   theta(t)    = int_{1/t}^1 ds / mu(s) = log(1 + |log t|)
//   psi_l(y)    = theta^{-1}(-l log y) = exp(y^-l - 1)
//   Phi_l(y)    = -int_y^1 psi_l(z) dz,  Phi' = psi,  Phi'' = -l y^{-l-1} psi
//   Lambda_l(y) = y Phi_l(1/y)
//
// Phi satisfies y Phi'' = -l Phi' (1 + |log(1/Phi')|).
#pragma once

#include <stdexcept>

#include "lpstab/spectral_grid.hpp"

namespace lpstab {

/// psi would not be representable as a finite double.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// The data norm is too large for the weight parameter to satisfy
/// beta >= sigma + tau.
class TooLargeData : public std::runtime_error {
 public:
  explicit TooLargeData(const std::string& what, double beta, double floor)
      : std::runtime_error(what), beta_(beta), floor_(floor) {}
  double beta() const { return beta_; }
  double floor() const { return floor_; }

 private:
  double beta_;
  double floor_;
};

struct WeightParams {
  double s = 0.5;
  double lambda = 2.0;
  double alpha = 1.0;
  double sigma = 0.5;   // (1 - s) / alpha
  double tau = 0.125;   // sigma / 4
  double beta = 0.625;  // >= sigma + tau
  double gamma = 1.0;

  /// Derives sigma and tau from (s, alpha); beta defaults to sigma + tau.
  static WeightParams make(double s, double lambda, double alpha, double gamma,
                           double beta = 0.0);
  /// alpha := max(alpha_1, 1/T), then as make().
  static WeightParams from_horizon(double s, double lambda, double alpha_1, double horizon,
                                   double gamma, double beta = 0.0);
  void validate() const;
};

double modulus_mu(double x);
double theta(double tau_arg);
double theta_inv(double y);

/// log psi_l(y) = y^-l - 1; never overflows for y in (0, 1].
double log_psi(double lambda, double y);
/// Largest admissible y^-l: psi is representable iff y^-l <= log(DBL_MAX) + 1.
double psi_exponent_limit();
double psi(double lambda, double y);

double phi(double lambda, double y);
/// Phi(y1) - Phi(y0) = int_{y0}^{y1} psi, accurate relative to itself even
/// when Phi(y0) is huge.
double phi_increment(double lambda, double y0, double y1);
double phi_prime(double lambda, double y);
double phi_second(double lambda, double y);

/// y Phi'' + l Phi' (1 + |log(1/Phi')|), evaluated with the analytic Phi', Phi''.
double ode_residual(double lambda, double y);
/// Relative residual of psi(zeta y) = exp(zeta^-l - 1) psi(y)^(zeta^-l),
/// computed in log space. Requires zeta > 1 and 0 < y <= 1/zeta.
double scaling_residual(double lambda, double zeta, double y);

double lambda_fn(double lambda, double y);
/// Inverse of Lambda_l on (-inf, 0] by bracketed bisection.
double lambda_inv(double lambda, double z);

/// beta = tau Lambda^{-1}((1/tau) log rho), i.e. exp(-beta Phi(tau/beta)) = 1/rho.
double beta_from_data(const WeightParams& params, double data_hnorm);
/// As beta_from_data, but throws TooLargeData when beta < sigma + tau.
double choose_beta(const WeightParams& params, double data_hnorm);
/// Largest data norm for which choose_beta succeeds; 0 when it underflows.
double smallness_threshold(const WeightParams& params);

}  // namespace lpstab
