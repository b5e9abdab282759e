#include "lpstab/weights.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace lpstab {

namespace {

void require_unit_interval(double y, const char* who) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw DomainError(std::string(who) + ": y must lie in (0, 1], got " + std::to_string(y));
  }
}

void require_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError(std::string(who) + ": lambda must be positive");
  }
}

}  // namespace

WeightParams WeightParams::make(double s, double lambda, double alpha, double gamma, double beta) {
  WeightParams p;
  p.s = s;
  p.lambda = lambda;
  p.alpha = alpha;
  p.sigma = (1.0 - s) / alpha;
  p.tau = p.sigma / 4.0;
  p.beta = beta > 0.0 ? beta : p.sigma + p.tau;
  p.gamma = gamma;
  p.validate();
  return p;
}

WeightParams WeightParams::from_horizon(double s, double lambda, double alpha_1, double horizon,
                                        double gamma, double beta) {
  if (!(horizon > 0.0)) throw DomainError("WeightParams: horizon must be positive");
  return make(s, lambda, std::max(alpha_1, 1.0 / horizon), gamma, beta);
}

void WeightParams::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("WeightParams: s must lie in (0, 1)");
  if (!(lambda > 1.0)) throw DomainError("WeightParams: lambda must exceed 1");
  if (!(alpha > 0.0)) throw DomainError("WeightParams: alpha must be positive");
  if (!(gamma > 0.0)) throw DomainError("WeightParams: gamma must be positive");
  const double want_sigma = (1.0 - s) / alpha;
  if (std::abs(sigma - want_sigma) > 1e-15 * want_sigma || std::abs(tau - sigma / 4.0) > 1e-15 * sigma) {
    throw DomainError("WeightParams: sigma = (1-s)/alpha and tau = sigma/4 are required");
  }
  if (beta < sigma + tau) throw DomainError("WeightParams: beta must be >= sigma + tau");
}

double modulus_mu(double x) {
  if (!(x > 0.0)) throw DomainError("modulus_mu: x must be positive");
  return x * (1.0 + std::abs(std::log(x)));
}

double theta(double tau_arg) {
  if (!(tau_arg >= 1.0)) throw DomainError("theta: argument must be >= 1");
  return std::log1p(std::abs(std::log(tau_arg)));
}

double theta_inv(double y) {
  if (!(y >= 0.0)) throw DomainError("theta_inv: argument must be >= 0");
  const double e = std::expm1(y);
  if (e > std::log(std::numeric_limits<double>::max())) throw OverflowError("theta_inv: overflow");
  return std::exp(e);
}

double psi_exponent_limit() { return std::log(std::numeric_limits<double>::max()) + 1.0; }

double log_psi(double lambda, double y) {
  require_lambda(lambda, "log_psi");
  require_unit_interval(y, "log_psi");
  return std::pow(y, -lambda) - 1.0;
}

double psi(double lambda, double y) {
  require_lambda(lambda, "psi");
  require_unit_interval(y, "psi");
  const double e = std::pow(y, -lambda);
  if (!(e <= psi_exponent_limit())) {
    throw OverflowError("psi: y^-lambda = " + std::to_string(e) + " exceeds log(DBL_MAX)+1");
  }
  return std::exp(e - 1.0);
}

double phi_increment(double lambda, double y0, double y1) {
  if (!(y0 <= y1)) throw DomainError("phi_increment: need y0 <= y1");
  psi(lambda, y0);  // overflow check at the steep end
  require_unit_interval(y1, "phi_increment");
  if (y0 == y1) return 0.0;
  // With Y = y^-l and z = (Y0 - v)^(-1/l):
  //   int_{y0}^{y1} psi(z) dz = e^{Y0-1} int_0^{Y0-Y1} e^{-v} (1/l) (Y0 - v)^{-1/l - 1} dv,
  // whose integrand is bounded and decays, unlike psi near y0.
  const double Y0 = std::pow(y0, -lambda);
  const double Y1 = std::pow(y1, -lambda);
  auto integrand = [lambda, Y0](double v) {
    return std::exp(-v) * std::pow(Y0 - v, -1.0 / lambda - 1.0) / lambda;
  };
  // The integrand varies on unit scale, so short ranges need no subdivision.
  const unsigned depth = Y0 - Y1 < 1.0 ? 0 : 15;
  const double J = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, Y0 - Y1, depth, 1e-13);
  return std::exp(Y0 - 1.0) * J;
}

double phi(double lambda, double y) { return -phi_increment(lambda, y, 1.0); }

double phi_prime(double lambda, double y) { return psi(lambda, y); }

double phi_second(double lambda, double y) {
  return -lambda * std::pow(y, -lambda - 1.0) * psi(lambda, y);
}

double ode_residual(double lambda, double y) {
  if (!(y > 0.0 && y <= 1.0)) throw DomainError("ode_residual: y must lie in (0, 1]");
  const double d1 = phi_prime(lambda, y);
  const double d2 = phi_second(lambda, y);
  return y * d2 + lambda * d1 * (1.0 + std::abs(std::log(1.0 / d1)));
}

double scaling_residual(double lambda, double zeta, double y) {
  if (!(zeta > 1.0)) throw DomainError("scaling_residual: zeta must exceed 1");
  if (!(y > 0.0 && y <= 1.0 / zeta)) throw DomainError("scaling_residual: need 0 < y <= 1/zeta");
  const double zl = std::pow(zeta, -lambda);
  const double log_lhs = log_psi(lambda, zeta * y);
  const double log_rhs = (zl - 1.0) + zl * log_psi(lambda, y);
  return std::abs(std::expm1(log_rhs - log_lhs));
}

double lambda_fn(double lambda, double y) {
  if (!(y >= 1.0)) throw DomainError("lambda_fn: y must be >= 1");
  return y * phi(lambda, 1.0 / y);
}

double lambda_inv(double lambda, double z) {
  if (!(z <= 0.0)) throw DomainError("lambda_inv: z must be <= 0 (Lambda maps into (-inf, 0])");
  if (z == 0.0) return 1.0;
  double lo = 1.0;
  double hi = 2.0;
  while (lambda_fn(lambda, hi) > z) {  // throws OverflowError if the bracket runs away
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lambda_fn(lambda, mid) > z) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double beta_from_data(const WeightParams& params, double data_hnorm) {
  if (!(data_hnorm > 0.0 && data_hnorm < 1.0)) {
    throw DomainError("beta_from_data: data norm must lie in (0, 1)");
  }
  return params.tau * lambda_inv(params.lambda, std::log(data_hnorm) / params.tau);
}

double choose_beta(const WeightParams& params, double data_hnorm) {
  const double beta = beta_from_data(params, data_hnorm);
  const double floor = params.sigma + params.tau;
  if (beta < floor) {
    throw TooLargeData("choose_beta: data norm " + std::to_string(data_hnorm) +
                           " gives beta = " + std::to_string(beta) + " < sigma + tau = " +
                           std::to_string(floor),
                       beta, floor);
  }
  return beta;
}

double smallness_threshold(const WeightParams& params) {
  const double y = (params.sigma + params.tau) / params.tau;
  try {
    return std::exp(params.tau * lambda_fn(params.lambda, y));
  } catch (const OverflowError&) {
    return 0.0;
  }
}

}  // namespace lpstab
