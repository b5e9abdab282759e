#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "lpstab/weights.hpp"

using namespace lpstab;

namespace {

// Composite Simpson rule, independent of the library quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("modulus and its inverse transform") {
  CHECK(modulus_mu(1.0) == doctest::Approx(1.0));
  CHECK(modulus_mu(std::exp(-1.0)) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(theta(1.0) == doctest::Approx(0.0));
  CHECK(theta(std::exp(3.0)) == doctest::Approx(std::log(4.0)));
  for (double y : {0.1, 0.5, 1.0, 2.0}) CHECK(theta(theta_inv(y)) == doctest::Approx(y).epsilon(1e-13));
  // theta(t) = int_{1/t}^1 ds / mu(s) for t >= 1.
  const double t = 5.0;
  CHECK(theta(t) == doctest::Approx(simpson([](double s) { return 1.0 / modulus_mu(s); }, 1.0 / t, 1.0)).epsilon(1e-10));
  CHECK_THROWS(theta(0.5));
}

TEST_CASE("psi in closed form") {
  CHECK(psi(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(psi(2.0, 0.5) == doctest::Approx(std::exp(3.0)).epsilon(1e-14));
  CHECK(psi(1.5, 0.3) == doctest::Approx(std::exp(std::pow(0.3, -1.5) - 1.0)).epsilon(1e-14));
  CHECK(log_psi(2.0, 0.01) == doctest::Approx(9999.0));
  CHECK_THROWS_AS(psi(2.0, 0.01), OverflowError);
}

TEST_CASE("Phi against an independent quadrature") {
  for (double lambda : {1.5, 2.0, 3.0}) {
    auto integrand = [lambda](double z) { return std::exp(std::pow(z, -lambda) - 1.0); };
    for (double y : {0.5, 0.7, 0.9}) {
      CHECK(phi(lambda, y) == doctest::Approx(-simpson(integrand, y, 1.0)).epsilon(1e-10));
    }
    CHECK(phi(lambda, 1.0) == 0.0);
    CHECK(phi_increment(lambda, 0.6, 0.65) == doctest::Approx(simpson(integrand, 0.6, 0.65)).epsilon(1e-10));
  }
}

TEST_CASE("Phi derivatives") {
  const double lambda = 2.0;
  for (double y : {0.4, 0.6, 0.8}) {
    CHECK(phi_prime(lambda, y) == doctest::Approx(psi(lambda, y)));
    const double h = 1e-5;
    const double fd = (phi_prime(lambda, y + h) - phi_prime(lambda, y - h)) / (2 * h);
    CHECK(phi_second(lambda, y) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(std::abs(ode_residual(lambda, y)) < 1e-10 * std::abs(y * phi_second(lambda, y)));
  }
}

TEST_CASE("scaling identity residual") {
  for (double y : {0.2, 0.5, 0.6}) CHECK(scaling_residual(2.0, 1.5, y) < 1e-12);
  // The identity itself, checked directly on psi.
  const double zeta = 1.5, y = 0.5, l = 2.0;
  const double e = std::pow(zeta, -l);
  CHECK(std::log(psi(l, zeta * y)) == doctest::Approx(e - 1.0 + e * std::log(psi(l, y))).epsilon(1e-13));
}

TEST_CASE("Lambda and its inverse") {
  CHECK(lambda_fn(2.0, 1.0) == 0.0);
  CHECK(lambda_fn(2.0, 2.0) == doctest::Approx(2.0 * phi(2.0, 0.5)));
  for (double z : {-0.01, -1.0, -50.0}) CHECK(lambda_fn(2.0, lambda_inv(2.0, z)) == doctest::Approx(z).epsilon(1e-10));
}

TEST_CASE("weight parameters") {
  const auto p = WeightParams::make(0.5, 2.0, 1.0, 1.0);
  CHECK(p.sigma == doctest::Approx(0.5));
  CHECK(p.tau == doctest::Approx(0.125));
  CHECK(p.beta == doctest::Approx(0.625));
  const auto q = WeightParams::from_horizon(0.5, 2.0, 1.0, 0.5, 1.0);
  CHECK(q.alpha == doctest::Approx(2.0));
  CHECK(q.sigma == doctest::Approx(0.25));
  CHECK_THROWS_AS(WeightParams::make(0.5, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(WeightParams::make(1.2, 2.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(WeightParams::make(0.5, 2.0, 1.0, 1.0, 0.1), DomainError);
}

TEST_CASE("beta from data solves its defining equation") {
  const auto p = WeightParams::make(0.5, 2.0, 1.0, 1.0);
  const double rho = 1e-3;
  const double beta = beta_from_data(p, rho);
  CHECK(beta > 0.0);
  CHECK(std::exp(-beta * phi(p.lambda, p.tau / beta)) == doctest::Approx(1.0 / rho).epsilon(1e-8));
}

TEST_CASE("modulus and theta examples") {
  CHECK(modulus_mu(std::exp(1.0)) == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK(modulus_mu(0.01) < modulus_mu(0.1));
  CHECK(modulus_mu(0.1) < modulus_mu(1.0));
  CHECK(theta(std::exp(1.0)) == doctest::Approx(std::log(2.0)));
  for (double t : {2.0, 10.0, 100.0}) {
    CHECK(simpson([](double s) { return 1.0 / modulus_mu(s); }, 1.0 / t, 1.0, 200000) ==
          doctest::Approx(theta(t)).epsilon(1e-8));
  }
}

TEST_CASE("psi examples") {
  CHECK(psi(1.0, 0.5) == doctest::Approx(std::exp(1.0)));
  for (double l : {1.5, 2.0, 3.0}) {
    for (double y : {0.3, 0.6, 0.9}) CHECK(theta(psi(l, y)) == doctest::Approx(-l * std::log(y)).epsilon(1e-10));
  }
}

TEST_CASE("Phi against a Richardson-extrapolated trapezoid oracle") {
  // Simpson's rule is one Richardson step on the trapezoid rule; a second
  // step (Boole) is taken here from two Simpson values.
  for (double l : {2.0, 3.0}) {
    auto integrand = [l](double z) { return std::exp(std::pow(z, -l) - 1.0); };
    for (double y : {0.3, 0.6, 0.9}) {
      const double s1 = simpson(integrand, y, 1.0, 20000);
      const double s2 = simpson(integrand, y, 1.0, 40000);
      const double oracle = -(16.0 * s2 - s1) / 15.0;
      CHECK(phi(l, y) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("ODE residual examples") {
  auto rel = [](double l, double y) { return std::abs(ode_residual(l, y)) / std::abs(y * phi_second(l, y)); };
  CHECK(rel(2.0, 0.5) <= 1e-12);
  CHECK(rel(1.5, 0.9) <= 1e-12);
  CHECK(ode_residual(2.0, 1.0) == doctest::Approx(0.0));
  CHECK(phi_second(2.0, 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("scaling identity examples") {
  CHECK(scaling_residual(1.0, 2.0, 0.25) <= 1e-14);
  CHECK(scaling_residual(3.0, 4.0, 0.1) <= 1e-12);
  CHECK_THROWS(scaling_residual(2.0, 1.0, 0.5));
  CHECK_THROWS(scaling_residual(2.0, 2.0, 0.6));
}

TEST_CASE("Lambda is decreasing and inverts to 1e-8") {
  double prev = lambda_fn(2.0, 1.0);
  for (double y = 1.1; y < 5.0; y += 0.1) {
    const double v = lambda_fn(2.0, y);
    CHECK(v < prev);
    prev = v;
  }
  for (double z : {-0.1, -1.0, -10.0}) CHECK(lambda_fn(2.0, lambda_inv(2.0, z)) == doctest::Approx(z).epsilon(1e-8));
}

TEST_CASE("beta selection") {
  const auto p = WeightParams::make(0.5, 2.0, 1.0, 1.0);
  double prev = 0.0;
  for (double rho : {1e-3, 1e-6, 1e-12}) {
    const double beta = beta_from_data(p, rho);
    CHECK(std::exp(-beta * phi(p.lambda, p.tau / beta)) == doctest::Approx(1.0 / rho).epsilon(1e-8));
    CHECK(beta > prev);
    prev = beta;
  }
  CHECK_THROWS_AS(choose_beta(p, 0.9), TooLargeData);
}
