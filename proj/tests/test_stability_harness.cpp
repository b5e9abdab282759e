#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "lpstab/stability_harness.hpp"

using namespace lpstab;

TEST_CASE("energy weight in log form") {
  const auto p = WeightParams::make(0.5, 2.0, 1.0, 1.0);
  for (double t : {0.0, 0.1, 0.4}) {
    const double expected = 2.0 * p.gamma * t - 2.0 * p.beta * phi(p.lambda, (t + p.tau) / p.beta);
    CHECK(log_energy_weight(p, t) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("block energies of a decaying dyadic mode") {
  const PeriodicGrid g(64);
  const Field v0 = Field::sample(g, [](double x) { return std::cos(16 * x); });
  const auto traj = solve_forward(builtin_family(FamilyTag::constant), v0, SolverConfig{g, 0.01, 0.05});
  const BlockEnergies be(traj);
  REQUIRE(be.times.size() == traj.times.size());
  for (std::size_t j = 0; j < be.times.size(); ++j) {
    const double e = std::pow(l2_norm(traj.states[j]), 2);
    CHECK(be.energies[j][4] == doctest::Approx(e).epsilon(1e-12));
    CHECK(be.sobolev_sq(be.times[j], 0.5) == doctest::Approx(16.0 * e).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity violations depend on gamma") {
  const PeriodicGrid g(64);
  const Field v0 = Field::sample(g, [](double x) { return std::cos(3 * x); });
  const auto traj = solve_forward(builtin_family(FamilyTag::constant), v0, SolverConfig{g, 0.01, 0.1});
  // ||v||^2 decays like exp(-18 t); e^{2 gamma t} compensates once gamma > 9.
  CHECK_FALSE(energy_monotonicity_violations(traj, 0.0).empty());
  CHECK(energy_monotonicity_violations(traj, 10.0).empty());
}

TEST_CASE("energy report of a zero trajectory") {
  const PeriodicGrid g(32);
  const auto traj = solve_forward(builtin_family(FamilyTag::constant), Field::zeros(g), SolverConfig{g, 0.01, 0.5});
  const auto r = energy_inequality_check(traj, WeightParams::make(0.5, 2.0, 1.0, 1.0), 0.2);
  CHECK(r.log_lhs == -std::numeric_limits<double>::infinity());
  CHECK(r.fitted_M == 0.0);
}

TEST_CASE("fitted M is the ratio of the two sides") {
  const PeriodicGrid g(64);
  const Field gT = Field::sample(g, [](double x) { return std::cos(2 * x) + 0.3 * std::sin(9 * x); });
  const auto a = builtin_family(FamilyTag::lip_x);
  const auto traj = manufacture_backward(a, gT, SolverConfig{g, 0.005, 0.5});
  const auto p = WeightParams::from_horizon(0.5, 2.0, 1.0, 0.5, 1.0);
  const auto r = energy_inequality_check(traj, p, 0.1);
  CHECK(std::isfinite(r.log_lhs));
  CHECK(r.fitted_M > 0.0);
  CHECK(std::log(r.fitted_M) == doctest::Approx(r.log_lhs - r.log_rhs_terms()).epsilon(1e-10));
}

TEST_CASE("stability fit recovers synthetic parameters") {
  std::vector<double> rho, sup;
  for (int i = 0; i <= 20; ++i) {
    const double r = std::pow(10.0, -1.0 - 5.0 * i / 20.0);
    rho.push_back(r);
    sup.push_back(std::exp(1.0 - 0.8 * std::pow(std::abs(std::log(r)), 0.5)));
  }
  const auto fit = fit_stability(rho, sup);
  REQUIRE(fit.has_value());
  CHECK(fit->delta == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(fit->N == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(fit->log_M == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fit->r_squared > 0.9999);
  CHECK_FALSE(fit_stability({1e-2, 1e-3, 1e-4}, {0.5, 0.4, 0.3}).has_value());
}

TEST_CASE("scan verdict requires a sublinear exponent and a good fit") {
  StabilityScanResult r;
  r.status = "ok";
  r.monotone = true;
  r.fit = StabilityFit{0.0, 1.0, 0.5, 0.95};
  CHECK(r.pass());
  r.fit->delta = 1.05;
  CHECK_FALSE(r.pass());
  r.fit->delta = 0.5;
  r.fit->r_squared = 0.5;
  CHECK_FALSE(r.pass());
  r.fit->r_squared = 0.95;
  r.monotone = false;
  CHECK_FALSE(r.pass());
  r.monotone = true;
  r.status = "insufficient-data";
  CHECK_FALSE(r.pass());
}

TEST_CASE("a scan without scales has insufficient data") {
  const PeriodicGrid g(64);
  ScanConfig cfg;
  cfg.solver = SolverConfig{g, 0.01, 0.2};
  const auto r = stability_scan(builtin_family(FamilyTag::constant, {{"T", 0.2}}),
                                Field::sample(g, [](double x) { return std::exp(-std::pow(x - 3.0, 2)); }), {}, cfg);
  CHECK(r.status == "insufficient-data");
  CHECK_FALSE(r.fit.has_value());
  CHECK_FALSE(r.pass());
}

TEST_CASE("constant coefficient scan is monotone in the data scale") {
  const PeriodicGrid g(64);
  ScanConfig cfg;
  cfg.solver = SolverConfig{g, 0.005, 0.2};
  const Field shape = Field::sample(g, [](double x) { return std::exp(-4.0 * std::pow(x - 3.0, 2)); });
  const auto r = stability_scan(builtin_family(FamilyTag::constant, {{"T", 0.2}}), shape, {1e-2, 1e-4, 1e-6, 1e-8}, cfg);
  CHECK(r.monotone);
  for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].sup_norm <= r.points[i - 1].sup_norm);
}

TEST_CASE("proof diagnostics of degenerate inputs") {
  const PeriodicGrid g(128);
  const auto p = WeightParams::from_horizon(0.5, 2.0, 1.0, 0.2, 1.0);
  const auto c = builtin_family(FamilyTag::constant, {{"T", 0.2}});
  const auto zero = solve_forward(c, Field::zeros(g), SolverConfig{g, 0.01, 0.2});
  const auto z = proof_diagnostics(zero, c, 3, 0.5, p).max();
  CHECK(z.auxp1 == 0.0);
  CHECK(z.comm_pairing == 0.0);
  CHECK(z.comm_square == 0.0);
  CHECK(z.comm_weighted == 0.0);
  const Field v0 = Field::sample(g, [](double x) { return std::cos(3 * x) + 0.2 * std::sin(40 * x); });
  const auto traj = solve_forward(c, v0, SolverConfig{g, 0.01, 0.2});
  const auto d = proof_diagnostics(traj, c, 3, 0.5, p).max();
  CHECK(d.comm_pairing <= 1e-10);
  CHECK(d.comm_square <= 1e-10);
  CHECK(d.comm_weighted <= 1e-10);
}
