#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lpstab/parabolic_solver.hpp"

using namespace lpstab;

namespace {

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("cyclic tridiagonal solve matches a dense solve") {
  const std::size_t n = 12;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = u(rng);
    up[i] = u(rng);
    di[i] = 3.0 + u(rng);
    rhs[i] = u(rng);
    dense[i][i] = di[i];
    dense[i][(i + n - 1) % n] += lo[i];
    dense[i][(i + 1) % n] += up[i];
  }
  const auto x = solve_cyclic_tridiagonal(lo, di, up, rhs);
  const auto y = dense_solve(dense, rhs);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("stencil eigenvalues on cosine modes") {
  const PeriodicGrid g(64);
  const double h = g.spacing();
  const std::vector<double> ones(64, 1.0);
  for (int k : {1, 5, 20}) {
    const Field v = Field::sample(g, [k](double x) { return std::cos(k * x); });
    const auto lv = apply_stencil(ones, v.values(), h);
    const double lam = -4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(lv[static_cast<std::size_t>(i)] - lam * v[i]) < 1e-10 * std::abs(lam));
  }
}

TEST_CASE("constant coefficient steps match the discrete amplification factors") {
  const PeriodicGrid g(64);
  const double h = g.spacing();
  const auto a = builtin_family(FamilyTag::constant);
  const int k = 3;
  const Field v0 = Field::sample(g, [k](double x) { return std::cos(k * x); });
  const double lam = -4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
  for (auto scheme : {TimeScheme::crank_nicolson, TimeScheme::backward_euler}) {
    SolverConfig cfg{g, 0.01, 0.1, scheme};
    const auto traj = solve_forward(a, v0, cfg);
    const double r = scheme == TimeScheme::crank_nicolson ? (1 + lam * cfg.dt / 2) / (1 - lam * cfg.dt / 2)
                                                          : 1 / (1 - lam * cfg.dt);
    const double expected = std::pow(r, cfg.steps());
    CHECK(cfg.steps() == 10);
    CHECK(linf_norm(traj.final() - expected * v0) < 1e-12);
  }
}

TEST_CASE("mass is conserved for variable coefficients") {
  const PeriodicGrid g(128);
  std::mt19937_64 rng(2);
  const Field v0 = random_field(g, rng, 1.0) + Field::constant(g, 0.7);
  const auto traj = solve_forward(builtin_family(FamilyTag::lip_x), v0, SolverConfig{g, 0.005, 0.1});
  CHECK(traj.max_mass_drift < 1e-12);
  CHECK(traj.max_linear_residual < 1e-10);
  CHECK(traj.states.size() == traj.times.size());
}

TEST_CASE("manufactured backward solutions") {
  const PeriodicGrid g(128);
  std::mt19937_64 rng(3);
  const Field gT = random_field(g, rng, 1.0);
  const auto a = builtin_family(FamilyTag::loglip_t);
  const auto traj = manufacture_backward(a, gT, SolverConfig{g, 0.002, 0.2});
  CHECK(traj.direction == Direction::backward);
  CHECK(traj.times.front() == doctest::Approx(0.0));
  CHECK(traj.times.back() == doctest::Approx(0.2));
  CHECK(linf_norm(traj.final() - gT) < 1e-14);
  CHECK(backward_residual(traj, a) < 1e-10);
  CHECK(l2_norm(traj.initial()) < l2_norm(traj.final()));
  CHECK(fitted_gamma0(traj) == doctest::Approx(0.0));
  const auto ih = interior_h1_check(traj, 0.2);
  CHECK(ih.window_lo == doctest::Approx(0.125));
  CHECK(ih.window_hi == doctest::Approx(0.175));
  CHECK(ih.lhs > 0.0);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS(scheme_from_string("leapfrog"));
  CHECK(scheme_from_string(to_string(TimeScheme::backward_euler)) == TimeScheme::backward_euler);
  SolverConfig bad{PeriodicGrid(32), -0.1, 1.0};
  CHECK_THROWS(bad.validate());
  const auto a = builtin_family(FamilyTag::constant, {{"T", 0.1}});
  CHECK_THROWS(manufacture_backward(a, Field::zeros(PeriodicGrid(32)), SolverConfig{PeriodicGrid(32), 0.01, 0.5}));
}

TEST_CASE("constant datum is stationary") {
  const PeriodicGrid g(64);
  const auto traj = solve_forward(builtin_family(FamilyTag::lip_x), Field::constant(g, 0.6), SolverConfig{g, 0.01, 0.2});
  for (const auto& s : traj.states) CHECK(linf_norm(s - Field::constant(g, 0.6)) < 1e-13);
  const auto ih = interior_h1_check(traj, 0.2);
  CHECK(ih.lhs == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(ih.rhs == doctest::Approx(0.36 / 0.2).epsilon(1e-12));
}

TEST_CASE("Crank-Nicolson converges at second order in time") {
  // Reference: the exact semi-discrete decay exp(lambda_h t) of a stencil eigenmode.
  const PeriodicGrid g(64);
  const double h = g.spacing();
  const int k = 4;
  const double lam = -4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
  const Field v0 = Field::sample(g, [k](double x) { return std::sin(k * x); });
  std::vector<double> err;
  for (double dt : {0.01, 0.005, 0.0025}) {
    const auto traj = solve_forward(builtin_family(FamilyTag::constant, {{"c", 1.0}}), v0, SolverConfig{g, dt, 0.2});
    err.push_back(linf_norm(traj.final() - std::exp(lam * 0.2) * v0));
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) == doctest::Approx(2.0).epsilon(0.05));
}
