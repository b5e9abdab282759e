#include "lpstab/parabolic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpstab {

std::string to_string(TimeScheme scheme) {
  return scheme == TimeScheme::backward_euler ? "backward_euler" : "crank_nicolson";
}

TimeScheme scheme_from_string(const std::string& name) {
  if (name == "backward_euler") return TimeScheme::backward_euler;
  if (name == "crank_nicolson") return TimeScheme::crank_nicolson;
  throw DomainError("unknown time scheme '" + name + "' (expected backward_euler or crank_nicolson)");
}

int SolverConfig::steps() const { return static_cast<int>(std::lround(T / dt)); }

double SolverConfig::theta() const {
  return scheme == TimeScheme::backward_euler ? 1.0 : theta_blend;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !(T > 0.0)) throw DomainError("SolverConfig: dt and T must be positive");
  if (dt > T) throw DomainError("SolverConfig: dt must not exceed T");
  if (std::abs(steps() * dt - T) > 1e-9 * T) {
    throw DomainError("SolverConfig: T must be an integer multiple of dt");
  }
  if (!(theta_blend >= 0.5 && theta_blend <= 1.0)) {
    throw DomainError("SolverConfig: theta_blend must lie in [1/2, 1]");
  }
}

std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& lower,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& upper,
                                             const std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (n < 3 || lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw DomainError("solve_cyclic_tridiagonal: inconsistent sizes");
  }
  // A = B + w z^T with B tridiagonal, w = (g, 0, ..., 0, c_last), z = (1, 0, ..., 0, a_0 / g).
  const double g = -diag[0];
  const double corner_top = lower[0];      // A[0][n-1]
  const double corner_bottom = upper[n - 1];  // A[n-1][0]

  std::vector<double> b = diag;
  b[0] -= g;
  b[n - 1] -= corner_bottom * corner_top / g;

  auto thomas = [&](std::vector<double> d) {
    std::vector<double> c(n);
    std::vector<double> x(n);
    c[0] = upper[0] / b[0];
    d[0] /= b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - lower[i] * c[i - 1];
      c[i] = i + 1 < n ? upper[i] / m : 0.0;
      d[i] = (d[i] - lower[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  };

  std::vector<double> y = thomas(rhs);
  std::vector<double> w(n, 0.0);
  w[0] = g;
  w[n - 1] = corner_bottom;
  std::vector<double> q = thomas(w);
  const double zy = y[0] + corner_top / g * y[n - 1];
  const double zq = q[0] + corner_top / g * q[n - 1];
  const double factor = zy / (1.0 + zq);
  for (std::size_t i = 0; i < n; ++i) y[i] -= factor * q[i];
  return y;
}

std::vector<double> apply_stencil(const std::vector<double>& faces, std::span<const double> v,
                                  double h) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  const double inv_h2 = 1.0 / (h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n;
    const std::size_t im = (i + n - 1) % n;
    out[i] = (faces[i] * (v[ip] - v[i]) - faces[im] * (v[i] - v[im])) * inv_h2;
  }
  return out;
}

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Trajectory solve_forward(const CoefficientField& a, const Field& v0, const SolverConfig& config) {
  config.validate();
  if (!(v0.grid() == config.grid)) throw DomainError("solve_forward: datum grid differs from config grid");
  for (double x : v0.values()) {
    if (!std::isfinite(x)) throw DomainError("solve_forward: datum must be finite");
  }
  const auto& grid = config.grid;
  const std::size_t n = static_cast<std::size_t>(grid.size());
  const double h = grid.spacing();
  const double dt = config.dt;
  const double th = config.theta();
  const int steps = config.steps();

  Trajectory traj;
  traj.config = config;
  traj.direction = Direction::forward;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(v0);

  const double mass0 = mean(v0.values());
  const double mass_scale = std::max({std::abs(mass0), l2_norm(v0), std::numeric_limits<double>::min()});

  std::vector<double> v(v0.values().begin(), v0.values().end());
  std::vector<double> lower(n), diag(n), upper(n), rhs(n);
  for (int step = 0; step < steps; ++step) {
    const double t_coef = step * dt + th * dt;
    const auto faces = a.at_faces(t_coef, grid);
    const auto lv = apply_stencil(faces, v, h);
    const double r = dt / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n;
      diag[i] = 1.0 + th * r * (faces[i] + faces[im]);
      lower[i] = -th * r * faces[im];
      upper[i] = -th * r * faces[i];
      rhs[i] = v[i] + (1.0 - th) * dt * lv[i];
    }
    std::vector<double> next = solve_cyclic_tridiagonal(lower, diag, upper, rhs);

    // Residual of the linear system, relative to the right-hand side.
    const auto lnext = apply_stencil(faces, next, h);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(next[i] - th * dt * lnext[i] - rhs[i]));
    const double scale = std::max(max_abs(rhs), std::numeric_limits<double>::min());
    res /= scale;
    traj.max_linear_residual = std::max(traj.max_linear_residual, res);
    if (!(res <= 1e-8)) {
      throw SolverError("solve_forward: linear solve residual " + std::to_string(res) +
                            " at step " + std::to_string(step),
                        res);
    }
    v = std::move(next);
    traj.max_mass_drift = std::max(traj.max_mass_drift, std::abs(mean(v) - mass0) / mass_scale);
    traj.times.push_back((step + 1) * dt);
    traj.states.emplace_back(grid, v);
  }
  traj.times.back() = config.T;
  return traj;
}

Trajectory manufacture_backward(const CoefficientField& a, const Field& g,
                                const SolverConfig& config) {
  config.validate();
  if (config.T > a.horizon() * (1.0 + 1e-12)) {
    throw DomainError("manufacture_backward: T exceeds the coefficient horizon");
  }
  const double T = config.T;
  const CoefficientField reversed(
      [a, T](double t, double x) { return a(T - t, x); }, a.kappa(), a.horizon(),
      a.declared_A_LL(), a.declared_A(), a.tag());
  Trajectory fwd = solve_forward(reversed, g, config);
  Trajectory back;
  back.config = config;
  back.direction = Direction::backward;
  back.max_linear_residual = fwd.max_linear_residual;
  back.max_mass_drift = fwd.max_mass_drift;
  const std::size_t m = fwd.states.size();
  back.times.reserve(m);
  back.states.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    back.times.push_back(T - fwd.times[m - 1 - j]);
    back.states.push_back(std::move(fwd.states[m - 1 - j]));
  }
  back.times.front() = 0.0;
  back.times.back() = T;
  return back;
}

double backward_residual(const Trajectory& traj, const CoefficientField& a) {
  if (traj.states.size() < 2) throw DomainError("backward_residual: trajectory needs two states");
  const auto& grid = traj.states.front().grid();
  const double h = grid.spacing();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const auto faces = a.at_faces(0.5 * (traj.times[k] + traj.times[k + 1]), grid);
    const auto u0 = traj.states[k].values();
    const auto u1 = traj.states[k + 1].values();
    const auto l0 = apply_stencil(faces, u0, h);
    const auto l1 = apply_stencil(faces, u1, h);
    for (std::size_t i = 0; i < u0.size(); ++i) {
      worst = std::max(worst, std::abs((u1[i] - u0[i]) / dt + 0.5 * (l0[i] + l1[i])));
      scale = std::max(scale, std::abs(l0[i]));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

double fitted_gamma0(const Trajectory& traj) {
  double gamma = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const double e0 = inner(traj.states[k], traj.states[k]);
    const double e1 = inner(traj.states[k + 1], traj.states[k + 1]);
    if (e0 == 0.0 || e1 == 0.0) continue;
    const double dt = traj.times[k + 1] - traj.times[k];
    gamma = std::max(gamma, -(std::log(e1) - std::log(e0)) / (2.0 * dt));
  }
  return gamma;
}

InteriorH1 interior_h1_check(const Trajectory& traj, double sigma,
                             std::optional<std::pair<double, double>> window) {
  if (!(sigma > 0.0)) throw DomainError("interior_h1_check: sigma must be positive");
  const auto [lo, hi] = window.value_or(std::pair{5.0 * sigma / 8.0, 7.0 * sigma / 8.0});
  if (!(lo <= hi) || lo < traj.times.front() || hi > traj.times.back() * (1.0 + 1e-12)) {
    throw DomainError("interior_h1_check: window lies outside the trajectory");
  }
  InteriorH1 out;
  out.window_lo = lo;
  out.window_hi = hi;
  out.lhs = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.times[k];
    if (t < lo - 1e-12 || t > hi + 1e-12) continue;
    any = true;
    const double h1 = sobolev_norm_direct(traj.states[k], 1.0);
    out.lhs = std::min(out.lhs, h1 * h1);
    out.rhs = std::max(out.rhs, inner(traj.states[k], traj.states[k]) / sigma);
  }
  if (!any) throw DomainError("interior_h1_check: no snapshot falls inside the window");
  return out;
}

}  // namespace lpstab
