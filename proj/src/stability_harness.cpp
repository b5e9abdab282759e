#include "lpstab/stability_harness.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "lpstab/littlewood_paley.hpp"
#include "lpstab/paraproduct.hpp"

namespace lpstab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace

double log_energy_weight(const WeightParams& params, double t) {
  const double y = (t + params.tau) / params.beta;
  return 2.0 * params.gamma * t - 2.0 * params.beta * phi(params.lambda, y);
}

BlockEnergies::BlockEnergies(const Trajectory& traj) : times(traj.times) {
  if (traj.states.empty()) throw DomainError("BlockEnergies: empty trajectory");
  const auto& grid = traj.states.front().grid();
  const int n = grid.size();
  const int kmax = grid.k_max();
  // Squared block symbols, tabulated once per frequency.
  std::vector<std::vector<std::pair<int, double>>> table(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int xi = grid.frequency(i);
    for (int k = 0; k <= kmax; ++k) {
      const double b = block_symbol(k, xi);
      if (b != 0.0) table[static_cast<std::size_t>(i)].emplace_back(k, b * b);
    }
  }
  energies.reserve(traj.states.size());
  const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
  for (const auto& state : traj.states) {
    std::vector<double> e(static_cast<std::size_t>(kmax + 1), 0.0);
    const auto& spec = state.spectrum();
    for (int i = 0; i < n; ++i) {
      const double c2 = std::norm(spec[static_cast<std::size_t>(i)]) * inv_n2;
      if (c2 == 0.0) continue;
      for (const auto& [k, w] : table[static_cast<std::size_t>(i)]) e[static_cast<std::size_t>(k)] += w * c2;
    }
    energies.push_back(std::move(e));
  }
}

double BlockEnergies::sobolev_sq(double t, double sigma) const {
  std::size_t j = 0;
  double theta = 0.0;
  if (times.size() > 1) {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    j = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    j = std::min(j, times.size() - 2);
    theta = std::clamp((t - times[j]) / (times[j + 1] - times[j]), 0.0, 1.0);
  }
  const auto& e0 = energies[j];
  const auto& e1 = energies[std::min(j + 1, energies.size() - 1)];
  double acc = 0.0;
  for (std::size_t k = 0; k < e0.size(); ++k) {
    acc += std::exp2(2.0 * sigma * static_cast<double>(k)) * ((1.0 - theta) * e0[k] + theta * e1[k]);
  }
  return acc;
}

double EnergyReport::log_rhs_terms() const { return log_add(log_endpoint, log_data); }

EnergyReport energy_inequality_check(const Trajectory& traj, const WeightParams& params, double p) {
  params.validate();
  if (!(p >= 0.0 && p <= 7.0 * params.sigma / 8.0 * (1.0 + 1e-12))) {
    throw DomainError("energy_inequality_check: p must lie in [0, 7 sigma/8]");
  }
  if (traj.times.empty() || traj.times.back() < p * (1.0 - 1e-12)) {
    throw DomainError("energy_inequality_check: trajectory does not reach p");
  }
  const BlockEnergies blocks(traj);
  const double s = params.s;
  const double alpha = params.alpha;

  EnergyReport r;
  r.p = p;
  r.params = params;
  r.quadrature =
      "adaptive Gauss-Kronrod (15 points, depth 8, rel tol 1e-8) on each snapshot interval, first interval "
      "split at t1 2^-j (j <= 60); block energies linear between snapshots";

  const double y0 = params.tau / params.beta;
  r.log_data = std::log(params.tau) + log_psi(params.lambda, y0) -
               2.0 * params.beta * phi(params.lambda, y0) + safe_log(blocks.sobolev_sq(0.0, -s));
  r.log_endpoint = std::log(p + params.tau) + 2.0 * params.gamma * p +
                   log_energy_weight(params, 0.0) -
                   2.0 * params.beta * phi_increment(params.lambda, y0, (p + params.tau) / params.beta) +
                   safe_log(blocks.sobolev_sq(p, 1.0 - s - alpha * p));

  // Breakpoints: snapshot times inside (0, p), p itself, and a geometric
  // refinement towards 0 where the weight varies fastest.
  std::vector<double> cuts{0.0};
  double first = p;
  for (double t : traj.times) {
    if (t > 0.0 && t < p) {
      first = std::min(first, t);
    }
  }
  for (int j = 60; j >= 1; --j) cuts.push_back(std::ldexp(first, -j));
  for (double t : traj.times) {
    if (t >= first && t < p) cuts.push_back(t);
  }
  cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  if (p == 0.0) {
    r.log_lhs = kNegInf;
    r.fitted_M = 0.0;
    return r;
  }

  // Weights relative to W(0): log W(t) - log W(0) = 2 gamma t - 2 beta int_{y0}^{y(t)} psi.
  auto rel = [&](double t) {
    return 2.0 * params.gamma * t -
           2.0 * params.beta * phi_increment(params.lambda, y0, (t + params.tau) / params.beta);
  };
  const double lw0 = log_energy_weight(params, 0.0);
  std::vector<double> lw(cuts.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) lw[i] = rel(cuts[i]);
  // log W is convex in t, so its maximum on each interval sits at an end.
  const double ref = *std::max_element(lw.begin(), lw.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (std::max(lw[i], lw[i + 1]) - ref < -745.0) continue;
    auto f = [&](double t) {
      const double e = rel(t) - ref;
      if (e < -745.0) return 0.0;
      return std::exp(e) * blocks.sobolev_sq(t, 1.0 - s - alpha * t);
    };
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1],
                                                                          8, 1e-8);
  }
  r.log_lhs = total > 0.0 ? std::log(total) + ref + lw0 : kNegInf;
  r.fitted_M = r.log_lhs == kNegInf ? 0.0 : std::exp(r.log_lhs - r.log_rhs_terms());
  return r;
}

std::vector<double> energy_monotonicity_violations(const Trajectory& traj, double gamma) {
  std::vector<double> bad;
  double prev = kNegInf;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double e = 2.0 * gamma * traj.times[k] + safe_log(inner(traj.states[k], traj.states[k]));
    if (k > 0 && e < prev - 1e-12 * std::max(1.0, std::abs(prev))) bad.push_back(traj.times[k]);
    prev = e;
  }
  return bad;
}

bool StabilityScanResult::pass() const {
  return status == "ok" && monotone && fit && fit->delta > 0.0 && fit->delta < 1.0 &&
         fit->r_squared >= 0.9;
}

namespace {

struct LinearFit {
  double log_M = 0.0;
  double N = 0.0;
  double ss_res = 0.0;
};

// y = log_M - N x by ordinary least squares.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  LinearFit f;
  const double slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  f.N = -slope;
  f.log_M = (sy - slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.log_M - f.N * x[i]);
    f.ss_res += r * r;
  }
  return f;
}

}  // namespace

std::optional<StabilityFit> fit_stability(const std::vector<double>& rho,
                                          const std::vector<double>& sup_norm) {
  if (rho.size() != sup_norm.size()) throw DomainError("fit_stability: size mismatch");
  std::vector<double> L;
  std::vector<double> y;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] > 0.0 && rho[i] < 1.0 && sup_norm[i] > 0.0) {
      L.push_back(-std::log(rho[i]));
      y.push_back(std::log(sup_norm[i]));
    }
  }
  if (L.size() < 4) return std::nullopt;
  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(y.size());
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - mean_y) * (v - mean_y);

  auto residual = [&](double delta) {
    std::vector<double> x(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) x[i] = std::pow(L[i], delta);
    return linear_fit(x, y);
  };
  double best = 1e-3;
  double best_res = residual(best).ss_res;
  for (int i = 2; i <= 3000; ++i) {
    const double d = 1e-3 * i;
    const double r = residual(d).ss_res;
    if (r < best_res) {
      best_res = r;
      best = d;
    }
  }
  // Golden-section refinement inside the bracketing grid cell.
  double lo = std::max(1e-6, best - 1e-3);
  double hi = std::min(3.0, best + 1e-3);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    if (residual(m1).ss_res < residual(m2).ss_res) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double delta = 0.5 * (lo + hi);
  const auto lf = residual(delta);
  StabilityFit fit;
  fit.delta = delta;
  fit.log_M = lf.log_M;
  fit.N = lf.N;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - lf.ss_res / ss_tot : 0.0;
  return fit;
}

namespace {

// One manufactured run per integer datum frequency, reduced to what the
// scan needs: data, initial state and the snapshots inside the two windows.
struct FrequencyRun {
  Field datum;
  Field initial;
  std::vector<Field> early;   // t in [0, sigma_bar]
  std::vector<Field> window;  // t in [5 sigma/8, 7 sigma/8]
};

class FrequencyCache {
 public:
  FrequencyCache(const CoefficientField& a, const Field& shape, const ScanConfig& cfg, double sigma)
      : a_(a), shape_(shape), cfg_(cfg), sigma_(sigma) {}

  const FrequencyRun& get(int k) {
    auto it = runs_.find(k);
    if (it != runs_.end()) return it->second;
    const auto& grid = cfg_.solver.grid;
    const Field carrier = Field::sample(grid, [k](double x) { return std::cos(k * x); });
    Field g = shape_.times(carrier);
    g = g * (cfg_.D / l2_norm(g));
    const Trajectory traj = manufacture_backward(a_, g, cfg_.solver);
    FrequencyRun run{g, traj.initial(), {}, {}};
    const double sbar = sigma_ / 8.0;
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      const double t = traj.times[j];
      if (t <= sbar * (1.0 + 1e-12)) run.early.push_back(traj.states[j]);
      if (t >= 5.0 * sigma_ / 8.0 * (1.0 - 1e-12) && t <= 7.0 * sigma_ / 8.0 * (1.0 + 1e-12)) {
        run.window.push_back(traj.states[j]);
      }
    }
    return runs_.emplace(k, std::move(run)).first->second;
  }

 private:
  const CoefficientField& a_;
  const Field& shape_;
  const ScanConfig& cfg_;
  double sigma_;
  std::map<int, FrequencyRun> runs_;
};

double blend_scale(const FrequencyRun& r0, const FrequencyRun& r1, double theta, double D) {
  return D / l2_norm(r0.datum * (1.0 - theta) + r1.datum * theta);
}

double blend_max(const std::vector<Field>& f0, const std::vector<Field>& f1, double theta,
                 double scale) {
  double m = 0.0;
  for (std::size_t j = 0; j < std::min(f0.size(), f1.size()); ++j) {
    m = std::max(m, scale * l2_norm(f0[j] * (1.0 - theta) + f1[j] * theta));
  }
  return m;
}

StabilityScanResult run_scan(const CoefficientField& a, const Field& datum_shape,
                             const std::vector<double>& scales, const ScanConfig& cfg) {
  cfg.solver.validate();
  if (!(datum_shape.grid() == cfg.solver.grid)) {
    throw DomainError("stability_scan: datum grid differs from solver grid");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0 && scales[i] <= 1.0)) throw DomainError("stability_scan: scales must lie in (0, 1]");
    if (i > 0 && !(scales[i] < scales[i - 1])) {
      throw DomainError("stability_scan: scales must be strictly decreasing");
    }
  }
  StabilityScanResult res;
  const double T = cfg.solver.T;
  res.sigma = (1.0 - cfg.s) * T;
  res.sigma_bar = res.sigma / 8.0;
  res.smallness_threshold =
      smallness_threshold(WeightParams::make(cfg.s, 2.0, 1.0 / T, 1.0));

  FrequencyCache cache(a, datum_shape, cfg, res.sigma);
  const int kmax = cfg.max_frequency > 0 ? cfg.max_frequency : cfg.solver.grid.size() / 4;
  auto rho_of = [&](int k, int k1, double theta) {
    const auto& r0 = cache.get(k);
    const auto& r1 = cache.get(k1);
    const double c = blend_scale(r0, r1, theta, cfg.D);
    return c * sobolev_norm_direct(r0.initial * (1.0 - theta) + r1.initial * theta, -cfg.s);
  };

  int k = 1;
  for (double target : scales) {
    // Advance to the first bracket [k, k+1] whose rho values enclose target.
    while (k < kmax && rho_of(k + 1, k + 1, 0.0) > target) ++k;
    if (k >= kmax) break;
    const double rk = rho_of(k, k, 0.0);
    if (rk < target) continue;  // the scan starts below this scale
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (rho_of(k, k + 1, mid) > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double theta = 0.5 * (lo + hi);
    const auto& r0 = cache.get(k);
    const auto& r1 = cache.get(k + 1);
    const double c = blend_scale(r0, r1, theta, cfg.D);
    ScanPoint pt;
    pt.target = target;
    pt.rho = rho_of(k, k + 1, theta);
    pt.sup_norm = blend_max(r0.early, r1.early, theta, c);
    pt.window_max = blend_max(r0.window, r1.window, theta, c);
    pt.frequency = k + theta;
    res.points.push_back(pt);
  }

  res.monotone = !res.points.empty();
  for (std::size_t i = 1; i < res.points.size(); ++i) {
    if (!(res.points[i].rho < res.points[i - 1].rho) ||
        !(res.points[i].sup_norm < res.points[i - 1].sup_norm)) {
      res.monotone = false;
    }
  }
  std::vector<double> rho;
  std::vector<double> sup;
  for (const auto& pt : res.points) {
    rho.push_back(pt.rho);
    sup.push_back(pt.sup_norm);
  }
  res.fit = fit_stability(rho, sup);
  res.status = res.fit ? "ok" : "insufficient-data";
  if (res.fit) {
    for (auto& pt : res.points) {
      pt.fit_value = res.fit->log_M - res.fit->N * std::pow(-std::log(pt.rho), res.fit->delta);
    }
  }
  return res;
}

}  // namespace

StabilityScanResult stability_scan(const CoefficientField& a, const Field& datum_shape,
                                   const std::vector<double>& scales, const ScanConfig& config) {
  return run_scan(a, datum_shape, scales, config);
}

StabilityScanResult negative_control_scan(const CoefficientField& a, const Field& datum_shape,
                                          const std::vector<double>& scales,
                                          const ScanConfig& config) {
  if (a.tag() != FamilyTag::oscillatory_control) {
    throw DomainError("negative_control_scan: coefficient must be the oscillatory_control family");
  }
  return run_scan(a, datum_shape, scales, config);
}

DiagnosticRow DiagnosticReport::max() const {
  DiagnosticRow m;
  for (const auto& r : rows) {
    m.auxp1 = std::max(m.auxp1, r.auxp1);
    m.auxp1_weighted = std::max(m.auxp1_weighted, r.auxp1_weighted);
    m.comm_pairing = std::max(m.comm_pairing, r.comm_pairing);
    m.comm_square = std::max(m.comm_square, r.comm_square);
    m.comm_weighted = std::max(m.comm_weighted, r.comm_weighted);
    m.transform_residual = std::max(m.transform_residual, r.transform_residual);
  }
  return m;
}

DiagnosticReport proof_diagnostics(const Trajectory& traj, const CoefficientField& a, int m,
                                   double s, const WeightParams& params, double n_param,
                                   int max_rows) {
  if (traj.states.size() < 2) throw DomainError("proof_diagnostics: trajectory needs two states");
  if (max_rows < 1) throw DomainError("proof_diagnostics: max_rows must be >= 1");
  DiagnosticReport rep;
  rep.m = m;
  rep.s = s;
  rep.n_param = n_param;
  const auto& grid = traj.states.front().grid();
  const double t_end = 7.0 * params.sigma / 8.0;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) {
    if (0.5 * (traj.times[j] + traj.times[j + 1]) <= t_end) idx.push_back(j);
  }
  if (idx.empty()) throw DomainError("proof_diagnostics: no snapshot inside [0, 7 sigma/8]");
  std::vector<std::size_t> chosen;
  const std::size_t rows = std::min<std::size_t>(static_cast<std::size_t>(max_rows), idx.size());
  for (std::size_t r = 0; r < rows; ++r) {
    chosen.push_back(idx[rows == 1 ? 0 : r * (idx.size() - 1) / (rows - 1)]);
  }

  const double ln2 = std::numbers::ln2;
  for (std::size_t j : chosen) {
    DiagnosticRow row;
    const double dt = traj.times[j + 1] - traj.times[j];
    row.t = 0.5 * (traj.times[j] + traj.times[j + 1]);
    const Field u = (traj.states[j] + traj.states[j + 1]) * 0.5;
    const Field u_t = (traj.states[j + 1] - traj.states[j]) * (1.0 / dt);
    const double dphi = phi_prime(params.lambda, (row.t + params.tau) / params.beta);
    const Field& w = u;
    const Field w_t = u * (params.gamma - dphi) + u_t;
    const Field coeff = a.at(row.t, grid);
    const double lip = lip_norm(coeff);
    const double at = params.alpha * row.t;

    const auto sides = auxp1_check(coeff, w, w_t, m, s, at, params.alpha, n_param);
    row.auxp1 = sides.required_constant();

    const Field dw = derivative(w, 1);
    const Field rem = remainder(coeff, dw, m);
    double weighted = 0.0;
    double pairing = 0.0;
    double square = 0.0;
    double comm_w = 0.0;
    for (int nu = 0; nu <= grid.k_max(); ++nu) {
      const double scale = std::exp2(-(s + at) * nu);
      const Field w_nu = delta_op(nu, w);
      const Field v_nu = w_nu * scale;
      const Field v_nu_t = (delta_op(nu, w_t) - w_nu * (params.alpha * ln2 * nu)) * scale;
      const Field dv = derivative(v_nu, 1);
      weighted += scale * nu * inner(dv, delta_op(nu, rem));
      const Field comm = commutator(nu, coeff, m, dw);
      pairing += scale * scale * inner(derivative(v_nu_t, 1), comm);
      const double dc = l2_norm(derivative(comm, 1));
      square += scale * scale * dc * dc;
      comm_w += scale * scale * nu * inner(dv, comm);
    }
    const double space = sides.space_term;
    const double time = sides.time_term;
    if (space > 0.0) {
      row.auxp1_weighted = std::max(0.0, weighted / space);
      row.comm_pairing =
          std::max(0.0, (pairing - time / n_param) * (1.0 - s) / (lip * n_param * space));
      row.comm_square = square * (1.0 - s) / (lip * lip * space);
      row.comm_weighted = std::max(0.0, comm_w * (1.0 - s) / (lip * space));
    }

    // Reassembled transformed equation; the exponential factor of w cancels.
    const Field flux = derivative(modified_paraproduct(coeff, dw, m), 1) + derivative(rem, 1);
    const Field resid = w_t - w * params.gamma + w * dphi + flux;
    const double ref = l2_norm(flux);
    row.transform_residual = ref > 0.0 ? l2_norm(resid) / ref : l2_norm(resid);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace lpstab
