#include "lpstab/paraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lpstab/littlewood_paley.hpp"

namespace lpstab {

namespace {

// Accumulates pointwise products before a single transform.
class ProductSum {
 public:
  explicit ProductSum(const PeriodicGrid& grid)
      : grid_(grid), acc_(static_cast<std::size_t>(grid.size()), 0.0) {}

  void add(const Field& x, const Field& y) {
    const auto a = x.values();
    const auto b = y.values();
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += a[i] * b[i];
  }

  Field finish() && { return Field(grid_, std::move(acc_)); }

 private:
  PeriodicGrid grid_;
  std::vector<double> acc_;
};

std::vector<Field> smoothings(const Field& f, int up_to) {
  std::vector<Field> out;
  for (int k = 0; k <= up_to; ++k) out.push_back(s_op(k, f));
  return out;
}

std::vector<Field> blocks(const Field& f) {
  std::vector<Field> out;
  for (int k = 0; k <= f.grid().k_max(); ++k) out.push_back(delta_op(k, f));
  return out;
}

void check_m(const PeriodicGrid& grid, int m) {
  if (m < 0 || m > max_modification(grid)) {
    throw DomainError("modified paraproduct: m = " + std::to_string(m) + " outside [0, " +
                      std::to_string(max_modification(grid)) + "]");
  }
}

void check_remainder_m(const PeriodicGrid& grid, int m) {
  if (m < 3) throw DomainError("remainder decomposition requires m >= 3");
  check_m(grid, m);
}

}  // namespace

int max_modification(const PeriodicGrid& grid) { return grid.k_max() - 3; }

Field modified_paraproduct(const Field& a, const Field& u, int m) {
  const auto& g = u.grid();
  check_m(g, m);
  const int kmax = g.k_max();
  const auto sa = smoothings(a, kmax);
  const auto du = blocks(u);
  ProductSum sum(g);
  if (m >= 1) sum.add(sa[static_cast<std::size_t>(m - 1)], s_op(std::min(m + 2, kmax), u));
  for (int k = m + 3; k <= kmax; ++k) {
    sum.add(sa[static_cast<std::size_t>(k - 3)], du[static_cast<std::size_t>(k)]);
  }
  return std::move(sum).finish();
}

Field bony_paraproduct(const Field& a, const Field& u) { return modified_paraproduct(a, u, 0); }

Field modified_paraproduct_adjoint(const Field& a, const Field& w, int m) {
  const auto& g = w.grid();
  check_m(g, m);
  const int kmax = g.k_max();
  const auto sa = smoothings(a, kmax);
  // Each term S_{k-3}a * Delta_k has adjoint Delta_k (S_{k-3}a * .), since
  // the multipliers are real and even.
  Field out = Field::zeros(g);
  if (m >= 1) out = s_op(std::min(m + 2, kmax), sa[static_cast<std::size_t>(m - 1)].times(w));
  for (int k = m + 3; k <= kmax; ++k) {
    out = out + delta_op(k, sa[static_cast<std::size_t>(k - 3)].times(w));
  }
  return out;
}

Field remainder(const Field& a, const Field& u, int m) {
  check_remainder_m(u.grid(), m);
  return a.times(u) - modified_paraproduct(a, u, m);
}

Field omega1(const Field& a, const Field& u, int m) {
  const auto& g = u.grid();
  check_remainder_m(g, m);
  const int kmax = g.k_max();
  ProductSum sum(g);
  for (int k = m; k <= kmax; ++k) {
    if (k - 3 < 0) continue;
    sum.add(delta_op(k, a), s_op(k - 3, u));
  }
  return std::move(sum).finish();
}

Field omega2(const Field& a, const Field& u, int m) {
  const auto& g = u.grid();
  check_remainder_m(g, m);
  const int kmax = g.k_max();
  const auto du = blocks(u);
  ProductSum sum(g);
  for (int k = m; k <= kmax; ++k) {
    const Field dka = delta_op(k, a);
    for (int j = std::max(0, k - 2); j <= std::min(kmax, k + 2); ++j) {
      sum.add(dka, du[static_cast<std::size_t>(j)]);
    }
  }
  return std::move(sum).finish();
}

double positivity_margin(const Field& a, int m, int trials, std::uint64_t rng_seed) {
  if (trials < 1) throw DomainError("positivity_margin: trials must be >= 1");
  std::mt19937_64 rng(rng_seed);
  double margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Field u = random_field(a.grid(), rng, 1.0);
    const double nu = inner(u, u);
    if (nu == 0.0) continue;
    margin = std::min(margin, inner(modified_paraproduct(a, u, m), u) / nu);
  }
  return margin;
}

std::optional<int> find_m0(const Field& a, double kappa, int trials, std::uint64_t rng_seed) {
  for (int m = 0; m <= max_modification(a.grid()); ++m) {
    if (positivity_margin(a, m, trials, rng_seed) >= kappa / 2.0) return m;
  }
  return std::nullopt;
}

double adjoint_defect(const Field& a, int m, const Field& u) {
  const Field du = derivative(u, 1);
  return l2_norm(modified_paraproduct(a, du, m) - modified_paraproduct_adjoint(a, du, m));
}

Field commutator(int nu, const Field& a, int m, const Field& u) {
  if (nu < 0 || nu > u.grid().k_max()) throw DomainError("commutator: nu outside [0, k_max]");
  return delta_op(nu, modified_paraproduct(a, u, m)) - modified_paraproduct(a, delta_op(nu, u), m);
}

Field multiplication_commutator(int nu, const Field& b, const Field& f) {
  return delta_op(nu, b.times(f)) - b.times(delta_op(nu, f));
}

double cm_commutator_ratio(int nu, const Field& b, const Field& w) {
  const double slope = linf_norm(derivative(b, 1));
  if (slope == 0.0) throw DomainError("cm_commutator_ratio: b has zero slope, ratio undefined");
  const double wn = l2_norm(w);
  if (wn == 0.0) throw DomainError("cm_commutator_ratio: w must be nonzero");
  return l2_norm(multiplication_commutator(nu, b, derivative(w, 1))) / (slope * wn);
}

double cm_commutator_operator_ratio(int nu, const Field& b, int iterations) {
  const double slope = linf_norm(derivative(b, 1));
  if (slope == 0.0) throw DomainError("cm_commutator_operator_ratio: b has zero slope");
  // K w = [Delta_nu, b] w'; K^* z = ( Delta_nu(b z) - b Delta_nu z )'.
  auto apply = [&](const Field& w) { return multiplication_commutator(nu, b, derivative(w, 1)); };
  auto apply_adj = [&](const Field& z) { return derivative(multiplication_commutator(nu, b, z), 1); };
  std::mt19937_64 rng(0x5eedULL + static_cast<std::uint64_t>(nu));
  Field w = random_field(b.grid(), rng, 0.0);
  w = w * (1.0 / l2_norm(w));
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Field next = apply_adj(apply(w));
    const double norm = l2_norm(next);
    if (norm == 0.0) return 0.0;
    const double prev = estimate;
    estimate = std::sqrt(norm);
    w = next * (1.0 / norm);
    if (it > 10 && std::abs(estimate - prev) <= 1e-12 * estimate) break;
  }
  return estimate / slope;
}

double lip_norm(const Field& a) { return std::max(linf_norm(a), linf_norm(derivative(a, 1))); }

double AuxP1Sides::required_constant() const {
  if (space_term <= 0.0) return 0.0;
  return std::max(0.0, (lhs - time_term / n_param) / (n_param * space_term));
}

AuxP1Sides auxp1_check(const Field& a, const Field& w, const Field& w_t, int m, double s,
                       double alpha_t, double alpha, double n_param) {
  if (!(n_param > 0.0)) throw DomainError("auxp1_check: N must be positive");
  const auto& g = w.grid();
  const Field rem = remainder(a, derivative(w, 1), m);
  AuxP1Sides out;
  out.n_param = n_param;
  const double ln2 = std::numbers::ln2;
  for (int nu = 0; nu <= g.k_max(); ++nu) {
    const double scale = std::exp2(-(s + alpha_t) * nu);
    const Field w_nu = delta_op(nu, w);
    const Field v_nu = w_nu * scale;
    const Field v_nu_t = (delta_op(nu, w_t) - w_nu * (alpha * ln2 * nu)) * scale;
    out.lhs += scale * inner(derivative(v_nu_t, 1), delta_op(nu, rem));
    out.time_term += inner(v_nu_t, v_nu_t);
    out.space_term += std::exp2(2.0 * nu) * inner(v_nu, v_nu);
  }
  return out;
}

std::pair<double, double> auxp1_check(const Field& a, const Field& w, const Field& w_t, int m,
                                      double s, double alpha_t, double alpha, double n_param,
                                      double c_s) {
  const auto sides = auxp1_check(a, w, w_t, m, s, alpha_t, alpha, n_param);
  return {sides.lhs, sides.rhs(c_s)};
}

}  // namespace lpstab
