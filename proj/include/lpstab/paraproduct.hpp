// Bony's paraproduct, the modified paraproduct T_a^m and the operators built
// on it: remainder pieces, positivity margin, adjoint defect, commutators.
//
//   T_a^m u = S_{m-1}a S_{m+2}u + sum_{k >= m+3} S_{k-3}a Delta_k u
//   a u - T_a^m u = Omega_1 u + Omega_2 u   (m >= 3)
//   Omega_1 u = sum_{k >= m} Delta_k a S_{k-3}u
//   Omega_2 u = sum_{k >= m} sum_{|j-k| <= 2} Delta_k a Delta_j u
//
// Products are pointwise on the grid; sums are truncated at k_max, where
// S_{k_max} is the identity on the resolved band.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lpstab/spectral_grid.hpp"

namespace lpstab {

struct ParaproductConfig {
  int m = 3;
  PeriodicGrid grid{256};
};

/// Largest admissible modification parameter on `grid`: k_max - 3.
int max_modification(const PeriodicGrid& grid);

Field bony_paraproduct(const Field& a, const Field& u);
Field modified_paraproduct(const Field& a, const Field& u, int m);

/// Discrete adjoint of u -> T_a^m u in the mean-square inner product.
Field modified_paraproduct_adjoint(const Field& a, const Field& w, int m);

/// a*u - T_a^m u.
Field remainder(const Field& a, const Field& u, int m);
Field omega1(const Field& a, const Field& u, int m);
Field omega2(const Field& a, const Field& u, int m);

/// min over `trials` random u of <T_a^m u, u> / ||u||^2.
double positivity_margin(const Field& a, int m, int trials, std::uint64_t rng_seed);

/// Smallest m <= k_max - 3 whose margin is at least kappa/2, if any.
std::optional<int> find_m0(const Field& a, double kappa, int trials, std::uint64_t rng_seed);

/// ||(T_a^m - (T_a^m)^*) d/dx u||.
double adjoint_defect(const Field& a, int m, const Field& u);

/// Delta_nu(T_a^m u) - T_a^m(Delta_nu u).
Field commutator(int nu, const Field& a, int m, const Field& u);

/// [Delta_nu, b] f = Delta_nu(b f) - b Delta_nu f.
Field multiplication_commutator(int nu, const Field& b, const Field& f);

/// ||[Delta_nu, b] d/dx w|| / (||b'||_inf ||w||). Rejects b with zero slope.
double cm_commutator_ratio(int nu, const Field& b, const Field& w);

/// Operator norm of w -> [Delta_nu, b] d/dx w divided by ||b'||_inf,
/// estimated by power iteration (worst case over w).
double cm_commutator_operator_ratio(int nu, const Field& b, int iterations = 200);

/// max(||a||_inf, ||a'||_inf), the grid version of the Lipschitz norm.
double lip_norm(const Field& a);

/// Both sides of the block-summed remainder inequality
///   sum_nu 2^{-(s+at)nu} <d/dx dt v_nu, Delta_nu((a - T_a^m) d/dx w)>
///     <= (1/N) sum ||dt v_nu||^2 + C N sum 2^{2nu} ||v_nu||^2,
/// with v_nu = 2^{-(s+at)nu} Delta_nu w.
struct AuxP1Sides {
  double lhs = 0.0;
  double time_term = 0.0;   // sum_nu ||dt v_nu||^2
  double space_term = 0.0;  // sum_nu 2^{2nu} ||v_nu||^2
  double n_param = 1.0;

  double rhs(double c_s) const { return time_term / n_param + c_s * n_param * space_term; }
  /// Smallest C making lhs <= rhs(C).
  double required_constant() const;
};

AuxP1Sides auxp1_check(const Field& a, const Field& w, const Field& w_t, int m, double s,
                       double alpha_t, double alpha, double n_param);

/// Returns (lhs, rhs) for a fixed constant c_s.
std::pair<double, double> auxp1_check(const Field& a, const Field& w, const Field& w_t, int m,
                                      double s, double alpha_t, double alpha, double n_param,
                                      double c_s);

}  // namespace lpstab
