// Littlewood-Paley decomposition on the periodic grid.
//
// chi is a fixed smooth even cutoff, equal to 1 on |s| <= 11/10 and to 0 on
// |s| >= 19/10. S_k is the Fourier multiplier chi(2^-k |xi|) (S_{-1} = 0),
// Delta_0 = S_0 and Delta_k = S_k - S_{k-1}.
#pragma once

#include <vector>

#include "lpstab/spectral_grid.hpp"

namespace lpstab {

inline constexpr double kPlateauEdge = 11.0 / 10.0;
inline constexpr double kSupportEdge = 19.0 / 10.0;

/// The cutoff profile, built from the smooth step h(t)/(h(t)+h(1-t)),
/// h(t) = exp(-1/t).
double chi(double s);

/// Symbol of S_k at frequency xi.
double smoothing_symbol(int k, int xi);
/// Symbol of Delta_k at frequency xi.
double block_symbol(int k, int xi);

Field s_op(int k, const Field& f);
Field delta_op(int k, const Field& f);

struct BlockDecomposition {
  std::vector<Field> blocks;  // indexed k = 0..k_max
  int k_max = 0;
  Field residual;             // f - S_{k_max} f
};

BlockDecomposition decompose(const Field& f);

/// Whether frequency xi lies in the closed annulus of block k.
bool in_annulus(int k, int xi);

/// ||d/dx block|| / ||block||; throws DomainError for a zero block.
double bernstein_ratio(const Field& block, int nu);

/// l2 norm of {2^{k sigma} ||Delta_k f||}_k for |sigma| <= 2.
double dyadic_sobolev_norm(const Field& f, double sigma);
/// Same, from precomputed block L2 norms.
double dyadic_sobolev_norm(std::span<const double> block_norms, double sigma);

/// Exact bounds on dyadic/direct Sobolev norm ratios: the squared ratio is a
/// weighted mean of a per-frequency factor, so it is bracketed by that
/// factor's extremes over the resolved band.
struct NormEquivalenceBounds {
  double lower = 0.0;
  double upper = 0.0;
};
NormEquivalenceBounds norm_equivalence_bounds(const PeriodicGrid& grid, double sigma);

struct LipschitzProfile {
  std::vector<double> block_decay;      // 2^k ||Delta_k a||_inf
  std::vector<double> smoothed_slope;   // ||d/dx S_k a||_inf
};

LipschitzProfile lip_dyadic_profile(const Field& a);

}  // namespace lpstab
