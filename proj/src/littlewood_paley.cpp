#include "lpstab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpstab {

namespace {

double bump_h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = bump_h(t);
  const double b = bump_h(1.0 - t);
  return a / (a + b);
}

}  // namespace

double chi(double s) {
  const double r = std::abs(s);
  if (r <= kPlateauEdge) return 1.0;
  if (r >= kSupportEdge) return 0.0;
  return std::clamp(smooth_step((kSupportEdge - r) / (kSupportEdge - kPlateauEdge)), 0.0, 1.0);
}

double smoothing_symbol(int k, int xi) {
  if (k < 0) return 0.0;
  return chi(std::ldexp(std::abs(static_cast<double>(xi)), -k));
}

double block_symbol(int k, int xi) {
  if (k < 0) return 0.0;
  return smoothing_symbol(k, xi) - smoothing_symbol(k - 1, xi);
}

Field s_op(int k, const Field& f) {
  if (k < -1) throw DomainError("s_op: k must be >= -1");
  if (k == -1) return Field::zeros(f.grid());
  return apply_multiplier(f, [k](int xi) { return smoothing_symbol(k, xi); });
}

Field delta_op(int k, const Field& f) {
  if (k < 0) throw DomainError("delta_op: k must be >= 0");
  return apply_multiplier(f, [k](int xi) { return block_symbol(k, xi); });
}

BlockDecomposition decompose(const Field& f) {
  BlockDecomposition d{{}, f.grid().k_max(), Field::zeros(f.grid())};
  d.blocks.reserve(static_cast<std::size_t>(d.k_max + 1));
  for (int k = 0; k <= d.k_max; ++k) d.blocks.push_back(delta_op(k, f));
  d.residual = f - s_op(d.k_max, f);
  return d;
}

bool in_annulus(int k, int xi) {
  const double r = std::abs(static_cast<double>(xi));
  if (k == 0) return r <= kSupportEdge;
  return r >= kPlateauEdge * std::ldexp(1.0, k - 1) && r <= kSupportEdge * std::ldexp(1.0, k);
}

double bernstein_ratio(const Field& block, int nu) {
  if (nu < 1) throw DomainError("bernstein_ratio: nu must be >= 1");
  const double base = l2_norm(block);
  if (base == 0.0) throw DomainError("bernstein_ratio: zero block, ratio undefined");
  return l2_norm(derivative(block, 1)) / base;
}

double dyadic_sobolev_norm(std::span<const double> block_norms, double sigma) {
  double acc = 0.0;
  for (std::size_t k = 0; k < block_norms.size(); ++k) {
    const double term = std::exp2(sigma * static_cast<double>(k)) * block_norms[k];
    acc += term * term;
  }
  return std::sqrt(acc);
}

double dyadic_sobolev_norm(const Field& f, double sigma) {
  if (!(std::abs(sigma) <= 2.0)) throw DomainError("dyadic_sobolev_norm: |sigma| must be <= 2");
  const auto& g = f.grid();
  const int kmax = g.k_max();
  // ||Delta_k f||^2 is diagonal in frequency, so accumulate directly.
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const int xi = g.frequency(i);
    const double c2 = std::norm(f.spectrum()[static_cast<std::size_t>(i)] / static_cast<double>(g.size()));
    if (c2 == 0.0) continue;
    double w = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      const double phi = block_symbol(k, xi);
      if (phi != 0.0) w += std::exp2(2.0 * sigma * k) * phi * phi;
    }
    acc += w * c2;
  }
  return std::sqrt(acc);
}

NormEquivalenceBounds norm_equivalence_bounds(const PeriodicGrid& grid, double sigma) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int xi = 0; xi <= grid.size() / 2; ++xi) {
    double w = 0.0;
    for (int k = 0; k <= grid.k_max(); ++k) {
      const double phi = block_symbol(k, xi);
      w += std::exp2(2.0 * sigma * k) * phi * phi;
    }
    const double m = w / std::pow(1.0 + static_cast<double>(xi) * xi, sigma);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return {std::sqrt(lo), std::sqrt(hi)};
}

LipschitzProfile lip_dyadic_profile(const Field& a) {
  LipschitzProfile p;
  const int kmax = a.grid().k_max();
  for (int k = 0; k <= kmax; ++k) {
    p.block_decay.push_back(std::exp2(k) * linf_norm(delta_op(k, a)));
    p.smoothed_slope.push_back(linf_norm(derivative(s_op(k, a), 1)));
  }
  return p;
}

}  // namespace lpstab
