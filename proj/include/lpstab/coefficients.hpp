// Scalar coefficients a(t, x) on [0, T] x torus, their regularity constants
// and mollification in time.
//
// Time regularity is measured against the modulus mu(h) = h (1 + |log h|):
//   A_LL = sup |a(t,x) - a(s,x)| / mu(|t - s|).
// Space regularity is the Lipschitz constant in x, A = sup |d/dx a|.
// Outside [0, T] a is extended by its endpoint values.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lpstab/spectral_grid.hpp"

namespace lpstab {

enum class FamilyTag { constant, lip_x, loglip_t, oscillatory_control };

std::string to_string(FamilyTag tag);
FamilyTag family_from_string(const std::string& name);

struct SampleGrid {
  std::vector<double> t;
  std::vector<double> x;

  /// nt equispaced times on [0, T] and nx grid points on [0, 2 pi); `extra_t`
  /// are merged in (sorted, deduplicated).
  static SampleGrid uniform(double horizon, int nt, int nx, std::span<const double> extra_t = {});
};

struct ObservedConstants {
  double kappa = 0.0;     // largest k with k <= a <= 1/k on the samples
  double A_LL = 0.0;      // sampled log-Lipschitz quotient in t
  double A = 0.0;         // sampled Lipschitz quotient in x
  double sup_abs = 0.0;   // sampled sup |a|
};

class CoefficientField {
 public:
  using Evaluator = std::function<double(double t, double x)>;

  /// Validates ellipticity and both declared constants on a default sample
  /// grid; throws DomainError naming the violated invariant.
  CoefficientField(Evaluator evaluator, double kappa, double horizon, double declared_A_LL,
                   double declared_A, FamilyTag tag);

  /// a(t, x), with t clamped to [0, T].
  double operator()(double t, double x) const;

  double kappa() const { return kappa_; }
  double horizon() const { return horizon_; }
  double declared_A_LL() const { return declared_A_LL_; }
  double declared_A() const { return declared_A_; }
  FamilyTag tag() const { return tag_; }

  /// a(t, x_i) on the grid points.
  Field at(double t, const PeriodicGrid& grid) const;
  /// a(t, x_i + h/2), the cell-face values used by the conservative stencil.
  std::vector<double> at_faces(double t, const PeriodicGrid& grid) const;

  /// The same field with time reversed: t -> a(T - t, x).
  CoefficientField time_reversed() const;

 private:
  std::shared_ptr<const Evaluator> eval_;
  double kappa_;
  double horizon_;
  double declared_A_LL_;
  double declared_A_;
  FamilyTag tag_;
};

ObservedConstants estimate_constants(const CoefficientField& a, const SampleGrid& samples);

/// Normalised bump c exp(-1/(1/4 - s^2)) on |s| < 1/2.
class MollifierKernel {
 public:
  MollifierKernel();

  double operator()(double s) const;
  double derivative(double s) const;
  double support_radius() const { return 0.5; }
  double normalization() const { return c_; }
  double l1_norm_of_derivative() const { return l1_derivative_; }

  /// Gauss-Legendre rule on [-1/2, 1/2] with the kernel folded into the
  /// weights: sum_i weight[i] f(node[i]) ~ int rho(r) f(r) dr.
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Same nodes, weights for int rho'(r) f(r) dr.
  const std::vector<double>& derivative_weights() const { return dweights_; }

  /// A kernel with an `order`-point rule (the default uses 64).
  static MollifierKernel with_order(int order);

 private:
  explicit MollifierKernel(int order);

  double c_ = 1.0;
  double l1_derivative_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> dweights_;
};

/// a_eps(t, x) = int rho(r) a(t - eps r, x) dr, eps in (0, 1].
CoefficientField mollify_time(const CoefficientField& a, double eps, const MollifierKernel& kernel);

/// d/dt a_eps(t, x) = (1/eps) int rho'(r) a(t - eps r, x) dr.
double mollified_time_derivative(const CoefficientField& a, double eps,
                                 const MollifierKernel& kernel, double t, double x);

/// Mollification at eps = 2^{-2 nu}, nu <= 26.
CoefficientField a_nu(const CoefficientField& a, int nu, const MollifierKernel& kernel);

/// Sampled sides of the three mollification bounds at one eps.
struct MollificationBounds {
  double eps = 0.0;
  double min_value = 0.0;        // min a_eps, compared with kappa
  double kappa = 0.0;
  double max_error = 0.0;        // sup |a_eps - a|
  double error_bound = 0.0;      // A_LL eps (|log eps| + 1)
  double max_time_derivative = 0.0;
  double derivative_bound = 0.0; // A_LL ||rho'||_1 (|log eps| + 1)

  bool holds() const {
    return min_value >= kappa && max_error <= error_bound && max_time_derivative <= derivative_bound;
  }
};

MollificationBounds check_mollification(const CoefficientField& a, double eps,
                                        const MollifierKernel& kernel, const SampleGrid& samples);

using FamilyParams = std::map<std::string, double>;

/// Built-in families (defaults in brackets):
///   constant             a = c [1]                                   kappa [0.9]
///   lip_x                a = base [1.5] + ax [0.25] sin x            kappa [0.55]
///   loglip_t             a = base + ax sin x + at [0.3] (1 + b [0.5] sin x) m(|t - t0 [0]|)
///                        with m = mu, or m(h) = h when lipschitz_t [0] is 1   kappa [0.45]
///   oscillatory_control  a = base + ax sin x + at sqrt|t - t0| cos(x)       kappa [0.45]
/// Every family takes T [1]. Unknown parameter names are rejected.
CoefficientField builtin_family(FamilyTag tag, const FamilyParams& params = {});

}  // namespace lpstab
