#include "lpstab/coefficients.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "lpstab/weights.hpp"

namespace lpstab {

std::string to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::constant: return "constant";
    case FamilyTag::lip_x: return "lip_x";
    case FamilyTag::loglip_t: return "loglip_t";
    case FamilyTag::oscillatory_control: return "oscillatory_control";
  }
  return "unknown";
}

FamilyTag family_from_string(const std::string& name) {
  for (auto tag : {FamilyTag::constant, FamilyTag::lip_x, FamilyTag::loglip_t,
                   FamilyTag::oscillatory_control}) {
    if (to_string(tag) == name) return tag;
  }
  throw DomainError("unknown coefficient family '" + name +
                    "' (expected constant, lip_x, loglip_t or oscillatory_control)");
}

SampleGrid SampleGrid::uniform(double horizon, int nt, int nx, std::span<const double> extra_t) {
  if (nt < 2 || nx < 1) throw DomainError("SampleGrid: need nt >= 2 and nx >= 1");
  std::set<double> ts;
  for (int i = 0; i < nt; ++i) ts.insert(horizon * i / (nt - 1));
  for (double t : extra_t) {
    if (t >= 0.0 && t <= horizon) ts.insert(t);
  }
  SampleGrid g;
  g.t.assign(ts.begin(), ts.end());
  for (int j = 0; j < nx; ++j) g.x.push_back(2.0 * std::numbers::pi * j / nx);
  return g;
}

namespace {

double periodic_distance(double x, double y) {
  const double d = std::fmod(std::abs(x - y), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

constexpr double kDeclaredSlack = 1.0 + 1e-6;

void validate_field(const CoefficientField& a) {
  if (!(a.kappa() > 0.0 && a.kappa() < 1.0)) {
    throw DomainError("coefficient: ellipticity constant kappa must lie in (0, 1), got " +
                      std::to_string(a.kappa()));
  }
  if (!(a.horizon() > 0.0)) throw DomainError("coefficient: horizon T must be positive");
  const auto samples = SampleGrid::uniform(a.horizon(), 33, 32);
  const auto obs = estimate_constants(a, samples);
  if (obs.kappa < a.kappa()) {
    std::ostringstream msg;
    msg << "coefficient violates ellipticity kappa <= a <= 1/kappa: kappa = " << a.kappa()
        << " but sampled range allows only " << obs.kappa;
    throw DomainError(msg.str());
  }
  if (obs.A > a.declared_A() * kDeclaredSlack) {
    throw DomainError("coefficient: sampled Lipschitz-in-x quotient " + std::to_string(obs.A) +
                      " exceeds declared A = " + std::to_string(a.declared_A()));
  }
  if (std::isfinite(a.declared_A_LL()) && obs.A_LL > a.declared_A_LL() * kDeclaredSlack) {
    throw DomainError("coefficient: sampled log-Lipschitz-in-t quotient " +
                      std::to_string(obs.A_LL) + " exceeds declared A_LL = " +
                      std::to_string(a.declared_A_LL()));
  }
}

}  // namespace

CoefficientField::CoefficientField(Evaluator evaluator, double kappa, double horizon,
                                   double declared_A_LL, double declared_A, FamilyTag tag)
    : eval_(std::make_shared<const Evaluator>(std::move(evaluator))),
      kappa_(kappa),
      horizon_(horizon),
      declared_A_LL_(declared_A_LL),
      declared_A_(declared_A),
      tag_(tag) {
  validate_field(*this);
}

double CoefficientField::operator()(double t, double x) const {
  return (*eval_)(std::clamp(t, 0.0, horizon_), x);
}

Field CoefficientField::at(double t, const PeriodicGrid& grid) const {
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = (*this)(t, grid.x(i));
  return Field(grid, std::move(v));
}

std::vector<double> CoefficientField::at_faces(double t, const PeriodicGrid& grid) const {
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  const double h = grid.spacing();
  for (int i = 0; i < grid.size(); ++i) {
    v[static_cast<std::size_t>(i)] = (*this)(t, grid.x(i) + 0.5 * h);
  }
  return v;
}

CoefficientField CoefficientField::time_reversed() const {
  auto inner = eval_;
  const double T = horizon_;
  return CoefficientField([inner, T](double t, double x) { return (*inner)(T - t, x); }, kappa_,
                          horizon_, declared_A_LL_, declared_A_, tag_);
}

ObservedConstants estimate_constants(const CoefficientField& a, const SampleGrid& samples) {
  if (samples.t.empty() || samples.x.empty()) {
    throw DomainError("estimate_constants: sample grids must be nonempty");
  }
  const std::size_t nt = samples.t.size();
  const std::size_t nx = samples.x.size();
  std::vector<double> v(nt * nx);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nx; ++j) v[i * nx + j] = a(samples.t[i], samples.x[j]);
  }
  ObservedConstants obs;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double value : v) {
    lo = std::min(lo, value);
    hi = std::max(hi, value);
    obs.sup_abs = std::max(obs.sup_abs, std::abs(value));
  }
  obs.kappa = lo > 0.0 ? std::min(lo, 1.0 / hi) : lo;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = i + 1; k < nt; ++k) {
      const double dt = std::abs(samples.t[k] - samples.t[i]);
      if (dt == 0.0) continue;
      const double mu = modulus_mu(dt);
      for (std::size_t j = 0; j < nx; ++j) {
        obs.A_LL = std::max(obs.A_LL, std::abs(v[k * nx + j] - v[i * nx + j]) / mu);
      }
    }
  }
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      for (std::size_t k = j + 1; k < nx; ++k) {
        const double dx = periodic_distance(samples.x[j], samples.x[k]);
        if (dx == 0.0) continue;
        obs.A = std::max(obs.A, std::abs(v[i * nx + k] - v[i * nx + j]) / dx);
      }
    }
  }
  return obs;
}

namespace {

double bump(double s) {
  const double q = 0.25 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_derivative(double s) {
  const double q = 0.25 - s * s;
  return q > 0.0 ? -2.0 * s / (q * q) * std::exp(-1.0 / q) : 0.0;
}

}  // namespace

MollifierKernel::MollifierKernel() : MollifierKernel(64) {}

MollifierKernel MollifierKernel::with_order(int order) { return MollifierKernel(order); }

MollifierKernel::MollifierKernel(int order) {
  if (order < 2) throw DomainError("MollifierKernel: quadrature order must be >= 2");
  using boost::math::quadrature::gauss_kronrod;
  const double mass = gauss_kronrod<double, 61>::integrate(bump, -0.5, 0.5, 15, 1e-15);
  c_ = 1.0 / mass;
  l1_derivative_ = c_ * gauss_kronrod<double, 61>::integrate(
                            [](double s) { return std::abs(bump_derivative(s)); }, -0.5, 0.5, 15,
                            1e-15);

  // Gauss-Legendre nodes on [-1, 1] mapped to [-1/2, 1/2].
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  std::vector<std::pair<double, double>> rule;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(order, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.emplace_back(z, w);
    if (z != 0.0) rule.emplace_back(-z, w);
  }
  std::sort(rule.begin(), rule.end());
  for (const auto& [z, w] : rule) {
    const double r = 0.5 * z;
    nodes_.push_back(r);
    weights_.push_back(0.5 * w * (*this)(r));
    dweights_.push_back(0.5 * w * derivative(r));
  }
}

double MollifierKernel::operator()(double s) const { return c_ * bump(s); }

double MollifierKernel::derivative(double s) const { return c_ * bump_derivative(s); }

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("mollify_time: eps must lie in (0, 1]");
}

}  // namespace

CoefficientField mollify_time(const CoefficientField& a, double eps, const MollifierKernel& kernel) {
  check_eps(eps);
  auto nodes = std::make_shared<const std::vector<double>>(kernel.nodes());
  auto weights = std::make_shared<const std::vector<double>>(kernel.weights());
  auto eval = [a, eps, nodes, weights](double t, double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes->size(); ++i) acc += (*weights)[i] * a(t - eps * (*nodes)[i], x);
    return acc;
  };
  return CoefficientField(eval, a.kappa(), a.horizon(), a.declared_A_LL(), a.declared_A(), a.tag());
}

double mollified_time_derivative(const CoefficientField& a, double eps,
                                 const MollifierKernel& kernel, double t, double x) {
  check_eps(eps);
  const auto& nodes = kernel.nodes();
  const auto& dw = kernel.derivative_weights();
  // Subtracting a(t) is exact (int rho' = 0) and removes cancellation.
  const double centre = a(t, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += dw[i] * (a(t - eps * nodes[i], x) - centre);
  return acc / eps;
}

CoefficientField a_nu(const CoefficientField& a, int nu, const MollifierKernel& kernel) {
  if (nu < 0 || nu > 26) throw DomainError("a_nu: nu must lie in [0, 26]");
  return mollify_time(a, std::ldexp(1.0, -2 * nu), kernel);
}

MollificationBounds check_mollification(const CoefficientField& a, double eps,
                                        const MollifierKernel& kernel, const SampleGrid& samples) {
  const CoefficientField smooth = mollify_time(a, eps, kernel);
  MollificationBounds b;
  b.eps = eps;
  b.kappa = a.kappa();
  b.min_value = std::numeric_limits<double>::infinity();
  const double log_factor = std::abs(std::log(eps)) + 1.0;
  b.error_bound = a.declared_A_LL() * eps * log_factor;
  b.derivative_bound = a.declared_A_LL() * kernel.l1_norm_of_derivative() * log_factor;
  for (double t : samples.t) {
    for (double x : samples.x) {
      const double v = smooth(t, x);
      b.min_value = std::min(b.min_value, v);
      b.max_error = std::max(b.max_error, std::abs(v - a(t, x)));
      b.max_time_derivative =
          std::max(b.max_time_derivative, std::abs(mollified_time_derivative(a, eps, kernel, t, x)));
    }
  }
  return b;
}

namespace {

double take(FamilyParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  const double v = it->second;
  p.erase(it);
  return v;
}

}  // namespace

CoefficientField builtin_family(FamilyTag tag, const FamilyParams& params) {
  FamilyParams p = params;
  const double T = take(p, "T", 1.0);
  CoefficientField::Evaluator eval;
  double kappa = 0.0;
  double A_LL = 0.0;
  double A = 0.0;
  switch (tag) {
    case FamilyTag::constant: {
      const double c = take(p, "c", 1.0);
      kappa = take(p, "kappa", 0.9);
      eval = [c](double, double) { return c; };
      break;
    }
    case FamilyTag::lip_x: {
      const double base = take(p, "base", 1.5);
      const double ax = take(p, "ax", 0.25);
      kappa = take(p, "kappa", 0.55);
      A = std::abs(ax);
      eval = [base, ax](double, double x) { return base + ax * std::sin(x); };
      break;
    }
    case FamilyTag::loglip_t: {
      const double base = take(p, "base", 1.5);
      const double ax = take(p, "ax", 0.25);
      const double at = take(p, "at", 0.3);
      const double b = take(p, "b", 0.5);
      const double t0 = take(p, "t0", 0.0);
      const bool lipschitz = take(p, "lipschitz_t", 0.0) != 0.0;
      kappa = take(p, "kappa", 0.45);
      if (!(t0 >= 0.0 && t0 <= T)) throw DomainError("loglip_t: t0 must lie in [0, T]");
      if (!(T <= 1.0)) throw DomainError("loglip_t: T must be <= 1 (the modulus is concave there)");
      A_LL = std::abs(at) * (1.0 + std::abs(b));
      // Space slope: |ax| + |at b| m(max |t - t0|).
      const double hmax = std::max(t0, T - t0);
      const double mmax = hmax > 0.0 ? (lipschitz ? hmax : modulus_mu(hmax)) : 0.0;
      A = std::abs(ax) + std::abs(at * b) * mmax;
      eval = [=](double t, double x) {
        const double h = std::abs(t - t0);
        const double m = h > 0.0 ? (lipschitz ? h : modulus_mu(h)) : 0.0;
        return base + ax * std::sin(x) + at * (1.0 + b * std::sin(x)) * m;
      };
      break;
    }
    case FamilyTag::oscillatory_control: {
      const double base = take(p, "base", 1.5);
      const double ax = take(p, "ax", 0.25);
      const double at = take(p, "at", 0.3);
      const double t0 = take(p, "t0", 0.0);
      kappa = take(p, "kappa", 0.45);
      A_LL = std::numeric_limits<double>::infinity();
      A = std::abs(ax) + std::abs(at) * std::sqrt(std::max(t0, T - t0));
      eval = [=](double t, double x) {
        return base + ax * std::sin(x) + at * std::sqrt(std::abs(t - t0)) * std::cos(x);
      };
      break;
    }
  }
  if (!p.empty()) {
    throw DomainError("coefficient family " + to_string(tag) + ": unknown parameter '" +
                      p.begin()->first + "'");
  }
  return CoefficientField(std::move(eval), kappa, T, A_LL, A, tag);
}

}  // namespace lpstab
