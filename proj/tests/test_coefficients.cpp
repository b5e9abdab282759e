#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "lpstab/coefficients.hpp"
#include "lpstab/weights.hpp"

using namespace lpstab;
using std::numbers::pi;

TEST_CASE("family names round trip") {
  for (auto tag : {FamilyTag::constant, FamilyTag::lip_x, FamilyTag::loglip_t, FamilyTag::oscillatory_control}) {
    CHECK(family_from_string(to_string(tag)) == tag);
  }
  CHECK_THROWS(family_from_string("nope"));
}

TEST_CASE("built-in families evaluate their formulas") {
  const auto c = builtin_family(FamilyTag::constant);
  CHECK(c(0.3, 1.0) == doctest::Approx(1.0));
  const auto lx = builtin_family(FamilyTag::lip_x);
  CHECK(lx(0.0, pi / 2) == doctest::Approx(1.75));
  const auto ll = builtin_family(FamilyTag::loglip_t);
  const double t = 0.25;
  CHECK(ll(t, 0.0) == doctest::Approx(1.5 + 0.3 * t * (1.0 + std::abs(std::log(t)))));
  const auto lin = builtin_family(FamilyTag::loglip_t, {{"lipschitz_t", 1.0}});
  CHECK(lin(t, pi / 2) == doctest::Approx(1.75 + 0.3 * 1.5 * t));
}

TEST_CASE("invariants are enforced at construction") {
  CHECK_THROWS_AS(builtin_family(FamilyTag::lip_x, {{"kappa", 0.9}}), DomainError);
  CHECK_THROWS_AS(builtin_family(FamilyTag::constant, {{"c", -1.0}}), DomainError);
  CHECK_THROWS_AS(builtin_family(FamilyTag::lip_x, {{"bogus", 1.0}}), DomainError);
}

TEST_CASE("time is clamped and can be reversed") {
  const auto a = builtin_family(FamilyTag::loglip_t, {{"T", 0.5}});
  CHECK(a(-1.0, 0.4) == a(0.0, 0.4));
  CHECK(a(2.0, 0.4) == a(0.5, 0.4));
  const auto r = a.time_reversed();
  CHECK(r(0.1, 0.4) == doctest::Approx(a(0.4, 0.4)));
  const PeriodicGrid g(32);
  const auto faces = a.at_faces(0.2, g);
  CHECK(faces[3] == doctest::Approx(a(0.2, g.x(3) + g.spacing() / 2)));
}

TEST_CASE("sampled constants of lip_x") {
  const auto a = builtin_family(FamilyTag::lip_x);
  const auto obs = estimate_constants(a, SampleGrid::uniform(1.0, 5, 256));
  CHECK(obs.A == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(obs.A_LL == doctest::Approx(0.0));
  CHECK(obs.sup_abs == doctest::Approx(1.75).epsilon(1e-6));
  CHECK(obs.kappa >= 0.55);
}

TEST_CASE("mollifier kernel normalisation and symmetry") {
  const MollifierKernel k;
  double mass = 0.0, first = 0.0;
  for (std::size_t i = 0; i < k.nodes().size(); ++i) {
    mass += k.weights()[i];
    first += k.weights()[i] * k.nodes()[i];
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(first) < 1e-14);
  CHECK(k(0.5) == 0.0);
  CHECK(k(0.2) == doctest::Approx(k(-0.2)));
  CHECK(k.derivative(0.2) == doctest::Approx(-k.derivative(-0.2)));
  // derivative weights integrate rho' against r: int r rho'(r) dr = -1.
  double dr = 0.0;
  for (std::size_t i = 0; i < k.nodes().size(); ++i) dr += k.derivative_weights()[i] * k.nodes()[i];
  CHECK(dr == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("mollification reproduces functions affine in time") {
  // Away from t0 the Lipschitz variant is affine in t, which a symmetric
  // kernel leaves unchanged.
  const auto a = builtin_family(FamilyTag::loglip_t, {{"lipschitz_t", 1.0}});
  const MollifierKernel k;
  const auto ae = mollify_time(a, 0.1, k);
  for (double x : {0.0, 1.0, 2.5}) {
    CHECK(ae(0.5, x) == doctest::Approx(a(0.5, x)).epsilon(1e-12));
    CHECK(mollified_time_derivative(a, 0.1, k, 0.5, x) == doctest::Approx(0.3 * (1.0 + 0.5 * std::sin(x))).epsilon(1e-10));
  }
}

TEST_CASE("mollification bounds hold for the log-Lipschitz family") {
  const auto a = builtin_family(FamilyTag::loglip_t);
  const MollifierKernel k;
  for (int nu = 0; nu <= 4; ++nu) {
    const double eps = std::pow(2.0, -2 * nu);
    const auto b = check_mollification(a, eps, k, SampleGrid::uniform(1.0, 41, 16));
    CHECK(b.eps == doctest::Approx(eps));
    CHECK(b.holds());
  }
  CHECK_THROWS(a_nu(a, 27, k));
}

TEST_CASE("sampled constants of constant and log-Lipschitz families") {
  const auto c = builtin_family(FamilyTag::constant, {{"c", 1.05}});
  const auto oc = estimate_constants(c, SampleGrid::uniform(1.0, 41, 32));
  CHECK(oc.A_LL == 0.0);
  CHECK(oc.A == 0.0);
  // Against t0 = 0 the quotient is at (1 + b sin x) exactly, maximal at x = pi/2.
  const auto a = builtin_family(FamilyTag::loglip_t);
  const double extra[] = {1e-8, 1e-6, 1e-4};
  const auto ol = estimate_constants(a, SampleGrid::uniform(1.0, 101, 64, extra));
  CHECK(ol.A_LL >= 0.3 * 1.5 * (1 - 1e-9));
  // Differences at t = 1e-8 lose a few ulps of |a| to cancellation.
  const double cancel = 4.0 * std::numeric_limits<double>::epsilon() * ol.sup_abs / modulus_mu(1e-8);
  CHECK(ol.A_LL <= a.declared_A_LL() + cancel);
}

TEST_CASE("mollification leaves time-independent fields unchanged") {
  const MollifierKernel k;
  const auto a = builtin_family(FamilyTag::lip_x);
  const auto m = mollify_time(a, 0.25, k);
  for (double t : {0.0, 0.3, 1.0}) {
    for (double x : {0.0, 1.0, 4.0}) {
      CHECK(m(t, x) == doctest::Approx(a(t, x)).epsilon(1e-13));
      CHECK(std::abs(mollified_time_derivative(a, 0.25, k, t, x)) < 1e-12);
    }
  }
  const auto b = builtin_family(FamilyTag::loglip_t);
  const auto n0 = a_nu(b, 0, k);
  const auto e1 = mollify_time(b, 1.0, k);
  for (double t : {0.1, 0.5, 0.9}) CHECK(n0(t, 0.7) == doctest::Approx(e1(t, 0.7)).epsilon(1e-14));
}
