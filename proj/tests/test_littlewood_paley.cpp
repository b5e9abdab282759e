#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lpstab/littlewood_paley.hpp"

using namespace lpstab;

TEST_CASE("cutoff plateau, support and monotonicity") {
  CHECK(chi(0.0) == 1.0);
  CHECK(chi(1.1) == 1.0);
  CHECK(chi(1.9) == 0.0);
  CHECK(chi(3.0) == 0.0);
  CHECK(chi(-1.5) == chi(1.5));
  const double mid = chi(1.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  double prev = 1.0;
  for (double s = 1.1; s <= 1.9; s += 0.01) {
    CHECK(chi(s) <= prev + 1e-15);
    prev = chi(s);
  }
}

TEST_CASE("block symbols form a partition of unity") {
  for (int xi = 0; xi <= 511; ++xi) {
    double sum = 0.0;
    for (int k = 0; k <= 9; ++k) sum += block_symbol(k, xi);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("block symbols vanish outside their annuli") {
  for (int k = 0; k <= 8; ++k) {
    for (int xi = -400; xi <= 400; ++xi) {
      if (!in_annulus(k, xi)) CHECK(block_symbol(k, xi) == 0.0);
    }
  }
  CHECK(in_annulus(0, 0));
  CHECK_FALSE(in_annulus(3, 0));
  CHECK(in_annulus(4, 16));
  CHECK(in_annulus(4, -16));
}

TEST_CASE("a mode at a power of two lies in exactly one block") {
  const PeriodicGrid g(256);
  const Field f = Field::sample(g, [](double x) { return std::cos(16 * x); });
  const auto dec = decompose(f);
  CHECK(dec.k_max == 7);
  for (int k = 0; k <= dec.k_max; ++k) {
    const double expected = k == 4 ? l2_norm(f) : 0.0;
    CHECK(l2_norm(dec.blocks[static_cast<std::size_t>(k)]) == doctest::Approx(expected).epsilon(1e-13).scale(1.0));
  }
  CHECK(bernstein_ratio(dec.blocks[4], 4) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK_THROWS_AS(bernstein_ratio(Field::zeros(g), 2), DomainError);
}

TEST_CASE("blocks sum back to the field") {
  const PeriodicGrid g(512);
  std::mt19937_64 rng(3);
  const Field f = random_field(g, rng, 0.5);
  const auto dec = decompose(f);
  Field sum = dec.residual;
  for (const auto& b : dec.blocks) sum = sum + b;
  CHECK(linf_norm(sum - f) < 1e-12);
  CHECK(linf_norm(s_op(dec.k_max, f) + dec.residual - f) < 1e-12);
  CHECK(linf_norm(delta_op(5, f) - (s_op(5, f) - s_op(4, f))) < 1e-13);
}

TEST_CASE("dyadic Sobolev norm of a single dyadic mode") {
  const PeriodicGrid g(256);
  const Field f = Field::sample(g, [](double x) { return std::sin(32 * x); });
  for (double sigma : {-1.0, 0.0, 0.5, 1.0}) {
    CHECK(dyadic_sobolev_norm(f, sigma) == doctest::Approx(std::pow(2.0, 5 * sigma) * std::sqrt(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("norm equivalence bounds bracket random ratios") {
  const PeriodicGrid g(256);
  std::mt19937_64 rng(17);
  for (double sigma : {-0.5, 0.0, 0.7}) {
    const auto b = norm_equivalence_bounds(g, sigma);
    CHECK(b.lower > 0.0);
    CHECK(b.lower <= b.upper);
    for (int i = 0; i < 10; ++i) {
      const Field f = random_field(g, rng, 1.0);
      const double r = dyadic_sobolev_norm(f, sigma) / sobolev_norm_direct(f, sigma);
      CHECK(r >= b.lower * (1 - 1e-12));
      CHECK(r <= b.upper * (1 + 1e-12));
    }
  }
  // At sigma = 0 the squared symbols of a partition of unity sum to [1/2, 1].
  const auto b0 = norm_equivalence_bounds(g, 0.0);
  CHECK(b0.upper <= 1.0 + 1e-12);
  CHECK(b0.lower >= std::sqrt(0.5) - 1e-12);
}

TEST_CASE("Lipschitz profile of a smooth field stays bounded") {
  const PeriodicGrid g(256);
  const Field a = Field::sample(g, [](double x) { return std::sin(x) + 0.1 * std::cos(20 * x); });
  const auto p = lip_dyadic_profile(a);
  REQUIRE(p.smoothed_slope.size() == 8);
  for (double v : p.smoothed_slope) CHECK(v <= 3.0 + 1e-9);
  CHECK(p.smoothed_slope.back() == doctest::Approx(linf_norm(derivative(a, 1))).epsilon(1e-9));
}

TEST_CASE("smoothing operator examples") {
  const PeriodicGrid g(128);
  std::mt19937_64 rng(4);
  const Field f = random_field(g, rng, 1.0);
  CHECK(linf_norm(s_op(-1, f)) == 0.0);
  const Field low = Field::sample(g, [](double x) { return 0.3 + std::sin(x) - 0.5 * std::cos(x); });
  CHECK(linf_norm(s_op(0, low) - low) < 1e-14);
  const Field m16 = Field::sample(g, [](double x) { return std::cos(16 * x); });
  CHECK(linf_norm(s_op(3, m16)) < 1e-14);
  const Field c = Field::constant(g, 2.0);
  CHECK(linf_norm(delta_op(0, c) - c) < 1e-14);
  for (int k = 1; k <= 6; ++k) CHECK(linf_norm(delta_op(k, c)) < 1e-14);
  CHECK(chi(2.0) == 0.0);
}

TEST_CASE("a mode at 2^nu only meets blocks nu and nu + 1") {
  const PeriodicGrid g(512);
  for (int nu = 2; nu <= 7; ++nu) {
    const int xi = 1 << nu;
    const Field f = Field::sample(g, [xi](double x) { return std::sin(xi * x); });
    const auto dec = decompose(f);
    for (int k = 0; k <= dec.k_max; ++k) {
      if (k != nu && k != nu + 1) CHECK(linf_norm(dec.blocks[static_cast<std::size_t>(k)]) < 1e-13);
    }
  }
}

TEST_CASE("two separated modes land in their own annuli") {
  const PeriodicGrid g(512);
  const Field f = Field::sample(g, [](double x) { return std::sin(x) + std::sin(100 * x); });
  const auto dec = decompose(f);
  double inside = 0.0;
  for (int k = 0; k <= dec.k_max; ++k) {
    const double e = std::pow(l2_norm(dec.blocks[static_cast<std::size_t>(k)]), 2);
    if (in_annulus(k, 1) || in_annulus(k, 100)) {
      inside += e;
    } else {
      CHECK(e < 1e-26);
    }
  }
  CHECK(inside > 0.5);
  const auto zero = decompose(Field::zeros(g));
  for (const auto& b : zero.blocks) CHECK(linf_norm(b) == 0.0);
  CHECK(dyadic_sobolev_norm(Field::zeros(g), 0.5) == 0.0);
}

TEST_CASE("Bernstein ratios of random blocks and at the annulus edge") {
  const PeriodicGrid g(1024);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto dec = decompose(random_field(g, rng, 0.0));
    for (int nu = 2; nu <= dec.k_max; ++nu) {
      const double r = bernstein_ratio(dec.blocks[static_cast<std::size_t>(nu)], nu);
      CHECK(r >= std::ldexp(1.0, nu - 1));
      CHECK(r <= std::ldexp(1.0, nu + 1));
    }
  }
  for (int nu = 2; nu <= 8; ++nu) {
    const int xi = static_cast<int>(std::ceil(1.1 * std::ldexp(1.0, nu - 1)));
    const Field edge = Field::sample(g, [xi](double x) { return std::cos(xi * x); });
    CHECK(bernstein_ratio(edge, nu) == doctest::Approx(xi).epsilon(1e-12));
    CHECK(xi >= std::ldexp(1.0, nu - 1));
  }
}

TEST_CASE("Lipschitz profile scales with the slope") {
  const PeriodicGrid g(256);
  const auto p1 = lip_dyadic_profile(Field::sample(g, [](double x) { return std::sin(x); }));
  const auto p5 = lip_dyadic_profile(Field::sample(g, [](double x) { return std::sin(5 * x); }));
  const auto pc = lip_dyadic_profile(Field::constant(g, 1.0));
  for (std::size_t k = 1; k < pc.block_decay.size(); ++k) CHECK(pc.block_decay[k] < 1e-12);
  const double s1 = *std::max_element(p1.smoothed_slope.begin(), p1.smoothed_slope.end());
  const double s5 = *std::max_element(p5.smoothed_slope.begin(), p5.smoothed_slope.end());
  CHECK(s5 / s1 == doctest::Approx(5.0).epsilon(1e-9));
  const double b1 = *std::max_element(p1.block_decay.begin(), p1.block_decay.end());
  const double b5 = *std::max_element(p5.block_decay.begin(), p5.block_decay.end());
  CHECK(b5 / b1 >= 2.5);
  CHECK(b5 / b1 <= 10.0);
}
