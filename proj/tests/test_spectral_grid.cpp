#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lpstab/spectral_grid.hpp"

using namespace lpstab;
using std::numbers::pi;

TEST_CASE("grid sizes must be powers of two of at least 16") {
  CHECK_THROWS_AS(PeriodicGrid(8), DomainError);
  CHECK_THROWS_AS(PeriodicGrid(48), DomainError);
  CHECK_NOTHROW(PeriodicGrid(16));
  CHECK(PeriodicGrid(256).k_max() == 7);
  CHECK(PeriodicGrid(1024).k_max() == 9);
  CHECK(PeriodicGrid(64).spacing() == doctest::Approx(2.0 * pi / 64.0));
}

TEST_CASE("frequency and index are inverse in FFT ordering") {
  const PeriodicGrid g(32);
  CHECK(g.frequency(0) == 0);
  CHECK(g.frequency(15) == 15);
  CHECK(g.frequency(16) == -16);
  CHECK(g.frequency(31) == -1);
  for (int i = 0; i < 32; ++i) CHECK(g.index_of(g.frequency(i)) == i);
  CHECK_THROWS(g.index_of(16));
}

TEST_CASE("coefficients of trigonometric polynomials") {
  const PeriodicGrid g(64);
  const Field c = Field::constant(g, 2.5);
  CHECK(std::abs(c.coefficient(0) - Complex(2.5, 0.0)) < 1e-14);

  const Field f = Field::sample(g, [](double x) { return std::cos(3 * x) + 2.0 * std::sin(5 * x); });
  CHECK(std::abs(f.coefficient(3) - Complex(0.5, 0.0)) < 1e-14);
  CHECK(std::abs(f.coefficient(-3) - Complex(0.5, 0.0)) < 1e-14);
  CHECK(std::abs(f.coefficient(5) - Complex(0.0, -1.0)) < 1e-14);
  CHECK(std::abs(f.coefficient(-5) - Complex(0.0, 1.0)) < 1e-14);
  CHECK(std::abs(f.coefficient(4)) < 1e-14);
}

TEST_CASE("mean-square norms and inner products") {
  const PeriodicGrid g(128);
  const Field s = Field::sample(g, [](double x) { return std::sin(x); });
  const Field c = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(l2_norm(s) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(inner(s, s) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(inner(s, c)) < 1e-15);
  CHECK(linf_norm(3.0 * c) == doctest::Approx(3.0));
}

TEST_CASE("spectral derivatives of pure modes") {
  const PeriodicGrid g(64);
  const Field f = Field::sample(g, [](double x) { return std::sin(5 * x); });
  const Field d1 = derivative(f, 1);
  const Field d2 = derivative(f, 2);
  for (int i = 0; i < 64; ++i) {
    CHECK(d1[i] == doctest::Approx(5.0 * std::cos(5 * g.x(i))).epsilon(1e-12).scale(1.0));
    CHECK(d2[i] == doctest::Approx(-25.0 * std::sin(5 * g.x(i))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("odd derivatives remove the Nyquist mode") {
  const PeriodicGrid g(32);
  const Field f = Field::sample(g, [](double x) { return std::cos(16 * x); });
  CHECK(linf_norm(derivative(f, 1)) < 1e-12);
  CHECK(linf_norm(derivative(f, 2) + 256.0 * f) < 1e-9);
}

TEST_CASE("direct Sobolev norm of a single mode") {
  const PeriodicGrid g(64);
  const Field f = Field::sample(g, [](double x) { return std::cos(3 * x); });
  for (double sigma : {-1.0, -0.5, 0.0, 0.7, 1.5}) {
    const double expected = std::sqrt(0.5 * std::pow(10.0, sigma));
    CHECK(sobolev_norm_direct(f, sigma) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("random fields respect the requested band") {
  const PeriodicGrid g(128);
  std::mt19937_64 rng(11);
  const Field f = random_field(g, rng, 1.0, 10);
  for (int i = 0; i < 128; ++i) {
    if (std::abs(g.frequency(i)) > 10) CHECK(std::abs(f.spectrum()[static_cast<std::size_t>(i)]) < 1e-12);
  }
  CHECK(l2_norm(f) > 0.0);
  std::mt19937_64 a(5), b(5);
  const Field fa = random_field(g, a, 0.5);
  const Field fb = random_field(g, b, 0.5);
  CHECK(linf_norm(fa - fb) == 0.0);
}

TEST_CASE("field CSV round trip carries the transform convention") {
  const PeriodicGrid g(16);
  const Field f = Field::sample(g, [](double x) { return std::exp(std::sin(x)); });
  std::stringstream ss;
  write_field_csv(ss, f);
  CHECK(ss.str().find(transform_convention()) != std::string::npos);
  const Field back = read_field_csv(ss);
  CHECK(back.size() == 16);
  CHECK(linf_norm(back - f) < 1e-15);
}

TEST_CASE("arithmetic rejects mismatched grids") {
  const Field a = Field::zeros(PeriodicGrid(16));
  const Field b = Field::zeros(PeriodicGrid(32));
  CHECK_THROWS(a + b);
  CHECK_THROWS(a.times(b));
}

TEST_CASE("transform round trip and Hermitian symmetry") {
  const PeriodicGrid g(256);
  std::mt19937_64 rng(21);
  const Field f = random_field(g, rng, 0.5);
  const auto back = inverse_transform(g, forward_transform(g, f.values()));
  double err = 0.0;
  for (int i = 0; i < 256; ++i) err = std::max(err, std::abs(back[static_cast<std::size_t>(i)] - f[i]));
  CHECK(err <= 1e-12 * linf_norm(f));
  for (int xi = 1; xi < 128; ++xi) CHECK(std::abs(f.coefficient(-xi) - std::conj(f.coefficient(xi))) < 1e-14);
  const Field c = Field::constant(g, -0.75);
  for (int xi = 1; xi < 128; ++xi) CHECK(std::abs(c.coefficient(xi)) < 1e-15);
}

TEST_CASE("derivative examples") {
  const PeriodicGrid g(128);
  const Field s = Field::sample(g, [](double x) { return std::sin(x); });
  const Field c = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(linf_norm(derivative(s, 1) - c) < 1e-10);
  CHECK(linf_norm(derivative(Field::constant(g, 3.0), 1)) < 1e-14);
  // Band-limited field: centred second differences agree to O(h^2).
  std::mt19937_64 rng(22);
  const Field f = random_field(g, rng, 1.0, 6);
  const double h = g.spacing();
  const Field d2 = derivative(f, 2);
  double err = 0.0;
  for (int i = 0; i < 128; ++i) {
    const double fd = (f[(i + 1) % 128] - 2 * f[i] + f[(i + 127) % 128]) / (h * h);
    err = std::max(err, std::abs(fd - d2[i]));
  }
  CHECK(err <= h * h / 12.0 * linf_norm(derivative(f, 4)) * 1.01);
}

TEST_CASE("Sobolev norm examples") {
  const PeriodicGrid g(64);
  CHECK(sobolev_norm_direct(Field::constant(g, -2.0), 1.3) == doctest::Approx(2.0));
  // cos(8x) has coefficients 1/2 at +-8, each weighted by (1 + 64)^(1/2).
  const Field f = Field::sample(g, [](double x) { return std::cos(8 * x); });
  CHECK(sobolev_norm_direct(f, 1.0) == doctest::Approx(std::sqrt(65.0) * std::sqrt(2 * 0.25)).epsilon(1e-13));
  std::mt19937_64 rng(23);
  const Field r = random_field(g, rng, 0.0);
  CHECK(sobolev_norm_direct(r, 0.0) == doctest::Approx(l2_norm(r)).epsilon(1e-12));
}
