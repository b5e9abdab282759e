// Periodic grid, discrete Fourier transform, spectral derivatives and
// Sobolev norms on the torus [0, 2*pi).
//
// Transform convention (written into every CSV header this library emits):
//   forward  F[xi] = sum_j u_j exp(-i xi x_j)          (plain sum)
//   inverse  u_j   = (1/n) sum_xi F[xi] exp(i xi x_j)
//   Fourier coefficient c_xi = F[xi] / n, so a constant field c has c_0 = c.
//   L2 norm  ||u||^2 = (1/n) sum_j |u_j|^2 = sum_xi |c_xi|^2   (mean-square)
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpstab {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Raised when an argument violates an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform grid on [0, 2*pi) with a power-of-two number of points (>= 16).
class PeriodicGrid {
 public:
  explicit PeriodicGrid(int n_points);

  int size() const { return n_; }
  double length() const;
  double spacing() const;
  double x(int i) const { return spacing() * i; }

  /// Integer frequency held at transform index `index` (FFT ordering):
  /// 0..n/2-1 map to themselves, n/2..n-1 map to -n/2..-1.
  int frequency(int index) const { return index < n_ / 2 ? index : index - n_; }
  int index_of(int xi) const;

  /// Largest resolved dyadic block: log2(n) - 1.
  int k_max() const;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int n_;
};

/// Real field sampled on a periodic grid. Values and spectrum are both
/// computed at construction and never change afterwards.
class Field {
 public:
  Field(PeriodicGrid grid, std::vector<double> values);

  /// Builds the real field whose spectrum is the Hermitian part of `spectrum`.
  static Field from_spectrum(PeriodicGrid grid, Spectrum spectrum);
  static Field zeros(PeriodicGrid grid);
  static Field constant(PeriodicGrid grid, double c);
  static Field sample(PeriodicGrid grid, const std::function<double(double)>& fn);

  const PeriodicGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  std::span<const double> values() const { return values_; }
  const Spectrum& spectrum() const { return spectrum_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

  /// Fourier coefficient c_xi = F[xi] / n.
  Complex coefficient(int xi) const;

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator-() const;
  Field operator*(double s) const;
  friend Field operator*(double s, const Field& f) { return f * s; }

  /// Pointwise product in physical space.
  Field times(const Field& other) const;

 private:
  Field(PeriodicGrid grid, std::vector<double> values, Spectrum spectrum);
  void require_same_grid(const Field& other) const;

  PeriodicGrid grid_;
  std::vector<double> values_;
  Spectrum spectrum_;
};

Spectrum forward_transform(const PeriodicGrid& grid, std::span<const double> values);
std::vector<Complex> inverse_transform(const PeriodicGrid& grid, const Spectrum& spectrum);

inline Spectrum forward_transform(const Field& f) { return f.spectrum(); }

/// Multiplies the spectrum by `symbol(xi)` and returns the real result.
Field apply_multiplier(const Field& f, const std::function<double(int)>& symbol);

/// Spectral derivative of order 0..4; odd orders zero the Nyquist mode.
Field derivative(const Field& f, int order);

/// (sum_xi (1+xi^2)^sigma |c_xi|^2)^(1/2) for sigma in [-2, 2].
double sobolev_norm_direct(const Field& f, double sigma);

double l2_norm(const Field& f);
/// Grid maximum of |f|.
double linf_norm(const Field& f);
/// Mean-square inner product (1/n) sum_j f_j g_j.
double inner(const Field& f, const Field& g);

/// Random real field with Fourier coefficients (g1 + i g2) / (1+|xi|)^decay,
/// restricted to |xi| <= max_frequency (0 means the full band).
Field random_field(const PeriodicGrid& grid, std::mt19937_64& rng, double decay,
                   int max_frequency = 0);

/// Field CSV: header comment, then "index,x,value".
void write_field_csv(std::ostream& os, const Field& f);
/// Spectrum CSV: header comment, then "xi,re,im" with c_xi = F[xi]/n.
void write_spectrum_csv(std::ostream& os, const Field& f);
Field read_field_csv(std::istream& is);

std::string transform_convention();

}  // namespace lpstab
