#include "lpstab/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace lpstab {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p{fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags),
               fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags)};
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Hermitian part: the spectrum of Re(inverse(s)).
void symmetrize(const PeriodicGrid& grid, Spectrum& s) {
  const int n = grid.size();
  Spectrum out(s.size());
  for (int i = 0; i < n; ++i) {
    const int j = (n - i) % n;
    out[static_cast<std::size_t>(i)] =
        0.5 * (s[static_cast<std::size_t>(i)] + std::conj(s[static_cast<std::size_t>(j)]));
  }
  s = std::move(out);
}

}  // namespace

PeriodicGrid::PeriodicGrid(int n_points) : n_(n_points) {
  if (n_points < 16 || !std::has_single_bit(static_cast<unsigned>(n_points))) {
    throw DomainError("PeriodicGrid: n_points must be a power of two >= 16, got " +
                      std::to_string(n_points));
  }
}

double PeriodicGrid::length() const { return 2.0 * std::numbers::pi; }
double PeriodicGrid::spacing() const { return length() / n_; }

int PeriodicGrid::index_of(int xi) const {
  if (xi < -n_ / 2 || xi >= n_ / 2) {
    throw DomainError("PeriodicGrid: frequency " + std::to_string(xi) + " not resolved");
  }
  return xi >= 0 ? xi : xi + n_;
}

int PeriodicGrid::k_max() const { return std::bit_width(static_cast<unsigned>(n_)) - 2; }

Spectrum forward_transform(const PeriodicGrid& grid, std::span<const double> values) {
  const int n = grid.size();
  if (static_cast<int>(values.size()) != n) {
    throw DomainError("forward_transform: value count does not match grid");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("forward_transform: non-finite value at index " + std::to_string(i));
    }
  }
  std::vector<Complex> in(values.begin(), values.end());
  Spectrum out(static_cast<std::size_t>(n));
  fftw_execute_dft(plan_cache().get(n).forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<Complex> inverse_transform(const PeriodicGrid& grid, const Spectrum& spectrum) {
  const int n = grid.size();
  if (static_cast<int>(spectrum.size()) != n) {
    throw DomainError("inverse_transform: spectrum size does not match grid");
  }
  std::vector<Complex> in = spectrum;
  std::vector<Complex> out(static_cast<std::size_t>(n));
  fftw_execute_dft(plan_cache().get(n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / n;
  for (auto& z : out) z *= scale;
  return out;
}

Field::Field(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  spectrum_ = forward_transform(grid_, values_);
}

Field::Field(PeriodicGrid grid, std::vector<double> values, Spectrum spectrum)
    : grid_(grid), values_(std::move(values)), spectrum_(std::move(spectrum)) {}

Field Field::from_spectrum(PeriodicGrid grid, Spectrum spectrum) {
  symmetrize(grid, spectrum);
  const auto z = inverse_transform(grid, spectrum);
  std::vector<double> v(z.size());
  std::transform(z.begin(), z.end(), v.begin(), [](Complex c) { return c.real(); });
  return Field(grid, std::move(v), std::move(spectrum));
}

Field Field::zeros(PeriodicGrid grid) {
  return Field(grid, std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0),
               Spectrum(static_cast<std::size_t>(grid.size())));
}

Field Field::constant(PeriodicGrid grid, double c) {
  return Field(grid, std::vector<double>(static_cast<std::size_t>(grid.size()), c));
}

Field Field::sample(PeriodicGrid grid, const std::function<double(double)>& fn) {
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = fn(grid.x(i));
  return Field(grid, std::move(v));
}

Complex Field::coefficient(int xi) const {
  return spectrum_[static_cast<std::size_t>(grid_.index_of(xi))] / static_cast<double>(size());
}

void Field::require_same_grid(const Field& other) const {
  if (!(grid_ == other.grid_)) throw DomainError("Field: grid mismatch");
}

Field Field::operator+(const Field& other) const {
  require_same_grid(other);
  std::vector<double> v(values_);
  Spectrum s(spectrum_);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += other.values_[i];
    s[i] += other.spectrum_[i];
  }
  return Field(grid_, std::move(v), std::move(s));
}

Field Field::operator-(const Field& other) const { return *this + (-other); }

Field Field::operator-() const { return *this * -1.0; }

Field Field::operator*(double s) const {
  std::vector<double> v(values_);
  Spectrum sp(spectrum_);
  for (auto& x : v) x *= s;
  for (auto& z : sp) z *= s;
  return Field(grid_, std::move(v), std::move(sp));
}

Field Field::times(const Field& other) const {
  require_same_grid(other);
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= other.values_[i];
  return Field(grid_, std::move(v));
}

Field apply_multiplier(const Field& f, const std::function<double(int)>& symbol) {
  const auto& g = f.grid();
  Spectrum s = f.spectrum();
  for (int i = 0; i < g.size(); ++i) s[static_cast<std::size_t>(i)] *= symbol(g.frequency(i));
  return Field::from_spectrum(g, std::move(s));
}

Field derivative(const Field& f, int order) {
  if (order < 0 || order > 4) throw DomainError("derivative: order must be in [0, 4]");
  if (order == 0) return f;
  const auto& g = f.grid();
  const int nyquist = -g.size() / 2;
  Spectrum s = f.spectrum();
  for (int i = 0; i < g.size(); ++i) {
    const int xi = g.frequency(i);
    Complex factor = std::pow(Complex(0.0, static_cast<double>(xi)), order);
    if (xi == nyquist && order % 2 == 1) factor = 0.0;
    s[static_cast<std::size_t>(i)] *= factor;
  }
  return Field::from_spectrum(g, std::move(s));
}

double sobolev_norm_direct(const Field& f, double sigma) {
  if (!(sigma >= -2.0 && sigma <= 2.0)) throw DomainError("sobolev_norm_direct: sigma outside [-2, 2]");
  const auto& g = f.grid();
  const double n = g.size();
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double xi = g.frequency(i);
    acc += std::pow(1.0 + xi * xi, sigma) * std::norm(f.spectrum()[static_cast<std::size_t>(i)] / n);
  }
  return std::sqrt(acc);
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double linf_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double inner(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw DomainError("inner: grid mismatch");
  double acc = 0.0;
  const auto a = f.values();
  const auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc / static_cast<double>(a.size());
}

Field random_field(const PeriodicGrid& grid, std::mt19937_64& rng, double decay, int max_frequency) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = grid.size();
  const int band = max_frequency > 0 ? std::min(max_frequency, n / 2) : n / 2;
  Spectrum s(static_cast<std::size_t>(n));
  for (int xi = 0; xi <= n / 2; ++xi) {
    const double re = normal(rng);
    const double im = normal(rng);
    if (xi > band) continue;
    const double w = std::pow(1.0 + xi, -decay) * n;
    if (xi == 0 || xi == n / 2) {
      s[static_cast<std::size_t>(xi % n)] = w * re;
    } else {
      s[static_cast<std::size_t>(xi)] = w * Complex(re, im);
      s[static_cast<std::size_t>(n - xi)] = w * Complex(re, -im);
    }
  }
  return Field::from_spectrum(grid, std::move(s));
}

std::string transform_convention() {
  return "forward=plain-sum exp(-i xi x); inverse=1/n; coefficient=F/n; "
         "L2=root-mean-square; domain=[0,2pi)";
}

void write_field_csv(std::ostream& os, const Field& f) {
  os << "# " << transform_convention() << "\n";
  os << "index,x,value\n";
  os.precision(17);
  for (int i = 0; i < f.size(); ++i) os << i << ',' << f.grid().x(i) << ',' << f[i] << '\n';
}

void write_spectrum_csv(std::ostream& os, const Field& f) {
  os << "# " << transform_convention() << "\n";
  os << "xi,re,im\n";
  os.precision(17);
  const auto& g = f.grid();
  for (int xi = -g.size() / 2; xi < g.size() / 2; ++xi) {
    const Complex c = f.coefficient(xi);
    os << xi << ',' << c.real() << ',' << c.imag() << '\n';
  }
}

Field read_field_csv(std::istream& is) {
  std::string line;
  std::vector<double> values;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("index", 0) != 0) throw DomainError("read_field_csv: missing header");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string idx, x, v;
    if (!std::getline(row, idx, ',') || !std::getline(row, x, ',') || !std::getline(row, v)) {
      throw DomainError("read_field_csv: malformed row '" + line + "'");
    }
    values.push_back(std::stod(v));
  }
  const PeriodicGrid grid(static_cast<int>(values.size()));
  return Field(grid, std::move(values));
}

}  // namespace lpstab
