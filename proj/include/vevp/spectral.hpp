#pragma once

// Fourier calculus on the unit torus T^2 (and T^1 for the 1D lab).
//
// Fields are stored as real values on an M x M collocation grid, x_i = i/M,
// row-major with x as the slow index: value(ix, iy) = data[ix * M + iy].
// Spectral coefficients use the real-to-complex half layout of size
// M x (M/2 + 1) and are normalised so that f(x) = sum_k fhat_k e^{2 pi i k.x}.
// A field is band-limited when every coefficient with |k|_inf > N vanishes.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <numbers>
#include <span>
#include <vector>

#include "vevp/errors.hpp"

namespace vevp {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Axis { X = 0, Y = 1 };

/// 64-byte aligned storage so FFTW can run its SIMD kernels on field data directly.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using RealVector = std::vector<double, AlignedAllocator<double>>;
using ComplexVector = std::vector<Complex, AlignedAllocator<Complex>>;

class SpectralGrid {
 public:
  /// Smallest even M with M >= pad_factor * (2N + 1).
  static SpectralGrid make(int cutoff, double pad_factor = 2.0);
  /// Explicit collocation size; M must be even and at least 2N + 1.
  static SpectralGrid with_size(int cutoff, int size);

  int cutoff() const { return cutoff_; }
  int size() const { return size_; }
  double pad_factor() const { return pad_factor_; }
  double spacing() const { return 1.0 / size_; }
  std::size_t points() const { return static_cast<std::size_t>(size_) * size_; }
  int half_size() const { return size_ / 2 + 1; }
  std::size_t spectral_points() const { return static_cast<std::size_t>(size_) * half_size(); }

  /// Signed wavenumber of a full-axis index (the x axis of the half layout).
  int wavenumber(int index) const { return index <= size_ / 2 ? index : index - size_; }
  /// Grid index of a signed wavenumber, inverse of wavenumber().
  int index_of(int k) const { return k >= 0 ? k : k + size_; }

  /// |k|_inf <= N for the half-layout entry (ix, iy).
  bool retained(int ix, int iy) const {
    const int kx = wavenumber(ix);
    return kx >= -cutoff_ && kx <= cutoff_ && iy <= cutoff_;
  }

  /// Hermitian multiplicity of half-layout column iy (1 on the self-conjugate columns).
  double column_weight(int iy) const { return (iy == 0 || 2 * iy == size_) ? 1.0 : 2.0; }

  double coordinate(int index) const { return static_cast<double>(index) / size_; }

  void forward(std::span<const double> values, std::span<Complex> coeffs) const;
  void backward(std::span<const Complex> coeffs, std::span<double> values) const;

  ComplexVector forward(std::span<const double> values) const;
  RealVector backward(std::span<const Complex> coeffs) const;

  bool same_layout(const SpectralGrid& other) const {
    return cutoff_ == other.cutoff_ && size_ == other.size_;
  }

 private:
  struct Plans;
  SpectralGrid(int cutoff, int size, double pad_factor);

  int cutoff_ = 0;
  int size_ = 0;
  double pad_factor_ = 1.0;
  std::shared_ptr<const Plans> plans_;
};

/// Free-function form of SpectralGrid::make.
SpectralGrid make_grid(int cutoff, double pad_factor = 2.0);

template <std::size_t Components>
class Field {
 public:
  static constexpr std::size_t kComponents = Components;

  explicit Field(SpectralGrid grid) : grid_(std::move(grid)) {
    for (auto& c : data_) c.assign(grid_.points(), 0.0);
  }

  /// Collocation of f(x, y) -> std::array<double, Components> (or double for scalars).
  template <class Fn>
  static Field from_function(const SpectralGrid& grid, Fn&& fn) {
    Field out(grid);
    const int m = grid.size();
    for (int ix = 0; ix < m; ++ix) {
      for (int iy = 0; iy < m; ++iy) {
        const std::size_t p = static_cast<std::size_t>(ix) * m + iy;
        if constexpr (Components == 1) {
          out.data_[0][p] = fn(grid.coordinate(ix), grid.coordinate(iy));
        } else {
          const auto v = fn(grid.coordinate(ix), grid.coordinate(iy));
          for (std::size_t c = 0; c < Components; ++c) out.data_[c][p] = v[c];
        }
      }
    }
    return out;
  }

  const SpectralGrid& grid() const { return grid_; }

  std::span<double> operator[](std::size_t c) & { return data_[c]; }
  std::span<const double> operator[](std::size_t c) const& { return data_[c]; }
  // A span into a temporary would dangle.
  std::span<const double> operator[](std::size_t c) && = delete;

  double& at(std::size_t c, int ix, int iy) {
    return data_[c][static_cast<std::size_t>(ix) * grid_.size() + iy];
  }
  double at(std::size_t c, int ix, int iy) const {
    return data_[c][static_cast<std::size_t>(ix) * grid_.size() + iy];
  }

  Field& operator+=(const Field& o) { return axpy(1.0, o); }
  Field& operator-=(const Field& o) { return axpy(-1.0, o); }
  Field& operator*=(double a) {
    for (auto& c : data_)
      for (double& v : c) v *= a;
    return *this;
  }

  /// this += a * o
  Field& axpy(double a, const Field& o) {
    for (std::size_t c = 0; c < Components; ++c) {
      const auto& src = o.data_[c];
      auto& dst = data_[c];
      for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += a * src[p];
    }
    return *this;
  }

  bool all_finite() const {
    for (const auto& c : data_)
      for (double v : c)
        if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : data_)
      for (double v : c) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const Field& a, const Field& b) {
    return a.grid_.same_layout(b.grid_) && a.data_ == b.data_;
  }
  friend bool operator!=(const Field& a, const Field& b) { return !(a == b); }

 private:
  SpectralGrid grid_;
  std::array<RealVector, Components> data_;
};

template <std::size_t C>
Field<C> operator+(Field<C> a, const Field<C>& b) { return a += b; }
template <std::size_t C>
Field<C> operator-(Field<C> a, const Field<C>& b) { return a -= b; }
template <std::size_t C>
Field<C> operator*(double s, Field<C> a) { return a *= s; }

using ScalarField = Field<1>;
using VectorField = Field<2>;
/// Full 2x2 tensor, components ordered (xx, xy, yx, yy); symmetry is not assumed.
using TensorField = Field<4>;

namespace tensor {
inline constexpr std::size_t xx = 0;
inline constexpr std::size_t xy = 1;
inline constexpr std::size_t yx = 2;
inline constexpr std::size_t yy = 3;
}  // namespace tensor

/// Per-component spectral coefficients.
template <std::size_t C>
using Spectrum = std::array<ComplexVector, C>;

template <std::size_t C>
Spectrum<C> to_spectral(const Field<C>& f) {
  Spectrum<C> out;
  for (std::size_t c = 0; c < C; ++c) out[c] = f.grid().forward(f[c]);
  return out;
}

template <std::size_t C>
Field<C> from_spectral(const SpectralGrid& grid, const Spectrum<C>& s) {
  Field<C> out(grid);
  for (std::size_t c = 0; c < C; ++c) grid.backward(s[c], out[c]);
  return out;
}

/// Zero every coefficient with |k|_inf > n.
void truncate_spectrum(const SpectralGrid& grid, std::span<Complex> coeffs, int n);

/// Largest |fhat_k| over |k|_inf > N relative to the largest overall.
double out_of_band_ratio(const SpectralGrid& grid, std::span<const double> values);

ScalarField partial_derivative(const ScalarField& f, Axis axis);

/// Component i = sum_j d_j sigma_ij.
VectorField divergence_sym_tensor(const TensorField& sigma);
/// Same, returned as truncated spectral coefficients.
Spectrum<2> divergence_spectral(const TensorField& sigma);

template <std::size_t C>
Field<C> galerkin_project(const Field<C>& f, int n) {
  auto s = to_spectral(f);
  for (auto& comp : s) truncate_spectrum(f.grid(), comp, n);
  return from_spectral<C>(f.grid(), s);
}

/// Spectral interpolation onto another grid, keeping modes common to both cutoffs.
template <std::size_t C>
Field<C> resample(const Field<C>& f, const SpectralGrid& target);

/// Fourier multiplier of (I - alpha^2 Laplacian)^{-1}: 1 / (1 + 4 pi^2 alpha^2 |k|^2).
double voigt_multiplier(double alpha, double k_squared);

/// Solves (I - alpha^2 Laplacian) X = f componentwise; output truncated to N.
TensorField voigt_invert(const TensorField& f, double alpha);
/// Forward operator (I - alpha^2 Laplacian) on band-limited fields.
TensorField voigt_apply(const TensorField& f, double alpha);

/// Evaluates map(v_0, v_1, ...) at every collocation point, then truncates to N.
template <class Map, class... Fields>
ScalarField dealiased_product(Map&& map, const ScalarField& first, const Fields&... rest) {
  ScalarField raw(first.grid());
  auto out = raw[0];
  const auto a = first[0];
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double v = map(a[p], rest[0][p]...);
    if (!std::isfinite(v)) throw NumericError("dealiased_product: non-finite pointwise value");
    out[p] = v;
  }
  return galerkin_project(raw, first.grid().cutoff());
}

/// Collocation mean over the unit torus; exact for trigonometric polynomials of degree < M.
double mean_integral(const ScalarField& f);
double mean_integral(std::span<const double> values);

// ---------------------------------------------------------------------------
// One-dimensional torus, used by the ill-posedness lab.

class SpectralGrid1D {
 public:
  static SpectralGrid1D make(int cutoff, double pad_factor = 2.0);

  int cutoff() const { return cutoff_; }
  int size() const { return size_; }
  int half_size() const { return size_ / 2 + 1; }
  double coordinate(int index) const { return static_cast<double>(index) / size_; }

  std::vector<Complex> forward(std::span<const double> values) const;
  std::vector<double> backward(std::span<const Complex> coeffs) const;

 private:
  struct Plans;
  SpectralGrid1D(int cutoff, int size);

  int cutoff_ = 0;
  int size_ = 0;
  std::shared_ptr<const Plans> plans_;
};

struct ScalarField1D {
  explicit ScalarField1D(SpectralGrid1D g) : grid(std::move(g)), values(grid.size(), 0.0) {}

  template <class Fn>
  static ScalarField1D from_function(const SpectralGrid1D& g, Fn&& fn) {
    ScalarField1D out(g);
    for (int i = 0; i < g.size(); ++i) out.values[i] = fn(g.coordinate(i));
    return out;
  }

  SpectralGrid1D grid;
  std::vector<double> values;
};

ScalarField1D derivative_1d(const ScalarField1D& f);
ScalarField1D project_1d(const ScalarField1D& f, int n);
/// (I - alpha^2 d_xx)^{-1}; alpha = 0 reduces to truncation.
ScalarField1D voigt_invert_1d(const ScalarField1D& f, double alpha);

}  // namespace vevp
