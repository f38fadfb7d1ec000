#include "vevp/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <string>

namespace vevp {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// ESTIMATE planning is deterministic, so every grid of a given size gets the
// same plan and results are reproducible bit for bit. 2D plans assume 64-byte
// aligned arrays (see AlignedAllocator); misaligned callers go through scratch.
constexpr unsigned kPlanFlags = FFTW_ESTIMATE;
constexpr unsigned kPlanFlags1D = FFTW_ESTIMATE | FFTW_UNALIGNED;

bool aligned(const void* p) { return reinterpret_cast<std::uintptr_t>(p) % 64 == 0; }

int smallest_even_at_least(double x) {
  int m = static_cast<int>(std::ceil(x - 1e-12));
  if (m % 2 != 0) ++m;
  return m;
}

}  // namespace

struct SpectralGrid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit Plans(int m) {
    std::lock_guard lock(planner_mutex());
    const std::size_t n = static_cast<std::size_t>(m) * m;
    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(static_cast<std::size_t>(m) * (m / 2 + 1));
    r2c = fftw_plan_dft_r2c_2d(m, m, real, cplx, kPlanFlags | FFTW_PRESERVE_INPUT);
    c2r = fftw_plan_dft_c2r_2d(m, m, cplx, real, kPlanFlags | FFTW_DESTROY_INPUT);
    fftw_free(real);
    fftw_free(cplx);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralGrid::SpectralGrid(int cutoff, int size, double pad_factor)
    : cutoff_(cutoff), size_(size), pad_factor_(pad_factor), plans_(std::make_shared<Plans>(size)) {}

SpectralGrid SpectralGrid::make(int cutoff, double pad_factor) {
  if (cutoff < 1) throw InvalidArgument("make_grid: cutoff N must be >= 1, got " + std::to_string(cutoff));
  if (!(pad_factor >= 1.0)) throw InvalidArgument("make_grid: pad_factor must be >= 1");
  const int m = smallest_even_at_least(pad_factor * (2 * cutoff + 1));
  return SpectralGrid(cutoff, m, pad_factor);
}

SpectralGrid SpectralGrid::with_size(int cutoff, int size) {
  if (cutoff < 1) throw InvalidArgument("grid: cutoff N must be >= 1");
  if (size % 2 != 0 || size < 2 * cutoff + 1)
    throw InvalidArgument("grid: size M must be even and >= 2N+1, got M=" + std::to_string(size));
  return SpectralGrid(cutoff, size, static_cast<double>(size) / (2 * cutoff + 1));
}

SpectralGrid make_grid(int cutoff, double pad_factor) { return SpectralGrid::make(cutoff, pad_factor); }

void SpectralGrid::forward(std::span<const double> values, std::span<Complex> coeffs) const {
  if (values.size() != points() || coeffs.size() != spectral_points())
    throw InvalidArgument("SpectralGrid::forward: size mismatch");
  if (aligned(values.data()) && aligned(coeffs.data())) {
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(values.data()),
                         reinterpret_cast<fftw_complex*>(coeffs.data()));
  } else {
    RealVector in(values.begin(), values.end());
    ComplexVector out(spectral_points());
    fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    std::copy(out.begin(), out.end(), coeffs.begin());
  }
  const double scale = 1.0 / static_cast<double>(points());
  for (auto& c : coeffs) c *= scale;
}

void SpectralGrid::backward(std::span<const Complex> coeffs, std::span<double> values) const {
  if (values.size() != points() || coeffs.size() != spectral_points())
    throw InvalidArgument("SpectralGrid::backward: size mismatch");
  // c2r overwrites its input.
  ComplexVector scratch(coeffs.begin(), coeffs.end());
  if (aligned(values.data())) {
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), values.data());
  } else {
    RealVector out(points());
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    std::copy(out.begin(), out.end(), values.begin());
  }
}

ComplexVector SpectralGrid::forward(std::span<const double> values) const {
  ComplexVector out(spectral_points());
  forward(values, out);
  return out;
}

RealVector SpectralGrid::backward(std::span<const Complex> coeffs) const {
  RealVector out(points());
  backward(coeffs, out);
  return out;
}

void truncate_spectrum(const SpectralGrid& grid, std::span<Complex> coeffs, int n) {
  const int m = grid.size();
  const int h = grid.half_size();
  for (int ix = 0; ix < m; ++ix) {
    const int kx = grid.wavenumber(ix);
    const bool row_kept = kx >= -n && kx <= n;
    for (int iy = 0; iy < h; ++iy) {
      if (!row_kept || iy > n) coeffs[static_cast<std::size_t>(ix) * h + iy] = 0.0;
    }
  }
}

double out_of_band_ratio(const SpectralGrid& grid, std::span<const double> values) {
  const auto s = grid.forward(values);
  const int h = grid.half_size();
  double all = 0.0, outside = 0.0;
  for (int ix = 0; ix < grid.size(); ++ix) {
    for (int iy = 0; iy < h; ++iy) {
      const double a = std::abs(s[static_cast<std::size_t>(ix) * h + iy]);
      all = std::max(all, a);
      if (!grid.retained(ix, iy)) outside = std::max(outside, a);
    }
  }
  return all > 0.0 ? outside / all : 0.0;
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite input");
}

// coeffs <- truncate(2 pi i k_axis * coeffs)
void differentiate_in_place(const SpectralGrid& grid, std::span<Complex> coeffs, Axis axis) {
  const int m = grid.size();
  const int h = grid.half_size();
  for (int ix = 0; ix < m; ++ix) {
    const int kx = grid.wavenumber(ix);
    for (int iy = 0; iy < h; ++iy) {
      auto& c = coeffs[static_cast<std::size_t>(ix) * h + iy];
      if (!grid.retained(ix, iy)) {
        c = 0.0;
        continue;
      }
      const int k = axis == Axis::X ? kx : iy;
      c *= Complex(0.0, kTwoPi * k);
    }
  }
}

}  // namespace

namespace {

// Coefficients of f - mean(f). The mean does not survive differentiation, and
// removing it first keeps the transform of a constant field exactly zero
// instead of leaving O(eps |f|) residue on every mode.
ComplexVector forward_fluctuation(const SpectralGrid& grid, std::span<const double> values) {
  const double mean = mean_integral(values);
  if (mean == 0.0) return grid.forward(values);
  RealVector shifted(values.begin(), values.end());
  for (double& v : shifted) v -= mean;
  return grid.forward(shifted);
}

}  // namespace

ScalarField partial_derivative(const ScalarField& f, Axis axis) {
  require_finite(f[0], "partial_derivative");
  auto s = forward_fluctuation(f.grid(), f[0]);
  differentiate_in_place(f.grid(), s, axis);
  ScalarField out(f.grid());
  f.grid().backward(s, out[0]);
  return out;
}

Spectrum<2> divergence_spectral(const TensorField& sigma) {
  const auto& grid = sigma.grid();
  for (std::size_t c = 0; c < 4; ++c) require_finite(sigma[c], "divergence_sym_tensor");
  Spectrum<2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    auto sx = forward_fluctuation(grid, sigma[2 * i]);      // sigma_i x
    auto sy = forward_fluctuation(grid, sigma[2 * i + 1]);  // sigma_i y
    differentiate_in_place(grid, sx, Axis::X);
    differentiate_in_place(grid, sy, Axis::Y);
    for (std::size_t p = 0; p < sx.size(); ++p) sx[p] += sy[p];
    out[i] = std::move(sx);
  }
  return out;
}

VectorField divergence_sym_tensor(const TensorField& sigma) {
  return from_spectral<2>(sigma.grid(), divergence_spectral(sigma));
}

template <std::size_t C>
Field<C> resample(const Field<C>& f, const SpectralGrid& target) {
  const auto& src = f.grid();
  const int n = std::min(src.cutoff(), target.cutoff());
  const int hs = src.half_size();
  const int ht = target.half_size();
  Field<C> out(target);
  for (std::size_t c = 0; c < C; ++c) {
    const auto s = src.forward(f[c]);
    ComplexVector t(target.spectral_points(), 0.0);
    for (int kx = -n; kx <= n; ++kx) {
      for (int ky = 0; ky <= n; ++ky) {
        t[static_cast<std::size_t>(target.index_of(kx)) * ht + ky] =
            s[static_cast<std::size_t>(src.index_of(kx)) * hs + ky];
      }
    }
    target.backward(t, out[c]);
  }
  return out;
}

template ScalarField resample(const ScalarField&, const SpectralGrid&);
template VectorField resample(const VectorField&, const SpectralGrid&);
template TensorField resample(const TensorField&, const SpectralGrid&);

double voigt_multiplier(double alpha, double k_squared) {
  return 1.0 / (1.0 + kTwoPi * kTwoPi * alpha * alpha * k_squared);
}

namespace {

TensorField apply_radial_multiplier(const TensorField& f, double alpha, bool invert) {
  const auto& grid = f.grid();
  const int m = grid.size();
  const int h = grid.half_size();
  TensorField out(grid);
  for (std::size_t c = 0; c < 4; ++c) {
    auto s = grid.forward(f[c]);
    for (int ix = 0; ix < m; ++ix) {
      const int kx = grid.wavenumber(ix);
      for (int iy = 0; iy < h; ++iy) {
        auto& v = s[static_cast<std::size_t>(ix) * h + iy];
        if (!grid.retained(ix, iy)) {
          v = 0.0;
          continue;
        }
        const double mult = voigt_multiplier(alpha, static_cast<double>(kx * kx + iy * iy));
        v = invert ? v * mult : v / mult;
      }
    }
    grid.backward(s, out[c]);
  }
  return out;
}

}  // namespace

TensorField voigt_invert(const TensorField& f, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("voigt_invert: alpha must be > 0");
  return apply_radial_multiplier(f, alpha, true);
}

TensorField voigt_apply(const TensorField& f, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("voigt_apply: alpha must be > 0");
  return apply_radial_multiplier(f, alpha, false);
}

double mean_integral(std::span<const double> values) {
  // Kahan summation.
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values.size());
}

double mean_integral(const ScalarField& f) { return mean_integral(f[0]); }

// ---------------------------------------------------------------------------

struct SpectralGrid1D::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit Plans(int m) {
    std::lock_guard lock(planner_mutex());
    double* real = fftw_alloc_real(m);
    fftw_complex* cplx = fftw_alloc_complex(m / 2 + 1);
    r2c = fftw_plan_dft_r2c_1d(m, real, cplx, kPlanFlags1D | FFTW_PRESERVE_INPUT);
    c2r = fftw_plan_dft_c2r_1d(m, cplx, real, kPlanFlags1D | FFTW_DESTROY_INPUT);
    fftw_free(real);
    fftw_free(cplx);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralGrid1D::SpectralGrid1D(int cutoff, int size)
    : cutoff_(cutoff), size_(size), plans_(std::make_shared<Plans>(size)) {}

SpectralGrid1D SpectralGrid1D::make(int cutoff, double pad_factor) {
  if (cutoff < 1) throw InvalidArgument("make_grid_1d: cutoff N must be >= 1");
  if (!(pad_factor >= 1.0)) throw InvalidArgument("make_grid_1d: pad_factor must be >= 1");
  return SpectralGrid1D(cutoff, smallest_even_at_least(pad_factor * (2 * cutoff + 1)));
}

std::vector<Complex> SpectralGrid1D::forward(std::span<const double> values) const {
  std::vector<Complex> out(half_size());
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  for (auto& c : out) c /= static_cast<double>(size_);
  return out;
}

std::vector<double> SpectralGrid1D::backward(std::span<const Complex> coeffs) const {
  std::vector<Complex> scratch(coeffs.begin(), coeffs.end());
  std::vector<double> out(size_);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  return out;
}

namespace {

template <class Multiplier>
ScalarField1D apply_1d(const ScalarField1D& f, Multiplier&& mult) {
  auto s = f.grid.forward(f.values);
  const int n = f.grid.cutoff();
  for (int k = 0; k < static_cast<int>(s.size()); ++k) s[k] = k <= n ? s[k] * mult(k) : Complex(0.0);
  ScalarField1D out(f.grid);
  out.values = f.grid.backward(s);
  return out;
}

}  // namespace

ScalarField1D derivative_1d(const ScalarField1D& f) {
  require_finite(f.values, "derivative_1d");
  return apply_1d(f, [](int k) { return Complex(0.0, kTwoPi * k); });
}

ScalarField1D project_1d(const ScalarField1D& f, int n) {
  auto s = f.grid.forward(f.values);
  for (int k = n + 1; k < static_cast<int>(s.size()); ++k) s[k] = 0.0;
  ScalarField1D out(f.grid);
  out.values = f.grid.backward(s);
  return out;
}

ScalarField1D voigt_invert_1d(const ScalarField1D& f, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("voigt_invert_1d: alpha must be >= 0");
  return apply_1d(f, [alpha](int k) { return Complex(voigt_multiplier(alpha, double(k) * k)); });
}

}  // namespace vevp
