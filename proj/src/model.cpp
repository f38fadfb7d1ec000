#include "vevp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vevp {

PhysicalParams PhysicalParams::nondimensional() {
  PhysicalParams p;
  p.E_mod = 1.0;
  p.alpha = 0.1;
  p.P = 1.0;
  p.e_bar = 2.0;
  p.eps = 0.1;
  p.gamma = 0.0;
  p.Omega = 1.0;
  p.g = 1.0;
  p.c_a = 0.01;
  p.c_w = 1.0;
  p.rho_a = 1.0;
  p.rho_w = 1.0;
  return p;
}

void PhysicalParams::validate(bool allow_zero_alpha) const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
  };
  require(std::isfinite(E_mod) && E_mod > 0.0, "E_mod must be > 0");
  require(std::isfinite(P) && P > 0.0, "P must be > 0");
  require(std::isfinite(e_bar) && e_bar > 1.0, "e_bar must be > 1");
  if (allow_zero_alpha)
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  else
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be > 0 for the Voigt-EVP model");
  require(std::isfinite(eps) && eps >= 0.0, "eps must be >= 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
  require(std::isfinite(theta) && theta >= 0.0 && theta <= std::numbers::pi / 4.0,
          "theta must lie in [0, pi/4] (water turning angle hypothesis of the well-posedness theorem)");
  require(std::isfinite(phi), "phi must be finite");
  require(std::isfinite(Omega), "Omega must be finite");
  require(std::isfinite(g), "g must be finite");
  require(std::isfinite(c_a) && c_a >= 0.0, "c_a must be >= 0");
  require(std::isfinite(c_w) && c_w >= 0.0, "c_w must be >= 0");
  require(std::isfinite(rho_a) && rho_a > 0.0, "rho_a must be > 0");
  require(std::isfinite(rho_w) && rho_w > 0.0, "rho_w must be > 0");
  require(std::isfinite(m) && m > 0.0, "m must be > 0");
}

std::string_view to_string(StrainVariant v) {
  switch (v) {
    case StrainVariant::Simplified: return "simplified";
    case StrainVariant::Original: return "original";
    case StrainVariant::SmoothedMax: return "smoothed_max";
  }
  return "?";
}

StrainVariant strain_variant_from_string(std::string_view s) {
  if (s == "simplified") return StrainVariant::Simplified;
  if (s == "original") return StrainVariant::Original;
  if (s == "smoothed_max") return StrainVariant::SmoothedMax;
  throw InvalidArgument("unknown strain variant '" + std::string(s) + "'");
}

std::string_view to_string(ForcingMode m) {
  switch (m) {
    case ForcingMode::Zero: return "zero";
    case ForcingMode::Reference: return "reference";
    case ForcingMode::Periodic: return "periodic";
  }
  return "?";
}

ForcingMode forcing_mode_from_string(std::string_view s) {
  if (s == "zero") return ForcingMode::Zero;
  if (s == "reference") return ForcingMode::Reference;
  if (s == "periodic") return ForcingMode::Periodic;
  throw InvalidArgument("unknown forcing mode '" + std::string(s) + "'");
}

State State::rest(const SpectralGrid& grid, double P) {
  State s(grid);
  for (int c : {0, 3})
    for (double& v : s.sigma[c]) v = -0.5 * P;
  return s;
}

void axpy(State& y, double a, const StateRate& k) {
  y.u.axpy(a, k.du);
  y.sigma.axpy(a, k.dsigma);
}

bool is_finite(const StateRate& k) { return k.du.all_finite() && k.dsigma.all_finite(); }

namespace {

// Spectral coefficients of D11, D12 (= D21), D22, truncated to N.
std::array<ComplexVector, 3> sym_gradient_spectral(const VectorField& u) {
  const auto& grid = u.grid();
  const auto u1 = grid.forward(u[0]);
  const auto u2 = grid.forward(u[1]);
  const int m = grid.size();
  const int h = grid.half_size();
  std::array<ComplexVector, 3> d;
  for (auto& c : d) c.assign(grid.spectral_points(), 0.0);
  for (int ix = 0; ix < m; ++ix) {
    const double kx = kTwoPi * grid.wavenumber(ix);
    for (int iy = 0; iy < h; ++iy) {
      if (!grid.retained(ix, iy)) continue;
      const std::size_t p = static_cast<std::size_t>(ix) * h + iy;
      const double ky = kTwoPi * iy;
      const Complex i(0.0, 1.0);
      d[0][p] = i * kx * u1[p];
      d[1][p] = 0.5 * i * (ky * u1[p] + kx * u2[p]);
      d[2][p] = i * ky * u2[p];
    }
  }
  return d;
}

void require_finite(const ScalarField& f, const char* what) {
  if (!f.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace

TensorField sym_gradient(const VectorField& u) {
  const auto& grid = u.grid();
  const auto d = sym_gradient_spectral(u);
  TensorField out(grid);
  grid.backward(d[0], out[tensor::xx]);
  grid.backward(d[1], out[tensor::xy]);
  std::copy(out[tensor::xy].begin(), out[tensor::xy].end(), out[tensor::yx].begin());
  grid.backward(d[2], out[tensor::yy]);
  return out;
}

ScalarField strain_rate_simplified(const TensorField& d, double eps) {
  ScalarField out(d.grid());
  auto o = out[0];
  for (std::size_t p = 0; p < o.size(); ++p) {
    const double a = d[0][p], b = d[1][p], c = d[2][p], e = d[3][p];
    o[p] = std::sqrt(a * a + b * b + c * c + e * e + eps * eps);
  }
  return out;
}

ScalarField strain_rate_original(const TensorField& d, double e_bar, double eps) {
  if (!(e_bar > 1.0)) throw InvalidArgument("strain_rate_original: e_bar must be > 1");
  ScalarField out(d.grid());
  auto o = out[0];
  const double w = 2.0 / (e_bar * e_bar);
  for (std::size_t p = 0; p < o.size(); ++p) {
    const double tr = d[0][p] + d[3][p];
    const double a = d[0][p] - 0.5 * tr, e = d[3][p] - 0.5 * tr;
    const double b = d[1][p], c = d[2][p];
    const double dev2 = a * a + b * b + c * c + e * e;
    o[p] = std::sqrt(w * dev2 + tr * tr + eps * eps);
  }
  return out;
}

ScalarField strain_rate_smoothed_max(const ScalarField& dbar, double eps, double gamma) {
  ScalarField out(dbar.grid());
  auto o = out[0];
  const auto in = dbar[0];
  for (std::size_t p = 0; p < o.size(); ++p) {
    // (a + b + g)/2 + sqrt((a - b)^2 + g^2)/2 rearranged around max(a, b), exact at g = 0.
    const double diff = in[p] - eps;
    o[p] = std::max(in[p], eps) + 0.5 * (gamma + (std::hypot(diff, gamma) - std::abs(diff)));
  }
  return out;
}

ScalarField strain_rate(const TensorField& d, const PhysicalParams& params, StrainVariant variant) {
  switch (variant) {
    case StrainVariant::Simplified: return strain_rate_simplified(d, params.eps);
    case StrainVariant::Original: return strain_rate_original(d, params.e_bar, params.eps);
    case StrainVariant::SmoothedMax:
      return strain_rate_smoothed_max(strain_rate_original(d, params.e_bar, 0.0), params.eps, params.gamma);
  }
  throw InvalidArgument("strain_rate: unknown variant");
}

TensorField rheology_relaxation(const TensorField& sigma, const ScalarField& strain, double P, double e_bar) {
  if (!(P > 0.0)) throw InvalidArgument("rheology_relaxation: P must be > 0");
  TensorField out(sigma.grid());
  const auto s = strain[0];
  const double shear = e_bar * e_bar / P;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double tr = sigma[0][p] + sigma[3][p];
    // (D / 2P) tr(sigma) I + (D / 2) I, written through tr(sigma) + P so that
    // sigma = -(P/2) I cancels exactly.
    const double bulk = s[p] / (2.0 * P) * (tr + P);
    out[0][p] = shear * s[p] * (sigma[0][p] - 0.5 * tr) + bulk;
    out[1][p] = shear * s[p] * sigma[1][p];
    out[2][p] = shear * s[p] * sigma[2][p];
    out[3][p] = shear * s[p] * (sigma[3][p] - 0.5 * tr) + bulk;
  }
  return out;
}

VectorField perp(const VectorField& u) {
  VectorField out(u.grid());
  for (std::size_t p = 0; p < u.grid().points(); ++p) {
    out[0][p] = -u[1][p];
    out[1][p] = u[0][p];
  }
  return out;
}

namespace {

// c |V| (V cos(angle) + V_perp sin(angle))
VectorField turned_quadratic_drag(const VectorField& v, double coeff, double angle) {
  VectorField out(v.grid());
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (std::size_t p = 0; p < v.grid().points(); ++p) {
    const double vx = v[0][p], vy = v[1][p];
    const double mag = coeff * std::sqrt(vx * vx + vy * vy);
    out[0][p] = mag * (vx * ca - vy * sa);
    out[1][p] = mag * (vy * ca + vx * sa);
  }
  return out;
}

}  // namespace

VectorField wind_stress(const VectorField& wind, const PhysicalParams& params) {
  return turned_quadratic_drag(wind, params.c_a * params.rho_a, params.phi);
}

VectorField ocean_stress(const VectorField& ocean, const VectorField& u, const PhysicalParams& params) {
  return turned_quadratic_drag(ocean - u, params.c_w * params.rho_w, params.theta);
}

ForcingFields eval_forcing(const ForcingSpec& spec, const SpectralGrid& grid, double t) {
  ForcingFields f{VectorField(grid), VectorField(grid), VectorField(grid)};
  const int m = grid.size();
  if (spec.mode != ForcingMode::Zero) {
    if (spec.mode == ForcingMode::Reference && !(spec.period > 0.0))
      throw InvalidArgument("eval_forcing: wind period must be > 0");
    const bool reference = spec.mode == ForcingMode::Reference;
    const double pi = std::numbers::pi;
    const double amp = (spec.period > 0.0 ? std::sin(kTwoPi * t / spec.period) : 0.0) - 3.0;
    std::vector<double> s2(m), s1(m);
    for (int i = 0; i < m; ++i) {
      const double x = grid.coordinate(i);
      s2[i] = std::sin(kTwoPi * x);
      // The literal wind uses sin(pi x), which is not 1-periodic.
      s1[i] = reference ? std::sin(pi * x) : s2[i];
    }
    for (int ix = 0; ix < m; ++ix) {
      const double x = grid.coordinate(ix);
      for (int iy = 0; iy < m; ++iy) {
        const double y = grid.coordinate(iy);
        const std::size_t p = static_cast<std::size_t>(ix) * m + iy;
        f.wind[0][p] = 5.0 + amp * s2[ix] * s1[iy];
        f.wind[1][p] = 5.0 + amp * s2[iy] * s1[ix];
        if (reference) {
          f.ocean[0][p] = 0.1 * (2.0 * y - 1.0);
          f.ocean[1][p] = -0.1 * (2.0 * x - 1.0);
        } else {
          f.ocean[0][p] = -0.1 * s2[iy];
          f.ocean[1][p] = 0.1 * s2[ix];
        }
      }
    }
  }
  if (spec.topography) {
    const auto h0 = ScalarField::from_function(grid, spec.topography);
    const auto hx = partial_derivative(h0, Axis::X);
    const auto hy = partial_derivative(h0, Axis::Y);
    std::copy(hx[0].begin(), hx[0].end(), f.grad_h0[0].begin());
    std::copy(hy[0].begin(), hy[0].end(), f.grad_h0[1].begin());
  }
  return f;
}

VectorField momentum_rhs(const State& state, const ForcingSpec& forcing, const PhysicalParams& params) {
  const auto& grid = state.grid();
  const int n = grid.cutoff();
  const auto forces = eval_forcing(forcing, grid, state.t);

  auto drag = wind_stress(forces.wind, params);
  drag += ocean_stress(forces.ocean, state.u, params);
  if (!drag.all_finite()) throw NumericError("momentum_rhs: non-finite drag");

  // div(sigma) + P_N(drag), assembled in Fourier space.
  auto acc = divergence_spectral(state.sigma);
  VectorField out(grid);
  for (std::size_t i = 0; i < 2; ++i) {
    auto d = grid.forward(drag[i]);
    truncate_spectrum(grid, d, n);
    for (std::size_t p = 0; p < d.size(); ++p) acc[i][p] += d[p];
    grid.backward(acc[i], out[i]);
  }
  out *= 1.0 / params.m;
  out.axpy(params.Omega, perp(state.u));
  out.axpy(-params.g, forces.grad_h0);
  return out;
}

TensorField stress_rhs(const State& state, const PhysicalParams& params, StrainVariant variant) {
  if (!(params.P > 0.0)) throw InvalidArgument("stress_rhs: P must be > 0");
  if (!(params.alpha > 0.0)) throw InvalidArgument("stress_rhs: alpha must be > 0");
  const auto& grid = state.grid();
  const auto dhat = sym_gradient_spectral(state.u);

  TensorField d(grid);
  grid.backward(dhat[0], d[tensor::xx]);
  grid.backward(dhat[1], d[tensor::xy]);
  std::copy(d[tensor::xy].begin(), d[tensor::xy].end(), d[tensor::yx].begin());
  grid.backward(dhat[2], d[tensor::yy]);

  const auto strain = strain_rate(d, params, variant);
  require_finite(strain, "stress_rhs");
  const auto relax = rheology_relaxation(state.sigma, strain, params.P, params.e_bar);

  const int m = grid.size();
  const int h = grid.half_size();
  const std::array<int, 4> dsrc = {0, 1, 1, 2};
  TensorField out(grid);
  for (std::size_t c = 0; c < 4; ++c) {
    auto r = grid.forward(relax[c]);
    const auto& dc = dhat[dsrc[c]];
    for (int ix = 0; ix < m; ++ix) {
      const int kx = grid.wavenumber(ix);
      for (int iy = 0; iy < h; ++iy) {
        const std::size_t p = static_cast<std::size_t>(ix) * h + iy;
        if (!grid.retained(ix, iy)) {
          r[p] = 0.0;
          continue;
        }
        const double mult = params.E_mod * voigt_multiplier(params.alpha, double(kx * kx + iy * iy));
        r[p] = mult * (dc[p] - r[p]);
      }
    }
    grid.backward(r, out[c]);
  }
  return out;
}

StateRate evp_rhs(const State& state, const ForcingSpec& forcing, const PhysicalParams& params,
                  StrainVariant variant) {
  return {momentum_rhs(state, forcing, params), stress_rhs(state, params, variant)};
}

}  // namespace vevp
