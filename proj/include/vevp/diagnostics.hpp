#pragma once

// Computable functionals of a Galerkin state: energy, dissipation, symmetry
// defect, Sobolev norms and constitutive residuals.
//
// Integrals over the torus are evaluated either by collocation mean (exact for
// the band-limited products involved, since the grid is padded) or in Fourier
// space with the convention |f|_{H^s}^2 = sum_k (1 + 4 pi^2 |k|^2)^s |fhat_k|^2.

#include <span>

#include "vevp/model.hpp"

namespace vevp {

struct SobolevNorms {
  double L2_u = 0, H1_u = 0, H2_u = 0;
  double L2_sigma = 0, H1_sigma = 0, H2_sigma = 0, H3_sigma = 0;

  friend bool operator==(const SobolevNorms&, const SobolevNorms&) = default;
};

struct DiagnosticsRecord {
  double t = 0;
  double E_l2 = 0;
  double dissipation = 0;
  double sym_defect = 0;
  double cancel_residual = 0;
  SobolevNorms norms;
  double Dmin = 0, Dmax = 0;

  friend bool operator==(const DiagnosticsRecord&, const DiagnosticsRecord&) = default;
};

/// tau = sigma + (P/2) I
TensorField shifted_stress(const TensorField& sigma, double P);

/// sum_k w(|k|^2) |fhat_k|^2 for one component; w takes the integer |k|^2.
template <class Weight>
double spectral_quadratic_form(const SpectralGrid& grid, std::span<const double> values, Weight&& w) {
  const auto c = grid.forward(values);
  const int m = grid.size();
  const int h = grid.half_size();
  double sum = 0.0;
  for (int ix = 0; ix < m; ++ix) {
    const long kx = grid.wavenumber(ix);
    for (int iy = 0; iy < h; ++iy) {
      const double a = std::norm(c[static_cast<std::size_t>(ix) * h + iy]);
      if (a == 0.0) continue;
      sum += grid.column_weight(iy) * w(static_cast<double>(kx * kx + static_cast<long>(iy) * iy)) * a;
    }
  }
  return sum;
}

/// Squared H^s norm summed over components; s in {0, 1, 2, 3}.
double sobolev_norm_squared(const SpectralGrid& grid, std::span<const double> values, int s);

template <std::size_t C>
double sobolev_norm(const Field<C>& f, int s) {
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) sum += sobolev_norm_squared(f.grid(), f[c], s);
  return std::sqrt(sum);
}

/// |grad f|_{L2}^2 (homogeneous seminorm) summed over components.
template <std::size_t C>
double gradient_norm_squared(const Field<C>& f) {
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    sum += spectral_quadratic_form(f.grid(), f[c], [](double k2) { return kTwoPi * kTwoPi * k2; });
  return sum;
}

/// |Laplacian f|_{L2}^2 summed over components.
template <std::size_t C>
double laplacian_norm_squared(const Field<C>& f) {
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    sum += spectral_quadratic_form(f.grid(), f[c], [](double k2) {
      const double l = kTwoPi * kTwoPi * k2;
      return l * l;
    });
  return sum;
}

/// Plain L2 norm by collocation quadrature.
template <std::size_t C>
double l2_norm(const Field<C>& f) {
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> sq(f[c].size());
    for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = f[c][p] * f[c][p];
    sum += mean_integral(sq);
  }
  return std::sqrt(sum);
}

/// 1/2 [ |u|^2 + E^-1 |tau|^2 + alpha^2 E^-1 |grad tau|^2 ]
double l2_energy(const State& state, const PhysicalParams& params);

/// Integral of D [ (e^2/P) |dev tau|^2 + (1/2P) (tr tau)^2 ], D the variant's strain rate.
double dissipation_rate(const State& state, const PhysicalParams& params, StrainVariant variant);

/// |W(sigma)|_{L2} with W = (sigma - sigma^T)/2.
double symmetry_defect(const TensorField& sigma);

/// |W|^2 + alpha^2 |grad W|^2, the quantity that cannot grow along a trajectory.
double antisymmetric_energy(const TensorField& sigma, double alpha);

/// Integral of u . div(sigma) + tau : D(u); zero for symmetric sigma.
double cancellation_residual(const VectorField& u, const TensorField& sigma, const PhysicalParams& params);

/// Natural magnitude for the residual above: |u|_{H1} |tau|_{H1}.
double cancellation_scale(const VectorField& u, const TensorField& sigma, const PhysicalParams& params);

/// L2 norm of the Galerkin-projected constitutive residual Q_N[ R(sigma, D) - D(u) ].
/// Vanishes at any steady state of the stress equation.
double hibler_residual(const VectorField& u, const TensorField& sigma, const PhysicalParams& params,
                       StrainVariant variant = StrainVariant::Original);

SobolevNorms sobolev_norms(const State& state);

DiagnosticsRecord compute_record(const State& state, const PhysicalParams& params, StrainVariant variant);

}  // namespace vevp
