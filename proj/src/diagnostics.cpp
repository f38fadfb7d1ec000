#include "vevp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vevp {

TensorField shifted_stress(const TensorField& sigma, double P) {
  TensorField tau = sigma;
  for (std::size_t c : {tensor::xx, tensor::yy})
    for (double& v : tau[c]) v += 0.5 * P;
  return tau;
}

double sobolev_norm_squared(const SpectralGrid& grid, std::span<const double> values, int s) {
  if (s < 0 || s > 3) throw InvalidArgument("sobolev_norm: s must be 0, 1, 2 or 3");
  return spectral_quadratic_form(grid, values, [s](double k2) { return std::pow(1.0 + kTwoPi * kTwoPi * k2, s); });
}

double l2_energy(const State& state, const PhysicalParams& params) {
  const auto tau = shifted_stress(state.sigma, params.P);
  const double u2 = std::pow(l2_norm(state.u), 2);
  const double t2 = std::pow(l2_norm(tau), 2);
  const double g2 = gradient_norm_squared(tau);
  return 0.5 * (u2 + (t2 + params.alpha * params.alpha * g2) / params.E_mod);
}

double dissipation_rate(const State& state, const PhysicalParams& params, StrainVariant variant) {
  if (!(params.P > 0.0)) throw InvalidArgument("dissipation_rate: P must be > 0");
  const auto strain = strain_rate(sym_gradient(state.u), params, variant);
  const auto tau = shifted_stress(state.sigma, params.P);
  const double shear = params.e_bar * params.e_bar / params.P;
  std::vector<double> integrand(state.grid().points());
  for (std::size_t p = 0; p < integrand.size(); ++p) {
    const double tr = tau[0][p] + tau[3][p];
    const double a = tau[0][p] - 0.5 * tr, d = tau[3][p] - 0.5 * tr;
    const double dev2 = a * a + tau[1][p] * tau[1][p] + tau[2][p] * tau[2][p] + d * d;
    integrand[p] = strain[0][p] * (shear * dev2 + tr * tr / (2.0 * params.P));
  }
  return std::max(0.0, mean_integral(integrand));
}

namespace {

ScalarField antisymmetric_part(const TensorField& sigma) {
  ScalarField w(sigma.grid());
  for (std::size_t p = 0; p < w[0].size(); ++p) w[0][p] = 0.5 * (sigma[1][p] - sigma[2][p]);
  return w;
}

}  // namespace

double symmetry_defect(const TensorField& sigma) {
  // W has entries (0, w; -w, 0), so |W|^2 = 2 w^2.
  return std::sqrt(2.0) * l2_norm(antisymmetric_part(sigma));
}

double antisymmetric_energy(const TensorField& sigma, double alpha) {
  const auto w = antisymmetric_part(sigma);
  return 2.0 * (std::pow(l2_norm(w), 2) + alpha * alpha * gradient_norm_squared(w));
}

double cancellation_residual(const VectorField& u, const TensorField& sigma, const PhysicalParams& params) {
  const auto div = divergence_sym_tensor(sigma);
  const auto d = sym_gradient(u);
  const auto tau = shifted_stress(sigma, params.P);
  std::vector<double> integrand(u.grid().points());
  for (std::size_t p = 0; p < integrand.size(); ++p) {
    double v = u[0][p] * div[0][p] + u[1][p] * div[1][p];
    for (std::size_t c = 0; c < 4; ++c) v += tau[c][p] * d[c][p];
    integrand[p] = v;
  }
  return mean_integral(integrand);
}

double cancellation_scale(const VectorField& u, const TensorField& sigma, const PhysicalParams& params) {
  return sobolev_norm(u, 1) * sobolev_norm(shifted_stress(sigma, params.P), 1);
}

double hibler_residual(const VectorField& u, const TensorField& sigma, const PhysicalParams& params,
                       StrainVariant variant) {
  const auto d = sym_gradient(u);
  const auto strain = strain_rate(d, params, variant);
  auto r = rheology_relaxation(sigma, strain, params.P, params.e_bar);
  r -= d;
  return l2_norm(galerkin_project(r, u.grid().cutoff()));
}

SobolevNorms sobolev_norms(const State& state) {
  SobolevNorms n;
  n.L2_u = sobolev_norm(state.u, 0);
  n.H1_u = sobolev_norm(state.u, 1);
  n.H2_u = sobolev_norm(state.u, 2);
  n.L2_sigma = sobolev_norm(state.sigma, 0);
  n.H1_sigma = sobolev_norm(state.sigma, 1);
  n.H2_sigma = sobolev_norm(state.sigma, 2);
  n.H3_sigma = sobolev_norm(state.sigma, 3);
  return n;
}

DiagnosticsRecord compute_record(const State& state, const PhysicalParams& params, StrainVariant variant) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.E_l2 = l2_energy(state, params);
  r.dissipation = dissipation_rate(state, params, variant);
  r.sym_defect = symmetry_defect(state.sigma);
  r.cancel_residual = cancellation_residual(state.u, state.sigma, params);
  r.norms = sobolev_norms(state);
  const auto strain = strain_rate(sym_gradient(state.u), params, variant);
  const auto [lo, hi] = std::minmax_element(strain[0].begin(), strain[0].end());
  r.Dmin = *lo;
  r.Dmax = *hi;
  return r;
}

}  // namespace vevp
