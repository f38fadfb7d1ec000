#pragma once

// Continuous Voigt-EVP model: strain rates, constitutive relaxation, drag laws,
// forcing and the assembled Galerkin right-hand sides.
//
//   du/dt     = div(sigma) + P_N T_a + P_N T_w + Omega u_perp - g P_N grad(H0)
//   dsigma/dt = E (I - alpha^2 Laplacian)^{-1} Q_N [ D(u) - R(sigma, D) ]
//
// with R(sigma, D) = (e^2 D / P) dev(sigma) + (D / 2P) tr(sigma) I + (D / 2) I.

#include <functional>
#include <numbers>
#include <string>
#include <string_view>

#include "vevp/spectral.hpp"

namespace vevp {

struct PhysicalParams {
  double E_mod = 0.25;      // elastic modulus
  double alpha = 0.1;       // Voigt length
  double P = 27.5e3;        // ice strength
  double e_bar = 2.0;       // yield-ellipse aspect ratio
  double eps = 2e-9;        // strain-rate floor
  double gamma = 0.0;       // smoothing width of the max-cutoff variant
  double Omega = 1.46e-4;   // Coriolis coefficient
  double g = 9.81;
  double theta = 25.0 * std::numbers::pi / 180.0;  // water turning angle
  double phi = 25.0 * std::numbers::pi / 180.0;    // air turning angle
  double c_a = 1.2e-3;
  double c_w = 5.5e-3;
  double rho_a = 1.3;
  double rho_w = 1026.0;
  double m = 1.0;  // areal mass, fixed

  /// Typical dimensional values.
  static PhysicalParams table1() { return {}; }
  /// All constants O(1); used by the property and acceptance tests.
  static PhysicalParams nondimensional();

  /// Throws InvalidArgument naming the violated constraint.
  void validate(bool allow_zero_alpha = false) const;

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

enum class StrainVariant {
  Simplified,   // sqrt(|D|^2 + eps^2)
  Original,     // elliptic yield-curve rate with eps floor
  SmoothedMax,  // smooth max(Dbar, eps) with width gamma
};

std::string_view to_string(StrainVariant v);
StrainVariant strain_variant_from_string(std::string_view s);

enum class ForcingMode { Zero, Reference, Periodic };

std::string_view to_string(ForcingMode m);
ForcingMode forcing_mode_from_string(std::string_view s);

struct ForcingSpec {
  ForcingMode mode = ForcingMode::Periodic;
  double period = 1.0;  // T in the wind formula
  /// Sea-surface height H0(x, y); empty means H0 = 0.
  std::function<double(double, double)> topography;
};

struct State {
  VectorField u;
  TensorField sigma;
  double t = 0.0;

  explicit State(const SpectralGrid& grid) : u(grid), sigma(grid) {}
  State(VectorField u_, TensorField sigma_, double t_)
      : u(std::move(u_)), sigma(std::move(sigma_)), t(t_) {}

  const SpectralGrid& grid() const { return u.grid(); }

  /// u = 0, sigma = -(P/2) I: the zero-strain steady state.
  static State rest(const SpectralGrid& grid, double P);

  friend bool operator==(const State&, const State&) = default;
};

struct StateRate {
  VectorField du;
  TensorField dsigma;
};

void axpy(State& y, double a, const StateRate& k);
bool is_finite(const StateRate& k);

struct ForcingFields {
  VectorField wind;
  VectorField ocean;
  VectorField grad_h0;
};

TensorField sym_gradient(const VectorField& u);

/// Frobenius norm of a symmetric tensor |D|^2 = D11^2 + 2 D12^2 + D22^2 (full 4-entry sum).
ScalarField strain_rate_simplified(const TensorField& d, double eps);
ScalarField strain_rate_original(const TensorField& d, double e_bar, double eps);
ScalarField strain_rate_smoothed_max(const ScalarField& dbar, double eps, double gamma);
/// Dispatch on the variant; SmoothedMax is applied to the eps-free original rate.
ScalarField strain_rate(const TensorField& d, const PhysicalParams& params, StrainVariant variant);

/// Pointwise R(sigma, D); no truncation.
TensorField rheology_relaxation(const TensorField& sigma, const ScalarField& strain, double P, double e_bar);

VectorField perp(const VectorField& u);
VectorField wind_stress(const VectorField& wind, const PhysicalParams& params);
VectorField ocean_stress(const VectorField& ocean, const VectorField& u, const PhysicalParams& params);

ForcingFields eval_forcing(const ForcingSpec& spec, const SpectralGrid& grid, double t);

VectorField momentum_rhs(const State& state, const ForcingSpec& forcing, const PhysicalParams& params);
TensorField stress_rhs(const State& state, const PhysicalParams& params, StrainVariant variant);

/// Both halves of the Galerkin system, as consumed by the time integrator.
StateRate evp_rhs(const State& state, const ForcingSpec& forcing, const PhysicalParams& params,
                  StrainVariant variant);

}  // namespace vevp
