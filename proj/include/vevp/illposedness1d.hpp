#pragma once

// One-dimensional laboratory for the loss of hyperbolicity of the unregularised
// EVP system:
//
//   du/dt     = d_x sigma
//   dsigma/dt = (I - alpha^2 d_xx)^{-1} [ d_x u - (5 S / 2P) sigma - S / 2 ],   S = sqrt(u_x^2 + eps^2)
//
// alpha = 0 is the plain system. About a constant background (ubar_x, sigbar)
// each Fourier mode k obeys
//
//   lambda^2 + a m(k) lambda + c m(k) (2 pi k)^2 = 0,   m(k) = 1 / (1 + 4 pi^2 alpha^2 k^2)
//
// with a = (5/2P) sqrt(ubar_x^2 + eps^2) and c the ellipticity coefficient.
// c < 0 gives growth rates proportional to k when alpha = 0.

#include <array>
#include <vector>

#include "vevp/spectral.hpp"

namespace vevp {

struct State1D {
  ScalarField1D u;
  ScalarField1D sigma;
  double t = 0.0;

  explicit State1D(const SpectralGrid1D& g) : u(g), sigma(g) {}
  State1D(ScalarField1D u_, ScalarField1D s_, double t_) : u(std::move(u_)), sigma(std::move(s_)), t(t_) {}
};

struct Rate1D {
  ScalarField1D du;
  ScalarField1D dsigma;
};

void axpy(State1D& y, double a, const Rate1D& k);
bool is_finite(const Rate1D& k);

struct Background1D {
  double ubar_x = 0.0;
  double sigbar = 0.0;
  double P = 1.0;
  double eps = 1e-3;

  friend bool operator==(const Background1D&, const Background1D&) = default;
};

Rate1D rhs_1d(const State1D& state, double P, double eps, double alpha);
Rate1D linearized_rhs_1d(const State1D& pert, const Background1D& bg, double alpha);

/// 1 - (5/2P) sigbar ubar_x / S - ubar_x / (2 S), S = sqrt(ubar_x^2 + eps^2).
double ellipticity_coefficient(const Background1D& bg);
/// (5/2P) sqrt(ubar_x^2 + eps^2)
double damping_coefficient(const Background1D& bg);

/// Both roots of the modal equation, larger real part first.
std::array<Complex, 2> dispersion_growth_rate(const Background1D& bg, int k, double alpha);

/// Repeated rk4_step of the linearised system on fields; a zero perturbation stays zero.
State1D evolve_linearized_1d(State1D pert, const Background1D& bg, double alpha, double t_final, double dt);
/// Same for the nonlinear system.
State1D evolve_1d(State1D state, double P, double eps, double alpha, double t_final, double dt);

struct InstabilityOptions {
  int N = 64;                 // Galerkin cutoff of the 1D grid
  double T = 1.0;
  double dt = 1e-4;
  double seed_amp = 1e-6;     // amplitude of the seeded cos(2 pi k x) velocity mode
  double alpha = 0.0;
  double fit_fraction = 0.5;  // trailing portion of the run used for the slope fit
};

struct GrowthMeasurement {
  int k = 0;
  double predicted_rate = 0.0;  // Re lambda_+(k)
  double measured_rate = 0.0;
  double relative_error = 0.0;  // |measured - predicted| / max(|predicted|, 1)
  bool clipped = false;         // amplitude left the representable range before T
};

/// Seeds each k separately and fits log of the mode amplitude against t.
/// The linearised system is integrated directly on Fourier coefficients, which
/// it leaves uncoupled, so unseeded modes stay exactly zero.
std::vector<GrowthMeasurement> run_instability_experiment(const Background1D& bg, const std::vector<int>& k_list,
                                                          const InstabilityOptions& opts);

/// Amplitude beyond which a run is stopped and its fit window clipped.
inline constexpr double kAmplitudeCeiling = 1e250;

}  // namespace vevp
