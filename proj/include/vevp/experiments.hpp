#pragma once

// Limit-process drivers: eps -> 0 sweeps, Galerkin refinement, twin runs for
// continuous dependence, and a steady-state residual check.
//
// Members of a sweep are independent simulations and run on a small thread
// pool (size capped by the VEVP_THREADS environment variable). Each member is
// deterministic, so results do not depend on the thread count.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vevp/diagnostics.hpp"
#include "vevp/time_integration.hpp"

namespace vevp {

struct SimulationSetup {
  PhysicalParams params;
  ForcingSpec forcing;
  StrainVariant variant = StrainVariant::Simplified;
  State initial;
  double dt = 1e-3;
  double t_final = 1.0;
  double record_cadence = 0.0;  // <= 0 records every step

  const SpectralGrid& grid() const { return initial.grid(); }
};

/// Worker count for sweeps: hardware concurrency, capped by VEVP_THREADS.
unsigned sweep_threads();
/// Runs fn(0..n-1) on up to sweep_threads() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// States at t0 and every record cadence, ending at t_final.
std::vector<State> run_recorded(const SimulationSetup& setup);

struct DifferenceRow {
  double a = 0, b = 0;      // eps values or cutoffs of the compared members
  double du_H1 = 0;         // sup over recorded t of |u_a - u_b|_{H1}
  double dsigma_H1 = 0;

  friend bool operator==(const DifferenceRow&, const DifferenceRow&) = default;
};

struct EpsSweep {
  std::vector<DifferenceRow> consecutive;  // (eps_i, eps_{i+1})
  std::vector<DifferenceRow> vs_last;      // (eps_i, eps_last) for i < last
};

/// Runs setup once per eps (overriding params.eps) and tabulates sup-in-time H1 differences.
EpsSweep sweep_eps(const SimulationSetup& setup, const std::vector<double>& eps_list);

/// Runs setup at each cutoff (same pad factor and dt, initial data resampled)
/// and compares consecutive runs on the modes of the coarser one.
std::vector<DifferenceRow> sweep_resolution(const SimulationSetup& setup, const std::vector<int>& N_list);

struct TwinSample {
  double t = 0;
  double D = 0;  // difference functional
  double K = 0;  // Groenwall coefficient C (1 + |sigma1|_H2 + |sigma2|_H2 + |u1|_H2 + |u2|_H2)
};

struct TwinResult {
  std::vector<TwinSample> samples;
  double envelope_slope = 0;  // smallest s with D(t) <= D(0) exp(s t) on the samples
  double max_K = 0;
};

enum class PerturbationKind { LowMode, Random };

/// Unit-L2 velocity perturbation: a single low mode, or a seeded random band-limited field.
VectorField unit_perturbation(const SpectralGrid& grid, PerturbationKind kind, std::uint64_t seed = 0);

/// 1/2 [ |du|^2 + |grad du|^2 + E^-1 |ds|^2 + E^-1 (1 + alpha^2) |grad ds|^2 + E^-1 alpha^2 |Lap ds|^2 ]
double twin_difference(const State& a, const State& b, const PhysicalParams& params);

inline constexpr double kGronwallConstant = 1.0;

TwinResult twin_stability(const SimulationSetup& setup, double delta,
                          PerturbationKind kind = PerturbationKind::LowMode, std::uint64_t seed = 0);

struct SteadyCheck {
  double t = 0;
  double hibler = 0;        // hibler_residual at t_final
  double rate_scaled = 0;   // E^-1 |(I - alpha^2 Lap) dsigma/dt| by finite differences
  double du_dt = 0;         // |du/dt|_{L2} by finite differences
};

/// Runs to t_final and compares the constitutive residual with the measured stress tendency.
SteadyCheck steady_check(const SimulationSetup& setup);

}  // namespace vevp
