#include "vevp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace vevp {

unsigned sweep_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VEVP_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // unparsable value: keep the hardware default
    }
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(sweep_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<State> run_recorded(const SimulationSetup& setup) {
  std::vector<State> out;
  const double cadence = setup.record_cadence > 0.0 ? setup.record_cadence : setup.dt;
  const auto rhs = make_rhs(setup.forcing, setup.params, setup.variant);
  auto result = run_simulation(setup.initial, setup.t_final, setup.dt, rhs,
                               {RunCallback{cadence, [&](const State& s) { out.push_back(s); }}});
  if (out.empty() || out.back().t != result.final_state.t) out.push_back(std::move(result.final_state));
  return out;
}

namespace {

DifferenceRow sup_difference(double a, double b, const std::vector<State>& ra, const std::vector<State>& rb) {
  if (ra.size() != rb.size()) throw NumericError("sweep: members recorded different numbers of states");
  DifferenceRow row{a, b, 0.0, 0.0};
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const auto& x = ra[i];
    const auto& y = rb[i];
    VectorField du = x.u;
    TensorField ds = x.sigma;
    if (y.grid().same_layout(x.grid())) {
      du -= y.u;
      ds -= y.sigma;
    } else {
      // Compare on the modes of the coarser grid.
      const bool x_coarse = x.grid().cutoff() <= y.grid().cutoff();
      const auto& g = x_coarse ? x.grid() : y.grid();
      du = resample(x.u, g) - resample(y.u, g);
      ds = resample(x.sigma, g) - resample(y.sigma, g);
    }
    row.du_H1 = std::max(row.du_H1, sobolev_norm(du, 1));
    row.dsigma_H1 = std::max(row.dsigma_H1, sobolev_norm(ds, 1));
  }
  return row;
}

}  // namespace

EpsSweep sweep_eps(const SimulationSetup& setup, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidArgument("sweep_eps: eps_list is empty");
  for (double e : eps_list)
    if (!(e >= 0.0)) throw InvalidArgument("sweep_eps: eps values must be >= 0");
  std::vector<std::vector<State>> runs(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t i) {
    SimulationSetup s = setup;
    s.params.eps = eps_list[i];
    runs[i] = run_recorded(s);
  });
  EpsSweep out;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    out.consecutive.push_back(sup_difference(eps_list[i], eps_list[i + 1], runs[i], runs[i + 1]));
    out.vs_last.push_back(sup_difference(eps_list[i], eps_list.back(), runs[i], runs.back()));
  }
  return out;
}

std::vector<DifferenceRow> sweep_resolution(const SimulationSetup& setup, const std::vector<int>& N_list) {
  if (N_list.empty()) throw InvalidArgument("sweep_resolution: N_list is empty");
  const int n_min = *std::min_element(N_list.begin(), N_list.end());
  if (n_min < 1) throw InvalidArgument("sweep_resolution: cutoffs must be >= 1");
  // Band-limit the shared initial data to the smallest cutoff first.
  const State base(galerkin_project(setup.initial.u, n_min), galerkin_project(setup.initial.sigma, n_min),
                   setup.initial.t);

  std::vector<std::vector<State>> runs(N_list.size());
  parallel_for(N_list.size(), [&](std::size_t i) {
    const auto grid = SpectralGrid::make(N_list[i], setup.grid().pad_factor());
    SimulationSetup s = setup;
    s.initial = State(resample(base.u, grid), resample(base.sigma, grid), base.t);
    runs[i] = run_recorded(s);
  });
  std::vector<DifferenceRow> rows;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i)
    rows.push_back(sup_difference(N_list[i], N_list[i + 1], runs[i], runs[i + 1]));
  return rows;
}

VectorField unit_perturbation(const SpectralGrid& grid, PerturbationKind kind, std::uint64_t seed) {
  VectorField v(grid);
  if (kind == PerturbationKind::LowMode) {
    // (sin 2 pi y, sin 2 pi x) has unit L2 norm on the torus.
    return VectorField::from_function(grid, [](double x, double y) {
      return std::array{std::sin(kTwoPi * y), std::sin(kTwoPi * x)};
    });
  }
  const int kmax = std::min(grid.cutoff(), 4);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      for (int ky = 0; ky <= kmax; ++ky) {
        if (kx == 0 && ky == 0) continue;
        const double a = coef(rng), b = coef(rng);
        for (int ix = 0; ix < grid.size(); ++ix)
          for (int iy = 0; iy < grid.size(); ++iy) {
            const double ph = kTwoPi * (kx * grid.coordinate(ix) + ky * grid.coordinate(iy));
            v.at(c, ix, iy) += a * std::cos(ph) + b * std::sin(ph);
          }
      }
    }
  }
  const double norm = l2_norm(v);
  if (norm > 0.0) v *= 1.0 / norm;
  return v;
}

double twin_difference(const State& a, const State& b, const PhysicalParams& params) {
  const VectorField du = a.u - b.u;
  const TensorField ds = a.sigma - b.sigma;
  const double al2 = params.alpha * params.alpha;
  const double u_part = std::pow(l2_norm(du), 2) + gradient_norm_squared(du);
  const double s_part = std::pow(l2_norm(ds), 2) + (1.0 + al2) * gradient_norm_squared(ds) +
                        al2 * laplacian_norm_squared(ds);
  return 0.5 * (u_part + s_part / params.E_mod);
}

TwinResult twin_stability(const SimulationSetup& setup, double delta, PerturbationKind kind, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw InvalidArgument("twin_stability: delta must be >= 0");
  SimulationSetup perturbed = setup;
  perturbed.initial.u.axpy(delta, unit_perturbation(setup.grid(), kind, seed));

  std::array<std::vector<State>, 2> runs;
  parallel_for(2, [&](std::size_t i) { runs[i] = run_recorded(i == 0 ? setup : perturbed); });

  TwinResult out;
  const auto& r1 = runs[0];
  const auto& r2 = runs[1];
  for (std::size_t i = 0; i < r1.size(); ++i) {
    TwinSample s;
    s.t = r1[i].t;
    s.D = twin_difference(r1[i], r2[i], setup.params);
    s.K = kGronwallConstant * (1.0 + sobolev_norm(r1[i].sigma, 2) + sobolev_norm(r2[i].sigma, 2) +
                               sobolev_norm(r1[i].u, 2) + sobolev_norm(r2[i].u, 2));
    out.max_K = std::max(out.max_K, s.K);
    out.samples.push_back(s);
  }
  const double d0 = out.samples.front().D;
  const double t0 = out.samples.front().t;
  if (d0 > 0.0) {
    double slope = -std::numeric_limits<double>::infinity();
    for (const auto& s : out.samples)
      if (s.t > t0) slope = std::max(slope, std::log(s.D / d0) / (s.t - t0));
    out.envelope_slope = std::isfinite(slope) ? slope : 0.0;
  }
  return out;
}

SteadyCheck steady_check(const SimulationSetup& setup) {
  const auto rhs = make_rhs(setup.forcing, setup.params, setup.variant);
  const State s0 = run_simulation(setup.initial, setup.t_final, setup.dt, rhs).final_state;
  const State s1 = rk4_step(s0, setup.dt, rhs);
  const State s2 = rk4_step(s1, setup.dt, rhs);

  // Second-order one-sided differences at s0.
  const double h = setup.dt;
  TensorField ds = (-3.0) * s0.sigma;
  ds.axpy(4.0, s1.sigma).axpy(-1.0, s2.sigma);
  ds *= 1.0 / (2.0 * h);
  VectorField du = (-3.0) * s0.u;
  du.axpy(4.0, s1.u).axpy(-1.0, s2.u);
  du *= 1.0 / (2.0 * h);

  SteadyCheck out;
  out.t = s0.t;
  out.hibler = hibler_residual(s0.u, s0.sigma, setup.params, setup.variant);
  out.rate_scaled = l2_norm(voigt_apply(ds, setup.params.alpha)) / setup.params.E_mod;
  out.du_dt = l2_norm(du);
  return out;
}

}  // namespace vevp
