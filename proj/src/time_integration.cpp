#include "vevp/time_integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vevp {

EvpRhs make_rhs(ForcingSpec forcing, PhysicalParams params, StrainVariant variant) {
  params.validate();
  return [forcing = std::move(forcing), params, variant](const State& s) {
    return evp_rhs(s, forcing, params, variant);
  };
}

double suggest_dt(const State& state, const PhysicalParams& params, StrainVariant variant, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("suggest_dt: safety must lie in (0, 1]");
  const double n = state.grid().cutoff();
  const double a = params.alpha;
  const double wave = std::sqrt(1.0 + kTwoPi * kTwoPi * a * a * n * n) / (kTwoPi * n * std::sqrt(params.E_mod));

  const auto strain = strain_rate(sym_gradient(state.u), params, variant);
  double dmax = 0.0;
  for (double v : strain[0]) dmax = std::max(dmax, v);
  const double relax =
      params.P / (params.E_mod * params.e_bar * params.e_bar * dmax + std::numeric_limits<double>::min());
  return safety * std::min(wave, relax);
}

RunResult run_simulation(const State& state0, double t_final, double dt, const EvpRhs& rhs,
                         const std::vector<RunCallback>& callbacks) {
  if (!(dt > 0.0)) throw InvalidArgument("run_simulation: dt must be > 0");
  if (!(t_final > state0.t)) throw InvalidArgument("run_simulation: t_final must exceed the initial time");

  const double t0 = state0.t;
  const double scale = std::max({1.0, state0.u.max_abs(), state0.sigma.max_abs()});
  const double limit = kBlowUpFactor * scale;
  const double clock_tol = 1e-9 * dt;

  std::vector<long> fired(callbacks.size(), 0);
  auto notify = [&](const State& s) {
    for (std::size_t i = 0; i < callbacks.size(); ++i) {
      const auto& cb = callbacks[i];
      if (!(cb.cadence > 0.0) || !cb.fn) continue;
      const double due = t0 + static_cast<double>(fired[i]) * cb.cadence;
      if (s.t + clock_tol < due) continue;
      cb.fn(s);
      // Skip every multiple already passed.
      fired[i] = static_cast<long>(std::floor((s.t - t0 + clock_tol) / cb.cadence)) + 1;
    }
  };

  RunResult result{state0, 0};
  State& y = result.final_state;
  notify(y);
  while (y.t < t_final) {
    const double remaining = t_final - y.t;
    const bool last = remaining <= dt * (1.0 + 1e-9);
    State next = [&] {
      try {
        // A remainder equal to dt up to rounding reuses dt so composed runs stay bitwise equal.
        const double h = (last && remaining < dt * (1.0 - 1e-9)) ? remaining : dt;
        return rk4_step(y, h, rhs);
      } catch (BlowUpError& e) {
        e.set_last_good(y);
        throw;
      }
    }();
    if (last) next.t = t_final;
    if (next.u.max_abs() > limit || next.sigma.max_abs() > limit) {
      BlowUpError e("run_simulation: amplitude exceeded guard at t=" + std::to_string(next.t), next.t);
      e.set_last_good(y);
      throw e;
    }
    y = std::move(next);
    ++result.steps;
    notify(y);
  }
  return result;
}

}  // namespace vevp
