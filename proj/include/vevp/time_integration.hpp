#pragma once

#include <concepts>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vevp/model.hpp"

namespace vevp {

/// Non-finite stage or runaway amplitude. Carries the stage time and, when
/// raised from run_simulation, the last state that passed the checks.
class BlowUpError : public NumericError {
 public:
  BlowUpError(const std::string& what, double stage_time)
      : NumericError(what), stage_time_(stage_time) {}

  double stage_time() const { return stage_time_; }
  const State* last_good() const { return last_good_.get(); }
  void set_last_good(State s) { last_good_ = std::make_shared<State>(std::move(s)); }

 private:
  double stage_time_;
  std::shared_ptr<const State> last_good_;
};

template <class Y, class Rhs>
concept RungeKuttaSystem = requires(Y& y, const Y& cy, double h, Rhs& rhs) {
  { y.t } -> std::convertible_to<double>;
  axpy(y, h, rhs(cy));
  { is_finite(rhs(cy)) } -> std::convertible_to<bool>;
};

/// One classical fourth-order Runge-Kutta step of dy/dt = rhs(y).
template <class Y, class Rhs>
  requires RungeKuttaSystem<Y, Rhs>
Y rk4_step(const Y& y, double dt, Rhs&& rhs) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be > 0");
  auto stage = [&](const Y& at) {
    auto k = rhs(at);
    if (!is_finite(k)) throw BlowUpError("rk4_step: non-finite stage at t=" + std::to_string(at.t), at.t);
    return k;
  };
  const double half = 0.5 * dt;

  const auto k1 = stage(y);
  Y y2 = y;
  axpy(y2, half, k1);
  y2.t = y.t + half;
  const auto k2 = stage(y2);
  Y y3 = y;
  axpy(y3, half, k2);
  y3.t = y.t + half;
  const auto k3 = stage(y3);
  Y y4 = y;
  axpy(y4, dt, k3);
  y4.t = y.t + dt;
  const auto k4 = stage(y4);

  Y out = y;
  axpy(out, dt / 6.0, k1);
  axpy(out, dt / 3.0, k2);
  axpy(out, dt / 3.0, k3);
  axpy(out, dt / 6.0, k4);
  out.t = y.t + dt;
  return out;
}

using EvpRhs = std::function<StateRate(const State&)>;

/// Binds the model right-hand side for the integrator.
EvpRhs make_rhs(ForcingSpec forcing, PhysicalParams params, StrainVariant variant);

/// Heuristic step bound from the elastic-wave and relaxation timescales:
///   safety * min( sqrt(1 + 4 pi^2 alpha^2 N^2) / (2 pi N sqrt(E)), P / (E e^2 max D) ).
double suggest_dt(const State& state, const PhysicalParams& params, StrainVariant variant, double safety);

struct RunCallback {
  double cadence = 0.0;  // simulated-time interval; <= 0 disables
  std::function<void(const State&)> fn;
};

struct RunResult {
  State final_state;
  long steps = 0;
};

/// Repeated rk4_step from state0 to t_final. Callbacks fire at state0.t and
/// whenever the clock reaches the next multiple of their cadence. The final
/// step is shortened to land exactly on t_final.
RunResult run_simulation(const State& state0, double t_final, double dt, const EvpRhs& rhs,
                         const std::vector<RunCallback>& callbacks = {});

/// Amplitude guard: any field with L-inf above this multiple of the initial scale aborts.
inline constexpr double kBlowUpFactor = 1e12;

}  // namespace vevp
