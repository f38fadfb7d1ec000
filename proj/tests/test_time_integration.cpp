#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vevp/diagnostics.hpp"
#include "vevp/time_integration.hpp"

using namespace vevp;

namespace {

PhysicalParams unforced() {
  auto p = PhysicalParams::nondimensional();
  p.c_a = p.c_w = 0.0;
  p.g = 0.0;
  return p;
}

const ForcingSpec kNoForcing{ForcingMode::Zero, 1.0, {}};

State smooth_state(const SpectralGrid& g, double P) {
  State s(g);
  s.u = VectorField::from_function(g, [](double x, double y) {
    return std::array{std::sin(kTwoPi * y) + 0.3 * std::cos(kTwoPi * (x - 2 * y)), 0.5 * std::sin(kTwoPi * x)};
  });
  s.sigma = TensorField::from_function(g, [P](double x, double y) {
    const double sh = 0.1 * P * std::cos(kTwoPi * (x + y));
    return std::array{-0.5 * P + 0.2 * P * std::sin(kTwoPi * x), sh, sh, -0.5 * P};
  });
  return s;
}

double state_distance(const State& a, const State& b) {
  return std::sqrt(std::pow(l2_norm(VectorField(a.u - b.u)), 2) + std::pow(l2_norm(TensorField(a.sigma - b.sigma)), 2));
}

}  // namespace

TEST_CASE("zero right-hand side leaves the state and advances time") {
  const auto g = SpectralGrid::make(4);
  State s = smooth_state(g, 1.0);
  auto zero = [&](const State& y) { return StateRate{VectorField(y.grid()), TensorField(y.grid())}; };
  const State out = rk4_step(s, 0.25, zero);
  CHECK(out.u == s.u);
  CHECK(out.sigma == s.sigma);
  CHECK(out.t == 0.25);
  CHECK_THROWS_AS(rk4_step(s, 0.0, zero), InvalidArgument);
  CHECK_THROWS_AS(rk4_step(s, -1.0, zero), InvalidArgument);
}

TEST_CASE("non-finite stage raises a blow-up error with the stage time") {
  const auto g = SpectralGrid::make(4);
  State s(g);
  s.t = 1.0;
  auto bad = [&](const State& y) {
    StateRate r{VectorField(y.grid()), TensorField(y.grid())};
    if (y.t > 1.0) r.du[0][0] = std::nan("");
    return r;
  };
  try {
    rk4_step(s, 0.5, bad);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.stage_time() == 1.25);
  }
}

TEST_CASE("Coriolis rotation of a uniform drift") {
  auto p = unforced();
  p.Omega = 2.0;
  const auto g = SpectralGrid::make(4);
  State s = State::rest(g, p.P);
  for (double& v : s.u[0]) v = 1.0;
  for (double& v : s.u[1]) v = 0.5;
  const auto rhs = make_rhs(kNoForcing, p, StrainVariant::Simplified);

  double err[2];
  int i = 0;
  for (double dt : {0.1, 0.05}) {
    const State out = rk4_step(s, dt, rhs);
    // Exact: rotation by Omega dt counter-clockwise.
    const double c = std::cos(p.Omega * dt), sn = std::sin(p.Omega * dt);
    const double ex = c * 1.0 - sn * 0.5, ey = sn * 1.0 + c * 0.5;
    err[i++] = std::hypot(out.u[0][7] - ex, out.u[1][7] - ey);
    CHECK(std::hypot(out.u[0][7], out.u[1][7]) == doctest::Approx(std::hypot(1.0, 0.5)).epsilon(1e-5));
  }
  // Local error is O(dt^5).
  CHECK(err[0] / err[1] == doctest::Approx(32.0).epsilon(0.05));
}

TEST_CASE("global convergence order on a smooth nonlinear run") {
  const auto g = SpectralGrid::make(8);
  auto p = PhysicalParams::nondimensional();
  const ForcingSpec forcing{ForcingMode::Periodic, 1.0, {}};
  const auto rhs = make_rhs(forcing, p, StrainVariant::Simplified);
  const State s0 = smooth_state(g, p.P);
  const double T = 0.5;
  auto run = [&](double dt) { return run_simulation(s0, T, dt, rhs).final_state; };
  const State ref = run(T / 256);
  std::vector<double> errs;
  for (int n : {16, 32, 64}) errs.push_back(state_distance(run(T / n), ref));
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    MESSAGE("order " << order);
    CHECK(order >= 3.8);
  }
}

TEST_CASE("suggest_dt") {
  auto p = unforced();
  p.eps = 0.0;
  const auto g = SpectralGrid::make(16);
  const State rest = State::rest(g, p.P);
  const double n = 16.0;
  auto wave = [&](double alpha) {
    return std::sqrt(1 + 4 * M_PI * M_PI * alpha * alpha * n * n) / (2 * M_PI * n * std::sqrt(p.E_mod));
  };
  CHECK(suggest_dt(rest, p, StrainVariant::Simplified, 1.0) == doctest::Approx(wave(p.alpha)).epsilon(1e-14));
  CHECK(suggest_dt(rest, p, StrainVariant::Simplified, 0.5) == doctest::Approx(0.5 * wave(p.alpha)).epsilon(1e-14));
  // Large alpha: the bound grows linearly in alpha.
  p.alpha = 10.0;
  const double a10 = suggest_dt(rest, p, StrainVariant::Simplified, 1.0);
  p.alpha = 20.0;
  const double a20 = suggest_dt(rest, p, StrainVariant::Simplified, 1.0);
  CHECK(a20 / a10 == doctest::Approx(2.0).epsilon(1e-3));
  // A strained state can be limited by relaxation instead.
  p.alpha = 0.1;
  State s = smooth_state(g, p.P);
  const double dmax = [&] {
    const auto r = strain_rate(sym_gradient(s.u), p, StrainVariant::Simplified);
    return oracle::max_abs(r[0]);
  }();
  CHECK(suggest_dt(s, p, StrainVariant::Simplified, 1.0) ==
        doctest::Approx(std::min(wave(0.1), p.P / (p.E_mod * p.e_bar * p.e_bar * dmax))).epsilon(1e-14));
  CHECK_THROWS_AS(suggest_dt(s, p, StrainVariant::Simplified, 0.0), InvalidArgument);
  CHECK_THROWS_AS(suggest_dt(s, p, StrainVariant::Simplified, 1.5), InvalidArgument);
}

TEST_CASE("run_simulation bookkeeping") {
  const auto g = SpectralGrid::make(4);
  const auto p = PhysicalParams::nondimensional();
  const auto rhs = make_rhs(ForcingSpec{ForcingMode::Periodic, 1.0, {}}, p, StrainVariant::Simplified);
  const State s0 = smooth_state(g, p.P);
  const double dt = 1.0 / 64;

  SUBCASE("composition with single steps is bitwise") {
    State y = s0;
    for (int i = 0; i < 10; ++i) y = rk4_step(y, dt, rhs);
    const auto r = run_simulation(s0, 10 * dt, dt, rhs);
    CHECK(r.steps == 10);
    CHECK(r.final_state == y);
  }
  SUBCASE("same holds for a dt that is not a power of two") {
    const double h = 0.01;
    State y = s0;
    for (int i = 0; i < 10; ++i) y = rk4_step(y, h, rhs);
    const auto r = run_simulation(s0, 10 * h, h, rhs);
    CHECK(r.final_state.u == y.u);
    CHECK(r.final_state.sigma == y.sigma);
  }
  SUBCASE("callback count") {
    for (double cadence : {dt, 4 * dt, 0.1, 0.25}) {
      long count = 0;
      std::vector<double> times;
      run_simulation(s0, 0.5, dt, rhs, {RunCallback{cadence, [&](const State& s) {
                                           ++count;
                                           times.push_back(s.t);
                                         }}});
      CHECK(count == static_cast<long>(std::floor(0.5 / cadence + 1e-9)) + 1);
      CHECK(times.front() == 0.0);
    }
  }
  SUBCASE("final step is clipped onto T_final") {
    const auto r = run_simulation(s0, 0.3, 0.07, rhs);
    CHECK(r.final_state.t == 0.3);
    CHECK(r.steps == 5);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(run_simulation(s0, 0.0, dt, rhs), InvalidArgument);
    CHECK_THROWS_AS(run_simulation(s0, 1.0, 0.0, rhs), InvalidArgument);
  }
}

TEST_CASE("steady state is preserved") {
  for (auto p : {PhysicalParams::table1(), PhysicalParams::nondimensional()}) {
    const auto g = SpectralGrid::make(8);
    const State rest = State::rest(g, p.P);
    const auto rhs = make_rhs(kNoForcing, p, StrainVariant::Simplified);
    const auto r = run_simulation(rest, 100 * 0.01, 0.01, rhs);
    CHECK(r.final_state.u == rest.u);
    CHECK(r.final_state.sigma == rest.sigma);
  }
}

TEST_CASE("blow-up carries the last good state") {
  const auto g = SpectralGrid::make(4);
  const State s0 = smooth_state(g, 1.0);
  // dy/dt = y grows past the guard quickly.
  EvpRhs growth = [](const State& y) { return StateRate{1e3 * y.u, 1e3 * y.sigma}; };
  try {
    run_simulation(s0, 10.0, 0.01, growth);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    REQUIRE(e.last_good() != nullptr);
    CHECK(e.last_good()->t < e.stage_time());
    CHECK(e.last_good()->u.max_abs() <= kBlowUpFactor * std::max(1.0, s0.u.max_abs()));
  }
}
