#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vevp/diagnostics.hpp"
#include "vevp/model.hpp"

using namespace vevp;

namespace {

TensorField constant_tensor(const SpectralGrid& g, std::array<double, 4> v) {
  return TensorField::from_function(g, [v](double, double) { return v; });
}

// Plain 2x2 arithmetic of R(sigma, D), written directly from the constitutive law.
std::array<double, 4> relaxation_oracle(std::array<double, 4> s, double d, double P, double e) {
  const double tr = s[0] + s[3];
  std::array<double, 4> dev = {s[0] - tr / 2, s[1], s[2], s[3] - tr / 2};
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i) r[i] = e * e * d / P * dev[i];
  for (int i : {0, 3}) r[i] += d / (2 * P) * tr + d / 2;
  return r;
}

}  // namespace

TEST_CASE("parameter presets and validation") {
  CHECK_NOTHROW(PhysicalParams::table1().validate());
  CHECK_NOTHROW(PhysicalParams::nondimensional().validate());
  auto p = PhysicalParams::table1();
  CHECK(p.P == 27.5e3);
  CHECK(p.E_mod == 0.25);
  CHECK(p.theta == doctest::Approx(25.0 * M_PI / 180.0));
  p.theta = 0.8;
  try {
    p.validate();
    FAIL("expected an exception");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("theta") != std::string::npos);
  }
  p = PhysicalParams::table1();
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK_NOTHROW(p.validate(true));
  p = PhysicalParams::table1();
  p.e_bar = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  for (auto v : {StrainVariant::Simplified, StrainVariant::Original, StrainVariant::SmoothedMax})
    CHECK(strain_variant_from_string(to_string(v)) == v);
  for (auto m : {ForcingMode::Zero, ForcingMode::Reference, ForcingMode::Periodic})
    CHECK(forcing_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(strain_variant_from_string("max"), InvalidArgument);
}

TEST_CASE("symmetric gradient") {
  std::mt19937_64 rng(11);
  const auto g = SpectralGrid::make(8);
  const auto t1 = oracle::random_trig(8, rng), t2 = oracle::random_trig(8, rng);
  VectorField u(g);
  const auto s1 = t1.sample(g), s2 = t2.sample(g);
  std::copy(s1[0].begin(), s1[0].end(), u[0].begin());
  std::copy(s2[0].begin(), s2[0].end(), u[1].begin());
  const auto d = sym_gradient(u);
  const auto exact = TensorField::from_function(g, [&](double x, double y) {
    const double off = 0.5 * (t1.deriv(x, y, 0, 1) + t2.deriv(x, y, 1, 0));
    return std::array{t1.deriv(x, y, 1, 0), off, off, t2.deriv(x, y, 0, 1)};
  });
  for (std::size_t c = 0; c < 4; ++c) CHECK(oracle::max_abs_diff(d[c], exact[c]) < 1e-11 * oracle::max_abs(exact[c]));
  CHECK(symmetry_defect(d) == 0.0);
}

TEST_CASE("strain rates: closed forms") {
  const auto g = SpectralGrid::make(2);
  const double tol = 1e-14;
  auto all_equal = [&](const ScalarField& f, double expect) {
    for (double v : f[0]) CHECK(v == doctest::Approx(expect).epsilon(tol));
  };
  all_equal(strain_rate_simplified(TensorField(g), 0.1), 0.1);
  all_equal(strain_rate_simplified(constant_tensor(g, {1, 0, 0, 1}), 0.0), std::sqrt(2.0));
  for (double c : {0.0, 0.7, -2.0})
    all_equal(strain_rate_original(constant_tensor(g, {c, 0, 0, c}), 2.0, 0.3), std::sqrt(4 * c * c + 0.09));
  for (double e : {1.5, 2.0, 3.0})
    all_equal(strain_rate_original(constant_tensor(g, {0, 0.4, 0.4, 0}), e, 0.1), std::sqrt(4 * 0.16 / (e * e) + 0.01));
  CHECK_THROWS_AS(strain_rate_original(TensorField(g), 1.0, 0.1), InvalidArgument);

  // u = (u(x), 0) with e = 2: rate sqrt(5/4) |u_x|.
  const auto g8 = SpectralGrid::make(8);
  const auto u = VectorField::from_function(g8, [](double x, double) { return std::array{std::sin(kTwoPi * x), 0.0}; });
  const auto r = strain_rate_original(sym_gradient(u), 2.0, 0.0);
  for (int ix = 0; ix < g8.size(); ++ix)
    CHECK(r.at(0, ix, 3) == doctest::Approx(std::sqrt(1.25) * std::abs(kTwoPi * std::cos(kTwoPi * g8.coordinate(ix))))
                                .scale(1.0)
                                .epsilon(1e-12));
}

TEST_CASE("smoothed maximum") {
  std::mt19937_64 rng(12);
  const auto g = SpectralGrid::make(4);
  ScalarField dbar(g);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : dbar[0]) v = u(rng);
  const double eps = 0.4;
  const auto sharp = strain_rate_smoothed_max(dbar, eps, 0.0);
  for (std::size_t p = 0; p < g.points(); ++p) CHECK(sharp[0][p] == std::max(dbar[0][p], eps));

  double prev = 1e300;
  for (double gamma : {0.1, 0.05, 0.025}) {
    const auto s = strain_rate_smoothed_max(dbar, eps, gamma);
    double worst = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
      CHECK(s[0][p] >= std::max(dbar[0][p], eps));
      worst = std::max(worst, s[0][p] - std::max(dbar[0][p], eps));
    }
    CHECK(worst <= gamma + 1e-15);  // O(gamma) approach to the sharp maximum
    CHECK(worst < prev);
    prev = worst;
  }
  ScalarField at_eps(g);
  for (double& v : at_eps[0]) v = eps;
  const auto smooth_at_eps = strain_rate_smoothed_max(at_eps, eps, 0.1);
  for (double v : smooth_at_eps[0]) CHECK(v == doctest::Approx(eps + 0.1).epsilon(1e-15));
}

TEST_CASE("strain-rate difference is bounded by the velocity-gradient difference") {
  std::mt19937_64 rng(13);
  const auto g = SpectralGrid::make(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u1 = oracle::random_vector(g, rng), u2 = oracle::random_vector(g, rng);
    for (double eps : {0.0, 0.1}) {
      ScalarField diff = strain_rate_simplified(sym_gradient(u1), eps) - strain_rate_simplified(sym_gradient(u2), eps);
      const double lhs = l2_norm(diff);
      const double rhs = std::sqrt(gradient_norm_squared(VectorField(u1 - u2)));
      CHECK(lhs <= rhs * (1 + 1e-12));
    }
  }
}

TEST_CASE("rheology relaxation") {
  std::mt19937_64 rng(14);
  const auto g = SpectralGrid::make(4);
  const auto sigma = oracle::random_tensor(g, rng, false);
  ScalarField d(g);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (double& v : d[0]) v = u(rng);
  const double P = 2.5, e = 2.0;
  const auto r = rheology_relaxation(sigma, d, P, e);
  for (std::size_t p = 0; p < g.points(); ++p) {
    const auto o = relaxation_oracle({sigma[0][p], sigma[1][p], sigma[2][p], sigma[3][p]}, d[0][p], P, e);
    for (std::size_t c = 0; c < 4; ++c) CHECK(r[c][p] == doctest::Approx(o[c]).scale(1.0).epsilon(1e-13));
  }
  // The zero-strain steady stress is annihilated exactly.
  const auto rest = constant_tensor(g, {-P / 2, 0, 0, -P / 2});
  CHECK(rheology_relaxation(rest, d, P, e).max_abs() == 0.0);
  CHECK_THROWS_AS(rheology_relaxation(sigma, d, 0.0, e), InvalidArgument);
}

TEST_CASE("drag laws") {
  std::mt19937_64 rng(15);
  const auto g = SpectralGrid::make(4);
  const auto p = PhysicalParams::table1();
  const auto wind = oracle::random_vector(g, rng);
  const auto ocean = oracle::random_vector(g, rng);
  const auto u = oracle::random_vector(g, rng);
  const auto ta = wind_stress(wind, p);
  const auto tw = ocean_stress(ocean, u, p);
  for (std::size_t q = 0; q < g.points(); ++q) {
    auto law = [](double c, double vx, double vy, double ang, double out[2]) {
      const double mag = std::sqrt(vx * vx + vy * vy);
      // V cos + V_perp sin with V_perp = (-V2, V1)
      out[0] = c * mag * (vx * std::cos(ang) - vy * std::sin(ang));
      out[1] = c * mag * (vy * std::cos(ang) + vx * std::sin(ang));
    };
    double a[2], w[2];
    law(p.c_a * p.rho_a, wind[0][q], wind[1][q], p.phi, a);
    law(p.c_w * p.rho_w, ocean[0][q] - u[0][q], ocean[1][q] - u[1][q], p.theta, w);
    for (int i = 0; i < 2; ++i) {
      CHECK(ta[i][q] == doctest::Approx(a[i]).scale(1.0).epsilon(1e-14));
      CHECK(tw[i][q] == doctest::Approx(w[i]).scale(1.0).epsilon(1e-12));
    }
  }
  const auto pu = perp(u);
  CHECK(pu[0][5] == -u[1][5]);
  CHECK(pu[1][5] == u[0][5]);
}

TEST_CASE("forcing fields") {
  const auto g = SpectralGrid::make(4);
  const int ix = 3, iy = 7;
  const double x = g.coordinate(ix), y = g.coordinate(iy), t = 0.3;
  ForcingSpec spec;
  spec.period = 2.0;

  spec.mode = ForcingMode::Reference;
  auto f = eval_forcing(spec, g, t);
  const double amp = std::sin(2 * M_PI * t / 2.0) - 3.0;
  CHECK(f.ocean.at(0, ix, iy) == doctest::Approx(0.1 * (2 * y - 1)));
  CHECK(f.ocean.at(1, ix, iy) == doctest::Approx(-0.1 * (2 * x - 1)));
  CHECK(f.wind.at(0, ix, iy) == doctest::Approx(5 + amp * std::sin(2 * M_PI * x) * std::sin(M_PI * y)));
  CHECK(f.wind.at(1, ix, iy) == doctest::Approx(5 + amp * std::sin(2 * M_PI * y) * std::sin(M_PI * x)));

  spec.mode = ForcingMode::Periodic;
  f = eval_forcing(spec, g, t);
  CHECK(f.ocean.at(0, ix, iy) == doctest::Approx(-0.1 * std::sin(2 * M_PI * y)));
  CHECK(f.ocean.at(1, ix, iy) == doctest::Approx(0.1 * std::sin(2 * M_PI * x)));
  CHECK(f.wind.at(0, ix, iy) == doctest::Approx(5 + amp * std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y)));
  CHECK(out_of_band_ratio(g, f.wind[0]) < 1e-14);

  spec.mode = ForcingMode::Zero;
  spec.topography = [](double x, double y) { return std::cos(2 * M_PI * x) * std::sin(4 * M_PI * y); };
  f = eval_forcing(spec, g, t);
  CHECK(f.wind.max_abs() == 0.0);
  CHECK(f.ocean.max_abs() == 0.0);
  CHECK(f.grad_h0.at(0, ix, iy) == doctest::Approx(-2 * M_PI * std::sin(2 * M_PI * x) * std::sin(4 * M_PI * y)));
  CHECK(f.grad_h0.at(1, ix, iy) == doctest::Approx(4 * M_PI * std::cos(2 * M_PI * x) * std::cos(4 * M_PI * y)));
}

TEST_CASE("momentum right-hand side assembles its terms") {
  std::mt19937_64 rng(16);
  const auto g = SpectralGrid::make(8);
  auto p = PhysicalParams::nondimensional();
  p.m = 2.0;
  State s(oracle::random_vector(g, rng), oracle::random_tensor(g, rng), 0.4);
  ForcingSpec spec{ForcingMode::Reference, 1.0, [](double x, double y) { return std::sin(2 * M_PI * (x + y)); }};
  const auto rhs = momentum_rhs(s, spec, p);

  const auto f = eval_forcing(spec, g, s.t);
  VectorField drag = wind_stress(f.wind, p) + ocean_stress(f.ocean, s.u, p);
  VectorField expect = galerkin_project(drag, 8) + divergence_sym_tensor(s.sigma);
  expect *= 1.0 / p.m;
  expect.axpy(p.Omega, perp(s.u)).axpy(-p.g, f.grad_h0);
  for (std::size_t c = 0; c < 2; ++c) CHECK(oracle::max_abs_diff(rhs[c], expect[c]) < 1e-12 * oracle::max_abs(expect[c]));

  // Linear in sigma when everything else vanishes.
  State z(g);
  z.sigma = s.sigma;
  ForcingSpec none{ForcingMode::Zero, 1.0, {}};
  const auto r1 = momentum_rhs(z, none, p);
  z.sigma *= 2.0;
  const auto r2 = momentum_rhs(z, none, p);
  CHECK(VectorField(r2 - 2.0 * r1).max_abs() < 1e-12 * r2.max_abs());
}

TEST_CASE("stress right-hand side assembles its terms") {
  std::mt19937_64 rng(17);
  const auto g = SpectralGrid::make(8);
  const auto p = PhysicalParams::nondimensional();
  for (auto variant : {StrainVariant::Simplified, StrainVariant::Original, StrainVariant::SmoothedMax}) {
    State s(oracle::random_vector(g, rng), oracle::random_tensor(g, rng), 0.0);
    const auto rhs = stress_rhs(s, p, variant);
    const auto d = sym_gradient(s.u);
    TensorField inner = d - rheology_relaxation(s.sigma, strain_rate(d, p, variant), p.P, p.e_bar);
    TensorField expect = voigt_invert(galerkin_project(inner, 8), p.alpha);
    expect *= p.E_mod;
    for (std::size_t c = 0; c < 4; ++c) CHECK(oracle::max_abs_diff(rhs[c], expect[c]) < 1e-12 * expect.max_abs());
    CHECK(symmetry_defect(rhs) == 0.0);
  }
}

TEST_CASE("rest state is a fixed point of the right-hand side") {
  for (auto p : {PhysicalParams::table1(), PhysicalParams::nondimensional()}) {
    const auto g = SpectralGrid::make(8);
    const auto s = State::rest(g, p.P);
    const auto r = evp_rhs(s, ForcingSpec{ForcingMode::Zero, 1.0, {}}, p, StrainVariant::Simplified);
    CHECK(r.du.max_abs() == 0.0);
    CHECK(r.dsigma.max_abs() == 0.0);
  }
}
