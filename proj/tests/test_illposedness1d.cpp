#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "vevp/illposedness1d.hpp"

using namespace vevp;

namespace {

// Modal matrix acting on (uhat, sigmahat) for wavenumber k.
Eigen::Matrix2cd modal_matrix(const Background1D& bg, int k, double alpha) {
  const double a = 2.5 / bg.P * std::sqrt(bg.ubar_x * bg.ubar_x + bg.eps * bg.eps);
  const double s = std::sqrt(bg.ubar_x * bg.ubar_x + bg.eps * bg.eps);
  const double c = 1.0 - 2.5 / bg.P * bg.sigbar * bg.ubar_x / s - 0.5 * bg.ubar_x / s;
  const double m = 1.0 / (1.0 + 4 * M_PI * M_PI * alpha * alpha * k * k);
  const std::complex<double> iw(0.0, 2 * M_PI * k);
  Eigen::Matrix2cd A;
  A << 0.0, iw, m * c * iw, -m * a;
  return A;
}

std::array<Complex, 2> oracle_roots(const Background1D& bg, int k, double alpha) {
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(modal_matrix(bg, k, alpha));
  Complex l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
  // Conjugate pairs tie on the real part; put the positive imaginary part first.
  const double tol = 1e-12 * std::max(1.0, std::abs(l0));
  if (l1.real() > l0.real() + tol || (std::abs(l1.real() - l0.real()) <= tol && l1.imag() > l0.imag()))
    std::swap(l0, l1);
  return {l0, l1};
}

// Exact modal solution x(t) = V exp(Lambda t) V^-1 x0.
Eigen::Vector2cd modal_exact(const Background1D& bg, int k, double alpha, Eigen::Vector2cd x0, double t) {
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(modal_matrix(bg, k, alpha));
  const Eigen::Matrix2cd V = es.eigenvectors();
  Eigen::Vector2cd e;
  for (int i = 0; i < 2; ++i) e[i] = std::exp(es.eigenvalues()[i] * t);
  return V * e.asDiagonal() * V.inverse() * x0;
}

const Background1D kUnstable{1.0, 1.0, 1.0, 1e-3};

}  // namespace

TEST_CASE("coefficients") {
  CHECK(ellipticity_coefficient(Background1D{}) == 1.0);
  CHECK(damping_coefficient(Background1D{}) == doctest::Approx(2.5e-3).epsilon(1e-14));
  // eps -> 0 with ubar_x > 0: c -> 1 - 5 sigbar / 2P - 1/2.
  CHECK(ellipticity_coefficient({1.0, 1.0, 1.0, 0.0}) == -2.0);
  CHECK(ellipticity_coefficient({1.0, 0.0, 1.0, 0.0}) == 0.5);
  CHECK(ellipticity_coefficient({-1.0, 1.0, 1.0, 0.0}) == 4.0);
  CHECK(ellipticity_coefficient(kUnstable) < 0.0);
  CHECK(damping_coefficient({3.0, 0.0, 2.0, 4.0}) == doctest::Approx(2.5 / 2.0 * 5.0).epsilon(1e-14));
  CHECK_THROWS_AS(ellipticity_coefficient({0.0, 0.0, 1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(damping_coefficient({0.0, 0.0, 0.0, 1.0}), InvalidArgument);
}

TEST_CASE("dispersion relation against the eigenvalues of the modal matrix") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Background1D bg{u(rng), u(rng), 0.5 + std::abs(u(rng)), std::abs(u(rng)) * 0.1 + 1e-4};
    const int k = 1 + trial % 40;
    const double alpha = (trial % 3) * 0.05;
    const auto got = dispersion_growth_rate(bg, k, alpha);
    const auto ref = oracle_roots(bg, k, alpha);
    const double scale = std::max(1.0, std::abs(ref[0]));
    CHECK(std::abs(got[0] - ref[0]) <= 1e-10 * scale);
    CHECK(std::abs(got[1] - ref[1]) <= 1e-10 * scale);
  }
  CHECK(dispersion_growth_rate(kUnstable, 0, 0.0)[0] == Complex(0.0));
  CHECK_THROWS_AS(dispersion_growth_rate(kUnstable, -1, 0.0), InvalidArgument);
}

TEST_CASE("growth is proportional to k without regularisation and bounded with it") {
  const double c = ellipticity_coefficient(kUnstable);
  double prev = 0.0;
  for (int k : {1, 2, 4, 8, 16, 32, 64, 128}) {
    const double r = dispersion_growth_rate(kUnstable, k, 0.0)[0].real();
    CHECK(r > prev);
    prev = r;
    // lambda = -a/2 + sqrt(a^2/4 - c w^2) ~ w sqrt(-c) - a/2 for large w.
    const double a = damping_coefficient(kUnstable);
    if (k >= 8) CHECK(r == doctest::Approx(2 * M_PI * k * std::sqrt(-c) - 0.5 * a).epsilon(1e-3));
  }
  const double alpha = 0.05;
  const double bound = std::sqrt(-c) / alpha;
  for (int k : {1, 8, 64, 512, 4096}) CHECK(dispersion_growth_rate(kUnstable, k, alpha)[0].real() < bound);
  // A hyperbolic background has no growing mode.
  const Background1D stable{0.0, 0.0, 1.0, 1e-2};
  for (int k : {1, 8, 64}) CHECK(dispersion_growth_rate(stable, k, 0.0)[0].real() <= 0.0);
}

TEST_CASE("rhs_1d on constant states") {
  const auto g = SpectralGrid1D::make(8);
  State1D s(g);
  for (double& v : s.sigma.values) v = 0.4;
  const double P = 2.0, eps = 0.3;
  const auto r = rhs_1d(s, P, eps, 0.1);
  for (std::size_t i = 0; i < r.du.values.size(); ++i) {
    CHECK(std::abs(r.du.values[i]) <= 1e-15);
    CHECK(r.dsigma.values[i] == doctest::Approx(-2.5 * eps / P * 0.4 - 0.5 * eps).epsilon(1e-13));
  }
  CHECK_THROWS_AS(rhs_1d(s, 0.0, eps, 0.0), InvalidArgument);
  CHECK_THROWS_AS(rhs_1d(s, P, eps, -1.0), InvalidArgument);
}

TEST_CASE("linearisation matches a finite difference of the nonlinear system") {
  // About u = 0, sigma = sigbar: S has zero derivative at u_x = 0.
  const double P = 1.0, eps = 0.5, sigbar = 0.3, alpha = 0.05;
  const Background1D bg{0.0, sigbar, P, eps};
  const auto g = SpectralGrid1D::make(8);
  const auto du = ScalarField1D::from_function(g, [](double x) { return std::sin(kTwoPi * x) + 0.3 * std::cos(3 * kTwoPi * x); });
  const auto ds = ScalarField1D::from_function(g, [](double x) { return std::cos(2 * kTwoPi * x); });
  State1D base(g);
  for (double& v : base.sigma.values) v = sigbar;
  const auto lin = linearized_rhs_1d(State1D(du, ds, 0.0), bg, alpha);
  const auto f0 = rhs_1d(base, P, eps, alpha);
  double err[2];
  int i = 0;
  for (double h : {1e-3, 5e-4}) {
    State1D plus = base, minus = base;
    for (std::size_t j = 0; j < du.values.size(); ++j) {
      plus.u.values[j] += h * du.values[j];
      plus.sigma.values[j] += h * ds.values[j];
      minus.u.values[j] -= h * du.values[j];
      minus.sigma.values[j] -= h * ds.values[j];
    }
    const auto fp = rhs_1d(plus, P, eps, alpha), fm = rhs_1d(minus, P, eps, alpha);
    double e = 0.0;
    for (std::size_t j = 0; j < du.values.size(); ++j) {
      e = std::max(e, std::abs((fp.du.values[j] - fm.du.values[j]) / (2 * h) - lin.du.values[j]));
      e = std::max(e, std::abs((fp.dsigma.values[j] - fm.dsigma.values[j]) / (2 * h) - lin.dsigma.values[j]));
    }
    err[i++] = e;
  }
  (void)f0;
  CHECK(err[0] < 1e-3);
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("field evolution of the linearised system matches the modal exponential") {
  const auto g = SpectralGrid1D::make(16);
  const int k = 3;
  const double alpha = 0.02, T = 0.2;
  const auto u0 = ScalarField1D::from_function(g, [&](double x) { return 1e-3 * std::cos(kTwoPi * k * x); });
  State1D s(u0, ScalarField1D(g), 0.0);
  const auto out = evolve_linearized_1d(s, kUnstable, alpha, T, 1e-4);
  CHECK(out.t == T);
  const auto uh = g.forward(out.u.values);
  const auto sh = g.forward(out.sigma.values);
  const auto exact = modal_exact(kUnstable, k, alpha, Eigen::Vector2cd(0.5e-3, 0.0), T);
  CHECK(std::abs(uh[k] - exact[0]) <= 1e-8 * std::abs(exact[0]));
  CHECK(std::abs(sh[k] - exact[1]) <= 1e-8 * std::abs(exact[1]));
  for (int j = 0; j < static_cast<int>(uh.size()); ++j)
    if (j != k) CHECK(std::abs(uh[j]) <= 1e-10 * std::abs(exact[0]));

  const auto zero = evolve_linearized_1d(State1D(g), kUnstable, 0.0, T, 1e-3);
  for (double v : zero.u.values) CHECK(v == 0.0);
  for (double v : zero.sigma.values) CHECK(v == 0.0);
}

TEST_CASE("nonlinear 1D evolution stays near a damped constant state") {
  const auto g = SpectralGrid1D::make(8);
  State1D s(g);
  const double P = 1.0, eps = 0.2;
  const auto out = evolve_1d(s, P, eps, 0.0, 1.0, 1e-3);
  // sigma' = -(5 eps / 2P) sigma - eps/2 from zero: sigma -> -P/5.
  const double a = 2.5 * eps / P;
  const double expected = -0.5 * eps / a * (1.0 - std::exp(-a));
  for (double v : out.sigma.values) CHECK(v == doctest::Approx(expected).epsilon(1e-10));
  for (double v : out.u.values) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("instability experiment recovers the predicted rates") {
  InstabilityOptions opts;
  opts.N = 64;
  opts.T = 1.0;
  opts.dt = 1e-4;
  const auto rows = run_instability_experiment(kUnstable, {2, 4, 8, 16}, opts);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.predicted_rate == dispersion_growth_rate(kUnstable, r.k, 0.0)[0].real());
    CHECK(!r.clipped);
    CHECK(r.relative_error < 0.02);
    MESSAGE("k=" << r.k << " predicted " << r.predicted_rate << " measured " << r.measured_rate);
  }
  // Rates roughly double with k.
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].measured_rate / rows[i - 1].measured_rate == doctest::Approx(2.0).epsilon(0.05));

  SUBCASE("huge growth is clipped rather than overflowing") {
    InstabilityOptions big = opts;
    big.T = 5.0;
    big.dt = 1e-4;
    const auto r = run_instability_experiment(kUnstable, {64}, big);
    CHECK(r[0].clipped);
    CHECK(std::isfinite(r[0].measured_rate));
    CHECK(r[0].relative_error < 0.02);
  }
  SUBCASE("argument checks") {
    InstabilityOptions bad = opts;
    bad.seed_amp = 0.0;
    CHECK_THROWS_AS(run_instability_experiment(kUnstable, {2}, bad), InvalidArgument);
    CHECK_THROWS_AS(run_instability_experiment(kUnstable, {65}, opts), InvalidArgument);
    CHECK_THROWS_AS(run_instability_experiment(kUnstable, {0}, opts), InvalidArgument);
  }
}
