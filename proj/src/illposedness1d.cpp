#include "vevp/illposedness1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vevp/time_integration.hpp"

namespace vevp {

void axpy(State1D& y, double a, const Rate1D& k) {
  for (std::size_t i = 0; i < y.u.values.size(); ++i) {
    y.u.values[i] += a * k.du.values[i];
    y.sigma.values[i] += a * k.dsigma.values[i];
  }
}

bool is_finite(const Rate1D& k) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(k.du.values) && ok(k.dsigma.values);
}

namespace {

void require_positive_P(double P, const char* where) {
  if (!(P > 0.0)) throw InvalidArgument(std::string(where) + ": P must be > 0");
}

}  // namespace

Rate1D rhs_1d(const State1D& state, double P, double eps, double alpha) {
  require_positive_P(P, "rhs_1d");
  if (eps < 0.0) throw InvalidArgument("rhs_1d: eps must be >= 0");
  if (alpha < 0.0) throw InvalidArgument("rhs_1d: alpha must be >= 0");
  const auto ux = derivative_1d(state.u);
  ScalarField1D bracket(state.u.grid);
  for (std::size_t i = 0; i < bracket.values.size(); ++i) {
    const double s = std::sqrt(ux.values[i] * ux.values[i] + eps * eps);
    bracket.values[i] = ux.values[i] - 2.5 * s / P * state.sigma.values[i] - 0.5 * s;
  }
  return {derivative_1d(state.sigma), voigt_invert_1d(bracket, alpha)};
}

double damping_coefficient(const Background1D& bg) {
  require_positive_P(bg.P, "damping_coefficient");
  return 2.5 / bg.P * std::hypot(bg.ubar_x, bg.eps);
}

double ellipticity_coefficient(const Background1D& bg) {
  require_positive_P(bg.P, "ellipticity_coefficient");
  const double s = std::hypot(bg.ubar_x, bg.eps);
  if (s == 0.0) throw InvalidArgument("ellipticity_coefficient: undefined for ubar_x = 0 with eps = 0");
  const double r = bg.ubar_x / s;
  return 1.0 - 2.5 / bg.P * bg.sigbar * r - 0.5 * r;
}

Rate1D linearized_rhs_1d(const State1D& pert, const Background1D& bg, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("linearized_rhs_1d: alpha must be >= 0");
  const double a = damping_coefficient(bg);
  const double c = ellipticity_coefficient(bg);
  const auto ux = derivative_1d(pert.u);
  ScalarField1D bracket(pert.u.grid);
  for (std::size_t i = 0; i < bracket.values.size(); ++i)
    bracket.values[i] = -a * pert.sigma.values[i] + c * ux.values[i];
  return {derivative_1d(pert.sigma), voigt_invert_1d(bracket, alpha)};
}

std::array<Complex, 2> dispersion_growth_rate(const Background1D& bg, int k, double alpha) {
  if (k < 0) throw InvalidArgument("dispersion_growth_rate: k must be >= 0");
  const double a = damping_coefficient(bg);
  const double c = ellipticity_coefficient(bg);
  const double m = voigt_multiplier(alpha, double(k) * k);
  const double w = kTwoPi * k;
  // lambda^2 + b lambda + q = 0
  const double b = a * m;
  const double q = c * m * w * w;
  const double disc = b * b - 4.0 * q;
  if (disc >= 0.0) {
    // Cancellation-free form of the real roots.
    const double r = -0.5 * (b + std::copysign(std::sqrt(disc), b == 0.0 ? 1.0 : b));
    const Complex l1 = r;
    const Complex l2 = r != 0.0 ? Complex(q / r) : Complex(0.0);
    return l1.real() >= l2.real() ? std::array{l1, l2} : std::array{l2, l1};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {Complex(-0.5 * b, im), Complex(-0.5 * b, -im)};
}

namespace {

template <class Rhs>
State1D evolve(State1D y, double t_final, double dt, Rhs&& rhs) {
  if (!(dt > 0.0)) throw InvalidArgument("evolve_1d: dt must be > 0");
  while (y.t < t_final) {
    const double remaining = t_final - y.t;
    const bool last = remaining <= dt * (1.0 + 1e-9);
    y = rk4_step(y, last && remaining < dt * (1.0 - 1e-9) ? remaining : dt, rhs);
    if (last) y.t = t_final;
  }
  return y;
}

// Fourier coefficients (k = 0..N) of the linearised perturbation.
struct ModalState {
  std::vector<Complex> u, sigma;
  double t = 0.0;
};

struct ModalRate {
  std::vector<Complex> du, dsigma;
};

void axpy(ModalState& y, double a, const ModalRate& k) {
  for (std::size_t i = 0; i < y.u.size(); ++i) {
    y.u[i] += a * k.du[i];
    y.sigma[i] += a * k.dsigma[i];
  }
}

bool is_finite(const ModalRate& k) {
  for (std::size_t i = 0; i < k.du.size(); ++i)
    if (!std::isfinite(std::abs(k.du[i])) || !std::isfinite(std::abs(k.dsigma[i]))) return false;
  return true;
}

double slope_fit(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
  }
  const double tm = st / n, ym = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

State1D evolve_linearized_1d(State1D pert, const Background1D& bg, double alpha, double t_final, double dt) {
  return evolve(std::move(pert), t_final, dt, [&](const State1D& s) { return linearized_rhs_1d(s, bg, alpha); });
}

State1D evolve_1d(State1D state, double P, double eps, double alpha, double t_final, double dt) {
  return evolve(std::move(state), t_final, dt, [&](const State1D& s) { return rhs_1d(s, P, eps, alpha); });
}

std::vector<GrowthMeasurement> run_instability_experiment(const Background1D& bg, const std::vector<int>& k_list,
                                                          const InstabilityOptions& opts) {
  if (!(opts.seed_amp > 0.0)) throw InvalidArgument("run_instability_experiment: seed_amp must be > 0");
  if (!(opts.T > 0.0) || !(opts.dt > 0.0)) throw InvalidArgument("run_instability_experiment: T and dt must be > 0");
  if (!(opts.fit_fraction > 0.0 && opts.fit_fraction <= 1.0))
    throw InvalidArgument("run_instability_experiment: fit_fraction must lie in (0, 1]");
  if (opts.alpha < 0.0) throw InvalidArgument("run_instability_experiment: alpha must be >= 0");
  const int n = opts.N;
  if (n < 1) throw InvalidArgument("run_instability_experiment: N must be >= 1");

  const double a = damping_coefficient(bg);
  const double c = ellipticity_coefficient(bg);
  std::vector<double> mult(n + 1), wave(n + 1);
  for (int k = 0; k <= n; ++k) {
    mult[k] = voigt_multiplier(opts.alpha, double(k) * k);
    wave[k] = kTwoPi * k;
  }
  auto rhs = [&](const ModalState& s) {
    ModalRate r{std::vector<Complex>(n + 1), std::vector<Complex>(n + 1)};
    const Complex i(0.0, 1.0);
    for (int k = 0; k <= n; ++k) {
      r.du[k] = i * wave[k] * s.sigma[k];
      r.dsigma[k] = mult[k] * (-a * s.sigma[k] + c * i * wave[k] * s.u[k]);
    }
    return r;
  };

  std::vector<GrowthMeasurement> out;
  for (int k : k_list) {
    if (k < 1 || k > n)
      throw InvalidArgument("run_instability_experiment: k=" + std::to_string(k) + " outside 1..N");
    GrowthMeasurement g;
    g.k = k;
    g.predicted_rate = dispersion_growth_rate(bg, k, opts.alpha)[0].real();

    // u = seed_amp cos(2 pi k x) has coefficient seed_amp/2 on +k.
    ModalState y{std::vector<Complex>(n + 1), std::vector<Complex>(n + 1), 0.0};
    y.u[k] = 0.5 * opts.seed_amp;
    std::vector<double> ts{0.0}, logs{std::log(std::abs(y.u[k]))};
    while (y.t < opts.T) {
      const double remaining = opts.T - y.t;
      const bool last = remaining <= opts.dt * (1.0 + 1e-9);
      y = rk4_step(y, last && remaining < opts.dt * (1.0 - 1e-9) ? remaining : opts.dt, rhs);
      if (last) y.t = opts.T;
      const double amp = std::hypot(std::abs(y.u[k]), std::abs(y.sigma[k]));
      if (!(amp < kAmplitudeCeiling)) {
        g.clipped = true;
        break;
      }
      ts.push_back(y.t);
      logs.push_back(std::log(amp));
    }

    const double t_end = ts.back();
    const double t_start = t_end * (1.0 - opts.fit_fraction);
    std::vector<double> ft, fy;
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ts[i] >= t_start) {
        ft.push_back(ts[i]);
        fy.push_back(logs[i]);
      }
    g.measured_rate = slope_fit(ft, fy);
    g.relative_error = std::abs(g.measured_rate - g.predicted_rate) / std::max(std::abs(g.predicted_rate), 1.0);
    out.push_back(g);
  }
  return out;
}

}  // namespace vevp
