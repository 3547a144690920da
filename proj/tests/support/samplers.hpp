#pragma once

// Random scenario generators shared by the unit and acceptance suites, plus
// small independent oracles. Everything here is test-only and deliberately
// avoids the library's computational paths where it serves as a cross-check.

#include <cmath>
#include <random>

#include "sirs/params.hpp"
#include "sirs/reproduction.hpp"

namespace testsup {

inline double uni(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Generic valid parameter set at desk scale. Transmission is drawn through
/// beta*N so population size and infection pressure stay decoupled.
inline sirs::Params<double> random_params(std::mt19937_64& rng, bool autonomous,
                                          double betaN_max = 3.0) {
  sirs::Params<double> p;
  p.d = uni(rng, 0.01, 0.5);
  p.alpha = uni(rng, 0.0, 1.0);
  p.sigma = uni(rng, 0.01, 1.0);
  p.mu = uni(rng, 0.0, 1.0);
  p.r_a = uni(rng, 0.01, 1.0);
  p.r_s = uni(rng, 0.01, 1.0);
  p.theta = uni(rng, 0.1, 0.9);
  p.omega = uni(rng, 0.5, 20.0);
  p.N = uni(rng, 10.0, 1000.0);
  p.beta1 = uni(rng, 0.0, betaN_max) / p.N;
  p.beta2 = autonomous ? p.beta1 : uni(rng, 0.0, betaN_max) / p.N;
  return p;
}

/// As above but with the interior hypotheses used by the persistence and
/// endemic-stability statements: 0 < mu < 1, alpha > 0, positive betas.
inline sirs::Params<double> random_params_interior(std::mt19937_64& rng, bool autonomous) {
  sirs::Params<double> p = random_params(rng, autonomous);
  p.mu = uni(rng, 0.05, 0.95);
  p.alpha = uni(rng, 0.05, 1.0);
  p.beta1 = uni(rng, 0.2, 3.0) / p.N;
  p.beta2 = autonomous ? p.beta1 : uni(rng, 0.2, 3.0) / p.N;
  return p;
}

/// Rescale both transmission rates so the monodromy spectral radius hits
/// `target`. rho grows monotonically with the common scale, so a log-scale
/// bisection converges; used to condition random draws on sub/supercritical
/// margins.
inline sirs::Params<double> with_rho_target(sirs::Params<double> p, double target) {
  auto rho_scaled = [&](double s) {
    sirs::Params<double> q = p;
    q.beta1 *= s;
    q.beta2 *= s;
    try {
      const double r = sirs::spectral_radius2(sirs::monodromy(q));
      return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    } catch (const std::overflow_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = 1e-4, hi = 1e4;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (rho_scaled(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi / lo < 1.0 + 1e-12) break;
  }
  const double s = std::sqrt(lo * hi);
  p.beta1 *= s;
  p.beta2 *= s;
  return p;
}

inline sirs::Params<double> random_subcritical(std::mt19937_64& rng, bool autonomous,
                                               double rho_lo = 0.3, double rho_hi = 0.9) {
  sirs::Params<double> p = random_params(rng, autonomous);
  p.beta1 = std::max(p.beta1, 0.05 / p.N);
  p.beta2 = autonomous ? p.beta1 : std::max(p.beta2, 0.05 / p.N);
  return with_rho_target(p, uni(rng, rho_lo, rho_hi));
}

inline sirs::Params<double> random_supercritical(std::mt19937_64& rng, bool autonomous,
                                                 double rho_lo = 1.2, double rho_hi = 2.5) {
  sirs::Params<double> p = random_params_interior(rng, autonomous);
  return with_rho_target(p, uni(rng, rho_lo, rho_hi));
}

/// Autonomous set rescaled to an exact closed-form reproduction number
/// (R0 is linear in beta, so the scale is one division).
inline sirs::Params<double> random_autonomous_with_r0(std::mt19937_64& rng, double r0_target) {
  sirs::Params<double> p = random_params_interior(rng, true);
  const double r0 = sirs::r0_closed_form(p);
  p.beta1 *= r0_target / r0;
  p.beta2 = p.beta1;
  return p;
}

/// Power-method spectral radius oracle for nonnegative matrices: the norm
/// ratio ||A^{k+1}||_1 / ||A^k||_1 at k = 64, evaluated on a normalized copy
/// to dodge overflow. Independent of the trace/determinant route.
inline double power_radius_oracle(const sirs::Mat2<double>& A) {
  const double s = A.cwiseAbs().colwise().sum().maxCoeff();
  if (s == 0) return 0;
  const sirs::Mat2<double> B = A / s;
  sirs::Mat2<double> P = sirs::Mat2<double>::Identity();
  for (int i = 0; i < 64; ++i) P = (P * B).eval();
  const double n64 = P.cwiseAbs().colwise().sum().maxCoeff();
  P = (P * B).eval();
  const double n65 = P.cwiseAbs().colwise().sum().maxCoeff();
  return n64 > 0 ? s * n65 / n64 : 0;
}

/// The baseline parameter set used by the worked examples.
inline sirs::Params<double> baseline(double beta = 0.004, double theta = 0.5,
                                     double omega = 10.0) {
  return {0.02, 0.3, 0.05, 0.4, 0.1, 0.2, beta, beta, theta, omega, 100.0};
}

}  // namespace testsup
