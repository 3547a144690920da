#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sirs/model.hpp"
#include "sirs/params.hpp"
#include "sirs/reproduction.hpp"
#include "sirs/smallmat.hpp"
#include "sirs/types.hpp"

namespace sirs {

enum class EquilibriumKind { DiseaseFree, Endemic, AsymptomaticFree, SymptomaticFree };
enum class Stability { Stable, Unstable, SaddleNode, Saddle };

inline const char* kind_name(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::DiseaseFree: return "disease-free";
    case EquilibriumKind::Endemic: return "endemic";
    case EquilibriumKind::AsymptomaticFree: return "asymptomatic-free";
    default: return "symptomatic-free";
  }
}

inline const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::SaddleNode: return "saddle-node";
    default: return "saddle";
  }
}

template <typename Scalar = double>
struct Equilibrium {
  EquilibriumKind kind;
  State<Scalar> state;
};

/// Closed-form equilibria of the season-free model. The disease-free state is
/// always present; above threshold the interior point appears (or its
/// boundary analogue when mu is 0 or 1).
template <typename Scalar>
std::vector<Equilibrium<Scalar>> find_equilibria(const Params<Scalar>& p) {
  if (!p.autonomous())
    throw std::invalid_argument("find_equilibria: requires beta1 == beta2");
  std::vector<Equilibrium<Scalar>> out;
  out.push_back({EquilibriumKind::DiseaseFree, State<Scalar>(p.N, Scalar(0), Scalar(0))});

  const Scalar r0 = r0_closed_form(p);
  if (!(r0 > Scalar(1))) return out;

  const Scalar S_star = p.N / r0;
  if (p.mu == Scalar(0)) {
    const Scalar Is = (p.d + p.sigma) / (p.d + p.sigma + p.r_s) * p.N * (Scalar(1) - Scalar(1) / r0);
    out.push_back({EquilibriumKind::AsymptomaticFree, State<Scalar>(S_star, Scalar(0), Is)});
  } else if (p.mu == Scalar(1)) {
    const Scalar Ia = (p.d + p.sigma) / (p.d + p.sigma + p.r_a) * p.N * (Scalar(1) - Scalar(1) / r0);
    out.push_back({EquilibriumKind::SymptomaticFree, State<Scalar>(S_star, Ia, Scalar(0))});
  } else {
    const Scalar denom = (p.d + p.r_a) * (p.d + p.r_s) + p.sigma * (p.d + p.mu * p.r_s) +
                         p.sigma * p.r_a * (Scalar(1) - p.mu);
    const Scalar Ia = p.mu * (p.d + p.sigma) * (p.d + p.r_s) * p.N *
                      (Scalar(1) - Scalar(1) / r0) / denom;
    const Scalar Is = (Scalar(1) - p.mu) * (p.d + p.r_a) / (p.mu * (p.d + p.r_s)) * Ia;
    out.push_back({EquilibriumKind::Endemic, State<Scalar>(S_star, Ia, Is)});
  }
  return out;
}

/// Analytic Jacobian of the reduced right-hand side at `state` with a fixed
/// transmission rate.
template <typename Scalar, typename Derived>
Mat3<Scalar> jacobian(const Params<Scalar>& p, const Eigen::MatrixBase<Derived>& state,
                      Scalar beta) {
  const Scalar S = state[0], Ia = state[1], Is = state[2];
  const Scalar force_S = beta * (Ia + p.alpha * Is);  // d(force)/dS
  Mat3<Scalar> J;
  J << -(p.d + p.sigma) - force_S, -beta * S - p.sigma, -p.alpha * beta * S - p.sigma,
      p.mu * force_S, p.mu * beta * S - (p.d + p.r_a), p.alpha * p.mu * beta * S,
      (Scalar(1) - p.mu) * force_S, (Scalar(1) - p.mu) * beta * S,
      p.alpha * (Scalar(1) - p.mu) * beta * S - (p.d + p.r_s);
  return J;
}

/// Quadratic factor of the characteristic polynomial at the disease-free
/// state: f(lambda) = (lambda + d + sigma)(lambda^2 - a1 lambda + a0). a0 and
/// a1 come from the closed forms; a0_block_det is the same constant term
/// computed independently as the determinant of the infection block.
template <typename Scalar = double>
struct DfeCharpoly {
  Scalar a0;
  Scalar a1;
  Scalar a0_block_det;
};

template <typename Scalar>
DfeCharpoly<Scalar> dfe_charpoly(const Params<Scalar>& p) {
  if (!p.autonomous()) throw std::invalid_argument("dfe_charpoly: requires beta1 == beta2");
  const Scalar beta = p.beta1;
  const Scalar r0 = r0_closed_form(p);
  DfeCharpoly<Scalar> out;
  out.a0 = (p.d + p.r_a) * (p.d + p.r_s) * (Scalar(1) - r0);
  out.a1 = beta * p.N * p.mu - (p.d + p.r_a) + p.alpha * beta * p.N * (Scalar(1) - p.mu) -
           (p.d + p.r_s);
  const Mat3<Scalar> J = jacobian(p, State<Scalar>(p.N, Scalar(0), Scalar(0)), beta);
  out.a0_block_det = J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
  return out;
}

/// Parameters of the rescaled system used for the endemic stability
/// certificate, together with the transformed endemic point.
template <typename Scalar = double>
struct TransformedParams {
  Scalar N1, d1, sigma1, r, mu1;
  Scalar R0_hat;
  Scalar S_hat, Ia_hat, Is_hat;
};

template <typename Scalar>
TransformedParams<Scalar> transformed_params(const Params<Scalar>& p) {
  if (!p.autonomous() || !(p.mu > Scalar(0) && p.mu < Scalar(1)))
    throw std::domain_error("transformed_params: requires beta1 == beta2 and 0 < mu < 1");
  if (!(p.d + p.sigma > Scalar(0)) || !(p.d + p.r_a > Scalar(0)) || !(p.d + p.r_s > Scalar(0)))
    throw std::domain_error("transformed_params: requires positive removal denominators");
  const Scalar beta = p.beta1, drs = p.d + p.r_s;
  TransformedParams<Scalar> tp;
  tp.N1 = p.N * (p.d + p.sigma) * p.mu * beta / (drs * drs);
  tp.d1 = (p.d + p.sigma) / drs;
  tp.sigma1 = p.sigma * p.mu / drs;
  tp.r = (p.d + p.r_a) / drs;
  tp.mu1 = (Scalar(1) - p.mu) / p.mu;
  tp.R0_hat = tp.N1 / tp.d1 * (Scalar(1) / tp.r + p.alpha * tp.mu1);
  tp.S_hat = tp.N1 / tp.d1 / tp.R0_hat;
  tp.Ia_hat = tp.N1 * (Scalar(1) - Scalar(1) / tp.R0_hat) /
              (tp.sigma1 + tp.r * tp.sigma1 * tp.mu1 + tp.r);
  tp.Is_hat = tp.mu1 * tp.r * tp.Ia_hat;
  return tp;
}

/// Routh-Hurwitz certificate of the endemic point in transformed coordinates:
/// the characteristic cubic coefficients xi, the margin xi2 xi1 - xi0, and
/// its expansion c0 + c1 Ia_hat + c2 Ia_hat^2 whose coefficients are positive
/// above threshold.
template <typename Scalar = double>
struct RhCertificate {
  Scalar xi0, xi1, xi2;
  Scalar margin;  // xi2*xi1 - xi0
  Scalar c0, c1, c2;
  Scalar identity_residual;  // relative gap between margin and its c-expansion
  StabilityVerdict verdict;
  TransformedParams<Scalar> transformed;
};

template <typename Scalar>
RhCertificate<Scalar> endemic_rh_certificate(const Params<Scalar>& p) {
  const auto tp = transformed_params(p);
  if (!(tp.R0_hat > Scalar(1)))
    throw std::domain_error("endemic_rh_certificate: requires R0 > 1");
  const Scalar a = p.alpha, N1 = tp.N1, d1 = tp.d1, s1 = tp.sigma1, r = tp.r, m1 = tp.mu1;
  const Scalar Ia = tp.Ia_hat;

  RhCertificate<Scalar> c;
  c.transformed = tp;
  c.xi2 = (s1 + r * s1 * m1 + r + r * r * m1 * a * s1 + r * r * r * m1 * m1 * a * s1 +
           r * r * r * m1 * a + d1 * s1 * m1 * r * a + d1 * s1 * m1 * m1 * r * r * a + N1 +
           d1 * s1 + d1 * r * s1 * m1 + Scalar(2) * N1 * m1 * r * a +
           r * r * m1 * m1 * a * a * N1) /
          ((s1 + r * s1 * m1 + r) * (r * m1 * a + Scalar(1)));
  c.xi1 = d1 * (Scalar(1) + r * r * m1 * a) / (r * m1 * a + Scalar(1)) +
          (s1 * m1 + Scalar(1) + r + s1) * (r * m1 * a + Scalar(1)) * Ia;
  c.xi0 = r * d1 * (tp.R0_hat - Scalar(1));
  c.margin = c.xi2 * c.xi1 - c.xi0;

  c.c0 = d1 * (Scalar(1) + r * r * m1 * a) *
         (r * r * m1 * a + d1 * m1 * r * a + Scalar(1) + d1) /
         ((r * m1 * a + Scalar(1)) * (r * m1 * a + Scalar(1)));
  c.c1 = d1 * m1 * m1 * r * a * s1 + r * r * r * m1 * a + r * r * m1 * a * s1 +
         Scalar(2) * d1 * r * r * m1 * a + d1 * s1 * m1 * r * a + s1 * m1 + d1 * s1 * m1 +
         Scalar(1) + Scalar(2) * d1 + d1 * s1 + r * (d1 - s1 * m1) + m1 * r * a * (d1 - s1);
  c.c2 = (r * m1 * a + Scalar(1)) * (r * m1 * a + Scalar(1)) * (s1 * m1 + Scalar(1) + r + s1);

  const Scalar expansion = c.c0 + c.c1 * Ia + c.c2 * Ia * Ia;
  c.identity_residual = std::abs(c.margin - expansion) /
                        std::max({Scalar(1e-300), std::abs(c.margin), std::abs(expansion)});
  if (!(c.identity_residual <= Scalar(1e-10)))
    throw std::logic_error("endemic_rh_certificate: margin expansion identity failed");
  c.verdict = routh_hurwitz3<Scalar>({c.xi2, c.xi1, c.xi0});
  return c;
}

template <typename Scalar = double>
struct EquilibriumReport {
  EquilibriumKind kind;
  State<Scalar> state;
  std::array<std::complex<Scalar>, 3> eigenvalues;
  Stability stability;
  std::optional<RhCertificate<Scalar>> certificate;
};

/// Equilibria of the season-free model with their Jacobian spectra and
/// stability classes. The disease-free state is classified by the position of
/// R0 against 1 (the zero eigenvalue at threshold makes it a saddle-node);
/// the others by the eigenvalue real parts, corroborated by the
/// Routh-Hurwitz certificate for the interior point.
template <typename Scalar>
std::vector<EquilibriumReport<Scalar>> classify(const Params<Scalar>& p) {
  const Scalar beta = p.beta1;
  const Scalar r0 = r0_closed_form(p);
  std::vector<EquilibriumReport<Scalar>> out;
  for (const auto& eq : find_equilibria(p)) {
    EquilibriumReport<Scalar> rep;
    rep.kind = eq.kind;
    rep.state = eq.state;
    const Mat3<Scalar> J = jacobian(p, eq.state, beta);
    rep.eigenvalues = eig3(J);
    if (eq.kind == EquilibriumKind::DiseaseFree) {
      if (std::abs(r0 - Scalar(1)) <= Scalar(1e-10))
        rep.stability = Stability::SaddleNode;
      else
        rep.stability = r0 < Scalar(1) ? Stability::Stable : Stability::Saddle;
    } else {
      const Scalar band = Scalar(1e-10) * (Scalar(1) + J.cwiseAbs().maxCoeff());
      int pos = 0, zero = 0;
      for (const auto& ev : rep.eigenvalues) {
        if (std::abs(ev.real()) <= band)
          ++zero;
        else if (ev.real() > Scalar(0))
          ++pos;
      }
      if (zero > 0)
        rep.stability = Stability::SaddleNode;
      else if (pos == 0)
        rep.stability = Stability::Stable;
      else if (pos == 3)
        rep.stability = Stability::Unstable;
      else
        rep.stability = Stability::Saddle;
      if (eq.kind == EquilibriumKind::Endemic) rep.certificate = endemic_rh_certificate(p);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace sirs
