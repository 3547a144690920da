#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sirs/flow.hpp"
#include "sirs/params.hpp"
#include "sirs/smallmat.hpp"
#include "sirs/types.hpp"

namespace sirs {

/// Blocks of the linearization at the disease-free state (N, 0, 0). F1/F2 are
/// the seasonal new-infection blocks acting on (I_a, I_s), V the diagonal
/// removal block; the *_full members are the bordered 3x3 forms whose extra
/// characteristic multiplier is e^{-(d+sigma) omega}.
template <typename Scalar = double>
struct LinearizationBlocks {
  Mat2<Scalar> F1, F2, V;
  Mat3<Scalar> F1_full, F2_full, V1_full, V2_full;
};

template <typename Scalar>
LinearizationBlocks<Scalar> linearize(const Params<Scalar>& p) {
  LinearizationBlocks<Scalar> L;
  auto infection_block = [&](Scalar beta) {
    Mat2<Scalar> F;
    F << p.mu * beta * p.N, p.alpha * p.mu * beta * p.N,
        (Scalar(1) - p.mu) * beta * p.N, p.alpha * (Scalar(1) - p.mu) * beta * p.N;
    return F;
  };
  L.F1 = infection_block(p.beta1);
  L.F2 = infection_block(p.beta2);
  L.V = Mat2<Scalar>::Zero();
  L.V(0, 0) = p.d + p.r_a;
  L.V(1, 1) = p.d + p.r_s;

  auto full_F = [](const Mat2<Scalar>& F) {
    Mat3<Scalar> M = Mat3<Scalar>::Zero();
    M.template block<2, 2>(1, 1) = F;
    return M;
  };
  auto full_V = [&](Scalar beta) {
    Mat3<Scalar> M = Mat3<Scalar>::Zero();
    M(0, 0) = p.d + p.sigma;
    M(0, 1) = beta * p.N + p.sigma;
    M(0, 2) = p.alpha * beta * p.N + p.sigma;
    M(1, 1) = p.d + p.r_a;
    M(2, 2) = p.d + p.r_s;
    return M;
  };
  L.F1_full = full_F(L.F1);
  L.F2_full = full_F(L.F2);
  L.V1_full = full_V(p.beta1);
  L.V2_full = full_V(p.beta2);
  return L;
}

/// Fundamental matrix over one period of w' = (-V + F(t)/lambda) w. With the
/// piecewise-constant seasons this is the product of two exponentials, high
/// season applied after low season. lambda = 1 gives the monodromy matrix of
/// the linearized infection subsystem.
template <typename Scalar>
Mat2<Scalar> monodromy(const Params<Scalar>& p, Scalar lambda = Scalar(1)) {
  if (!(lambda > Scalar(0))) throw std::domain_error("monodromy: lambda must be positive");
  const auto L = linearize(p);
  return expm((L.F2 / lambda - L.V).eval(), p.high_season_length()) *
         expm((L.F1 / lambda - L.V).eval(), p.low_season_length());
}

enum class ThresholdVerdict { Subcritical, Critical, Supercritical };

template <typename Scalar = double>
struct ThresholdReport {
  Scalar rho;
  ThresholdVerdict verdict;
};

/// Spectral radius of the monodromy matrix and its position against 1, which
/// decides local stability of the disease-free state.
template <typename Scalar>
ThresholdReport<Scalar> r0_threshold(const Params<Scalar>& p) {
  const Scalar rho = spectral_radius2(monodromy(p));
  ThresholdVerdict v = ThresholdVerdict::Critical;
  if (rho < Scalar(1) - Scalar(1e-10)) v = ThresholdVerdict::Subcritical;
  if (rho > Scalar(1) + Scalar(1e-10)) v = ThresholdVerdict::Supercritical;
  return {rho, v};
}

/// Closed-form reproduction number of the season-free model,
/// beta N (mu/(d+r_a) + alpha(1-mu)/(d+r_s)). Requires beta1 = beta2.
template <typename Scalar>
Scalar r0_closed_form(const Params<Scalar>& p) {
  if (!p.autonomous())
    throw std::invalid_argument("r0_closed_form: requires beta1 == beta2");
  if (!(p.d + p.r_a > Scalar(0)) || !(p.d + p.r_s > Scalar(0)))
    throw std::domain_error("r0_closed_form: removal rates d+r_a, d+r_s must be positive");
  const Scalar beta = p.beta1;
  return beta * p.N * (p.mu / (p.d + p.r_a) + p.alpha * (Scalar(1) - p.mu) / (p.d + p.r_s));
}

namespace detail {

template <typename Scalar>
Scalar rho_of_lambda(const Params<Scalar>& p, Scalar lam) {
  try {
    const Scalar r = spectral_radius2(monodromy(p, lam));
    return std::isfinite(double(r)) ? r : std::numeric_limits<Scalar>::infinity();
  } catch (const std::overflow_error&) {
    // exponential blow-up for tiny lambda: the spectral radius is huge
    return std::numeric_limits<Scalar>::infinity();
  }
}

// Log-grid scan used when the bracketing monotonicity check fails: locate the
// first crossing of rho = 1 and return its bracket.
template <typename Scalar>
std::pair<Scalar, Scalar> scan_for_bracket(const Params<Scalar>& p) {
  Scalar prev_lam = Scalar(1e-12);
  Scalar prev_rho = rho_of_lambda(p, prev_lam);
  for (int i = 1; i <= 240; ++i) {
    const Scalar lam = Scalar(1e-12) * std::pow(Scalar(10), Scalar(i) / Scalar(10));
    const Scalar r = rho_of_lambda(p, lam);
    if ((prev_rho >= Scalar(1)) != (r >= Scalar(1))) return {prev_lam, lam};
    prev_lam = lam;
    prev_rho = r;
  }
  throw std::runtime_error("r0_bisection: no crossing of rho = 1 on the scan grid");
}

}  // namespace detail

/// The reproduction number as the root of rho(W_lambda(omega, 0)) = 1,
/// bracketed by geometric expansion from lambda = 1 and bisected until the
/// interval shrinks below 1e-12*max(1, lambda) and the defining identity
/// |rho - 1| <= 1e-10 holds at the returned point. Returns 0 when rho < 1
/// for every positive lambda (no transmission path can sustain itself).
template <typename Scalar>
Scalar r0_bisection(const Params<Scalar>& p) {
  const auto L = linearize(p);
  if (L.F1.isZero(Scalar(0)) && L.F2.isZero(Scalar(0))) return Scalar(0);
  // with mu = 0 and alpha = 0 both infection blocks are strictly triangular,
  // so W_lambda is triangular with diagonal e^{-(d+r_a)omega}, e^{-(d+r_s)omega}
  // below 1 for every lambda: no root exists
  if (p.mu == Scalar(0) && p.alpha == Scalar(0)) return Scalar(0);

  Scalar lo, hi;
  const Scalar rho1 = detail::rho_of_lambda(p, Scalar(1));
  bool monotone_ok = true;
  if (rho1 >= Scalar(1)) {
    lo = Scalar(1);
    hi = Scalar(10);
    Scalar prev = rho1;
    while (true) {
      const Scalar r = detail::rho_of_lambda(p, hi);
      if (r > prev * (Scalar(1) + Scalar(1e-9))) monotone_ok = false;
      if (r < Scalar(1)) break;
      lo = hi;
      hi *= Scalar(10);
      prev = r;
      if (hi > Scalar(1e30))
        throw std::runtime_error("r0_bisection: bracket expansion exceeded 1e30");
    }
  } else {
    hi = Scalar(1);
    lo = Scalar(0.1);
    Scalar prev = rho1;
    while (true) {
      const Scalar r = detail::rho_of_lambda(p, lo);
      if (r < prev * (Scalar(1) - Scalar(1e-9)) && std::isfinite(double(r)))
        monotone_ok = false;
      if (r >= Scalar(1)) break;
      hi = lo;
      lo /= Scalar(10);
      prev = r;
      if (lo < Scalar(1e-30)) return Scalar(0);  // rho below 1 on the whole ray
    }
  }
  if (!monotone_ok) std::tie(lo, hi) = detail::scan_for_bracket(p);

  // rho(lo) >= 1 >= rho(hi); dual stopping test: tight interval and the
  // defining identity satisfied at the returned point
  Scalar best = (lo + hi) / Scalar(2);
  Scalar best_gap = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < 2000; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (!(mid > lo && mid < hi)) break;
    const Scalar r = detail::rho_of_lambda(p, mid);
    const Scalar gap = std::abs(r - Scalar(1));
    if (gap < best_gap) {
      best = mid;
      best_gap = gap;
    }
    if (r >= Scalar(1))
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= Scalar(1e-12) * std::max(Scalar(1), mid) && best_gap <= Scalar(5e-11))
      break;
  }
  return best;
}

/// Quadrature oracle for the reproduction number: the dominant eigenvalue of
/// the next-infection operator
///
///   (L v)(t) = \int_0^inf e^{-V a} F(t-a) v(t-a) da
///
/// discretized on grid_n points per period with the trapezoid rule truncated
/// at truncation_A, where the decay factors e^{-V a} are exact scalar
/// exponentials. Independent of both the matrix-exponential and the
/// root-finding routes.
template <typename Scalar>
Scalar r0_operator_oracle(const Params<Scalar>& p, int grid_n, Scalar truncation_A) {
  if (grid_n < 64) throw std::invalid_argument("r0_operator_oracle: grid_n must be >= 64");
  const Scalar kappa = p.d + std::min(p.r_a, p.r_s);
  if (!(kappa > Scalar(0)))
    throw std::domain_error("r0_operator_oracle: removal rates must be positive");
  if (truncation_A < Scalar(40) / kappa * (Scalar(1) - Scalar(1e-12)))
    throw std::invalid_argument("r0_operator_oracle: truncation_A below 40/kappa");

  const auto L = linearize(p);
  if (L.F1.isZero(Scalar(0)) && L.F2.isZero(Scalar(0))) return Scalar(0);

  const int n = grid_n;
  const Scalar h = p.omega / Scalar(n);
  const long long K = static_cast<long long>(std::ceil(double(truncation_A / h)));
  const Scalar rate[2] = {p.d + p.r_a, p.d + p.r_s};

  // Fold the trapezoid weights w_k e^{-rate k h} over the period: the grid is
  // periodic, so index m collects every k = m + l n below the truncation.
  // E0 folds the bare left-node decay of each cell, used by the jump-cell
  // corrections below.
  std::vector<Scalar> W[2], E0[2];
  for (int c = 0; c < 2; ++c) {
    W[c].assign(n, Scalar(0));
    E0[c].assign(n, Scalar(0));
    const Scalar step = std::exp(-rate[c] * h * Scalar(n));
    for (int m = 0; m < n; ++m) {
      Scalar decay = std::exp(-rate[c] * h * Scalar(m));
      for (long long k = m; k <= K; k += n) {
        const Scalar w = (k == 0 || k == K) ? h / Scalar(2) : h;
        W[c][m] += w * decay;
        if (k <= K - 1) E0[c][m] += decay;
        decay *= step;
      }
    }
  }

  std::vector<bool> high(n);
  for (int j = 0; j < n; ++j)
    high[j] = !(detail::period_phase(p, Scalar(j) * h).phase < p.low_season_length());

  // Residues whose backward cell straddles a season switch. The switch sits
  // at fraction phi of the cell (measured along the integration variable);
  // the cell quadrature is split there, with the grid function interpolated
  // linearly at the switch. This restores second-order accuracy that a plain
  // trapezoid loses to the transmission jump.
  struct JumpCell {
    int i;       // residue whose cell [tau_{i-1}, tau_i] holds the switch
    Scalar phi;  // fraction from tau_i toward tau_{i-1}
  };
  std::vector<JumpCell> jumps;
  for (int i = 0; i < n; ++i) {
    const int i1 = (i - 1 + n) % n;
    if (high[i] == high[i1]) continue;
    const Scalar tau_i = i == 0 ? p.omega : Scalar(i) * h;
    const Scalar tau_s = high[i] ? p.low_season_length() : p.omega;
    jumps.push_back({i, (tau_i - tau_s) / h});
  }

  std::vector<Scalar> v1(n, Scalar(1)), v2(n, Scalar(1)), z1(n), z2(n), u1(n), u2(n);
  auto normalize = [&](std::vector<Scalar>& a, std::vector<Scalar>& b) {
    Scalar s = 0;
    for (int i = 0; i < n; ++i) s += std::abs(a[i]) + std::abs(b[i]);
    if (s > Scalar(0))
      for (int i = 0; i < n; ++i) {
        a[i] /= s;
        b[i] /= s;
      }
    return s;
  };
  normalize(v1, v2);

  auto apply = [&]() {
    for (int i = 0; i < n; ++i) {
      const Mat2<Scalar>& F = high[i] ? L.F2 : L.F1;
      z1[i] = F(0, 0) * v1[i] + F(0, 1) * v2[i];
      z2[i] = F(1, 0) * v1[i] + F(1, 1) * v2[i];
    }
    for (int j = 0; j < n; ++j) {
      Scalar acc1 = 0, acc2 = 0;
      for (int m = 0; m < n; ++m) {
        int idx = j - m;
        if (idx < 0) idx += n;
        acc1 += W[0][m] * z1[idx];
        acc2 += W[1][m] * z2[idx];
      }
      u1[j] = acc1;
      u2[j] = acc2;
    }
    // jump-cell corrections: replace each straddling cell's plain trapezoid
    // by the split quadrature; the per-residue vector below is output-
    // independent, so the fix costs O(n) per jump
    for (const auto& jc : jumps) {
      const int i = jc.i, i1 = (i - 1 + n) % n;
      const Scalar phi = jc.phi;
      const Mat2<Scalar>& Fi = high[i] ? L.F2 : L.F1;
      const Mat2<Scalar>& Fo = high[i1] ? L.F2 : L.F1;
      const Scalar zs_i[2] = {z1[i], z2[i]};
      const Scalar zs_i1[2] = {z1[i1], z2[i1]};
      const Scalar zo_i[2] = {Fo(0, 0) * v1[i] + Fo(0, 1) * v2[i],
                              Fo(1, 0) * v1[i] + Fo(1, 1) * v2[i]};
      const Scalar zo_i1[2] = {Fi(0, 0) * v1[i1] + Fi(0, 1) * v2[i1],
                               Fi(1, 0) * v1[i1] + Fi(1, 1) * v2[i1]};
      Scalar corr[2];
      for (int c = 0; c < 2; ++c) {
        const Scalar eR = std::exp(-rate[c] * h);
        const Scalar eS = std::exp(-rate[c] * phi * h);
        corr[c] = h / Scalar(2) *
                  (((phi - 1) + phi * (1 - phi) * eS) * zs_i[c] +
                   (1 - phi) * (1 - phi) * eS * zo_i[c] +
                   (phi * (1 - phi) * eS - phi * eR) * zs_i1[c] +
                   phi * phi * eS * zo_i1[c]);
      }
      for (int j = 0; j < n; ++j) {
        int m = j - i;
        if (m < 0) m += n;
        u1[j] += E0[0][m] * corr[0];
        u2[j] += E0[1][m] * corr[1];
      }
    }
  };

  Scalar lambda_prev = Scalar(-1);
  for (int it = 0; it < 100000; ++it) {
    apply();
    v1.swap(u1);
    v2.swap(u2);
    const Scalar lambda = normalize(v1, v2);
    if (lambda == Scalar(0)) return Scalar(0);
    if (lambda_prev >= Scalar(0) &&
        std::abs(lambda - lambda_prev) <= Scalar(1e-12) * std::max(Scalar(1), lambda))
      return lambda;
    lambda_prev = lambda;
  }
  // residual of the last iterate for the error report
  apply();
  Scalar resid = 0;
  for (int i = 0; i < n; ++i)
    resid += std::abs(u1[i] - lambda_prev * v1[i]) + std::abs(u2[i] - lambda_prev * v2[i]);
  throw std::runtime_error("r0_operator_oracle: power iteration did not converge, residual " +
                           std::to_string(double(resid)));
}

/// Linear seasonal infection system I' = (F(t) - V) I integrated with the
/// same stepper as the full model, for comparison-principle checks.
template <typename Scalar, typename OnAccept>
Vec2<Scalar> advance_linear_infection(const Params<Scalar>& p, const Vec2<Scalar>& I0, Scalar t0,
                                      Scalar t1, const FlowSettings<Scalar>& st,
                                      OnAccept&& on_accept) {
  validate_settings(st);
  const auto L = linearize(p);
  return detail::integrate_seasons(
      p, I0, t0, t1, st,
      [&](Season s) {
        const Mat2<Scalar> A = (s == Season::Low ? L.F1 : L.F2) - L.V;
        return [A](Scalar, const Vec2<Scalar>& v) -> Vec2<Scalar> { return A * v; };
      },
      on_accept);
}

/// Everything the threshold analysis produces in one record.
template <typename Scalar = double>
struct MonodromyReport {
  Mat2<Scalar> Phi;
  Scalar rho;
  ThresholdVerdict verdict;
  Scalar r0_bisect;
  std::optional<Scalar> r0_closed;    // only when beta1 == beta2
  std::optional<Scalar> r0_operator;  // only when requested
};

template <typename Scalar>
MonodromyReport<Scalar> monodromy_report(const Params<Scalar>& p, bool with_operator = false,
                                         int grid_n = 2048) {
  MonodromyReport<Scalar> rep;
  rep.Phi = monodromy(p);
  const auto thr = r0_threshold(p);
  rep.rho = thr.rho;
  rep.verdict = thr.verdict;
  rep.r0_bisect = r0_bisection(p);
  if (p.autonomous()) rep.r0_closed = r0_closed_form(p);
  if (with_operator) {
    const Scalar kappa = p.d + std::min(p.r_a, p.r_s);
    rep.r0_operator = r0_operator_oracle(p, grid_n, Scalar(40) / kappa);
  }
  return rep;
}

}  // namespace sirs
