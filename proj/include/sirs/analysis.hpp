#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sirs/equilibria.hpp"
#include "sirs/flow.hpp"
#include "sirs/model.hpp"
#include "sirs/params.hpp"
#include "sirs/reproduction.hpp"

namespace sirs {

enum class Outcome { Confirmed, Violated, Inconclusive };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Confirmed: return "confirmed";
    case Outcome::Violated: return "violated";
    default: return "inconclusive";
  }
}

/// Result of one empirical theorem check: the hypothesis values it ran under,
/// the worst margins observed, and a witness when something failed.
template <typename Scalar = double>
struct VerdictReport {
  std::string theorem_id;
  Outcome outcome = Outcome::Inconclusive;
  std::vector<std::pair<std::string, Scalar>> hypothesis;
  std::vector<std::pair<std::string, Scalar>> evidence;
  struct Witness {
    State<Scalar> p0;
    Scalar t;
  };
  std::optional<Witness> witness;
  std::string note;
};

/// Uniform sample of the invariant simplex: sorted-uniform spacings of [0,1]
/// scaled by N, the fourth spacing being the implicit recovered share.
template <typename Scalar, typename Rng>
State<Scalar> sample_domain_state(Rng& rng, Scalar N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng), c = u(rng);
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  return {Scalar(N * a), Scalar(N * (b - a)), Scalar(N * (c - b))};
}

/// As above but bounded away from the boundary faces I_a = 0 and I_s = 0.
template <typename Scalar, typename Rng>
State<Scalar> sample_interior_state(Rng& rng, Scalar N) {
  for (;;) {
    State<Scalar> s = sample_domain_state(rng, N);
    if (s[1] > Scalar(1e-6) * N && s[2] > Scalar(1e-6) * N) return s;
  }
}

namespace detail {

constexpr double kHorizonCap = 1e5;

// Chunked advance with early exit once the state enters the `early` ball
// around `target`. Returns (final distance, time reached).
template <typename Scalar>
std::pair<Scalar, Scalar> advance_until_near(const Params<Scalar>& p, State<Scalar> y,
                                             const State<Scalar>& target, Scalar t_h,
                                             Scalar early, const FlowSettings<Scalar>& st) {
  const Scalar chunk = std::max(p.omega, t_h / Scalar(64));
  Scalar t = 0;
  Scalar dist = (y - target).template lpNorm<1>();
  while (t < t_h && dist > early) {
    const Scalar t2 = std::min(t + chunk, t_h);
    y = advance(p, y, t, t2, st);
    t = t2;
    dist = (y - target).template lpNorm<1>();
  }
  return {dist, t};
}

}  // namespace detail

/// Empirical check of disease extinction below threshold: random starts in
/// the invariant simplex must reach the 1e-4*N ball around (N,0,0) by the
/// horizon. Horizon <= 0 selects the adaptive value where the linear envelope
/// rho^{t/omega} N falls below 1e-6*N, capped at 1e5; when the cap truncates
/// that value a failure is Inconclusive rather than Violated.
template <typename Scalar>
VerdictReport<Scalar> check_extinction(const Params<Scalar>& p, int sample_count = 100,
                                       Scalar horizon = Scalar(0), std::uint64_t seed = 1,
                                       const FlowSettings<Scalar>& st = {}) {
  const Scalar r0 = r0_bisection(p);
  const Scalar rho = r0_threshold(p).rho;
  const bool autonomous = p.autonomous();
  if (autonomous ? !(r0 <= Scalar(1) + Scalar(1e-12)) : !(r0 < Scalar(1)))
    throw std::domain_error("check_extinction: requires R0 < 1 (<= 1 when seasons are equal)");

  VerdictReport<Scalar> rep;
  rep.theorem_id = autonomous ? "4.5" : "3.4";
  rep.hypothesis = {{"R0", r0}, {"rho", rho}};

  bool capped = false;
  Scalar t_h = horizon;
  if (!(t_h > Scalar(0))) {
    const Scalar target = rho < Scalar(1)
                              ? p.omega * std::log(Scalar(1e-6)) / std::log(rho)
                              : Scalar(detail::kHorizonCap);
    t_h = std::min(target, Scalar(detail::kHorizonCap));
    capped = target > Scalar(detail::kHorizonCap);
  }

  const State<Scalar> E0(p.N, Scalar(0), Scalar(0));
  const Scalar ball = Scalar(1e-4) * p.N;
  std::mt19937_64 rng(seed);
  Scalar worst = 0;
  bool all_ok = true;
  for (int i = 0; i < sample_count; ++i) {
    const State<Scalar> p0 = sample_domain_state(rng, p.N);
    const auto [dist, t_reach] = detail::advance_until_near(p, p0, E0, t_h, ball / 2, st);
    worst = std::max(worst, dist);
    if (dist > ball && all_ok) {
      all_ok = false;
      rep.witness = {p0, t_reach};
    }
  }
  rep.evidence = {{"worst_terminal_distance", worst}, {"ball", ball}, {"horizon", t_h}};
  if (all_ok)
    rep.outcome = Outcome::Confirmed;
  else if (capped) {
    rep.outcome = Outcome::Inconclusive;
    rep.note = "adaptive horizon capped at 1e5 before the decay envelope closed";
  } else
    rep.outcome = Outcome::Violated;
  return rep;
}

/// Empirical check of uniform persistence above threshold: over the late
/// window [horizon/2, horizon], both infective compartments must stay above
/// 1e-6*N for interior starts. Reports the empirical floor delta_hat.
template <typename Scalar>
VerdictReport<Scalar> check_persistence(const Params<Scalar>& p, int sample_count = 100,
                                        Scalar horizon = Scalar(0), std::uint64_t seed = 1,
                                        const FlowSettings<Scalar>& st = {}) {
  const Scalar r0 = r0_bisection(p);
  const Scalar rho = r0_threshold(p).rho;
  if (!(r0 > Scalar(1)))
    throw std::domain_error("check_persistence: requires R0 > 1");
  if (!(p.mu > Scalar(0) && p.mu < Scalar(1)))
    throw std::domain_error("check_persistence: requires 0 < mu < 1");
  if (!(p.alpha * p.beta1 > Scalar(0)))
    throw std::domain_error("check_persistence: requires alpha*beta1 > 0");

  VerdictReport<Scalar> rep;
  rep.theorem_id = "3.5";
  rep.hypothesis = {{"R0", r0}, {"rho", rho}, {"mu", p.mu}, {"alpha_beta1", p.alpha * p.beta1}};

  bool capped = false;
  Scalar t_h = horizon;
  if (!(t_h > Scalar(0))) {
    Scalar target = Scalar(150) * p.omega;
    if (p.autonomous()) {
      const auto eqs = find_equilibria(p);
      Scalar slowest = Scalar(-1);
      for (const auto& ev : eig3(jacobian(p, eqs.back().state, p.beta1)))
        slowest = std::max(slowest, ev.real());
      if (slowest < Scalar(0)) target = std::max(target, Scalar(20) / (-slowest));
    } else {
      target = std::max(target, Scalar(60) * p.omega / std::log(rho));
    }
    t_h = std::min(target, Scalar(detail::kHorizonCap));
    capped = target > Scalar(detail::kHorizonCap);
  }

  const Scalar floor_required = Scalar(1e-6) * p.N;
  std::mt19937_64 rng(seed);
  Scalar delta_hat = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < sample_count; ++i) {
    const State<Scalar> p0 = sample_interior_state(rng, p.N);
    Scalar min_ia = std::numeric_limits<Scalar>::infinity();
    Scalar min_is = min_ia;
    Scalar argmin_t = t_h;
    auto observer = [&](Scalar t, const State<Scalar>& y) {
      if (t < t_h / 2) return;
      if (y[1] < min_ia) min_ia = y[1];
      if (y[2] < min_is) {
        min_is = y[2];
        argmin_t = t;
      }
    };
    advance_observed(p, p0, Scalar(0), t_h, st, observer);
    const Scalar sample_floor = std::min(min_ia, min_is);
    if (sample_floor < delta_hat) {
      delta_hat = sample_floor;
      rep.witness = {p0, argmin_t};
    }
  }
  rep.evidence = {{"delta_hat", delta_hat}, {"floor_required", floor_required}, {"horizon", t_h}};
  if (delta_hat > floor_required) {
    rep.outcome = Outcome::Confirmed;
    rep.witness.reset();
  } else if (capped) {
    rep.outcome = Outcome::Inconclusive;
    rep.note = "adaptive horizon capped at 1e5";
  } else
    rep.outcome = Outcome::Violated;
  return rep;
}

template <typename Scalar = double>
struct LyapunovEval {
  Scalar value;
  Scalar derivative;
};

/// L = I_a + (d+r_a)/(d+r_s) alpha I_s for the season-free model; the
/// derivative along the flow is the gradient against the right-hand side and
/// is nonpositive on the simplex when R0 <= 1.
template <typename Scalar, typename Derived>
LyapunovEval<Scalar> lyapunov_L(const Params<Scalar>& p,
                                const Eigen::MatrixBase<Derived>& state) {
  if (!p.autonomous()) throw std::invalid_argument("lyapunov_L: requires beta1 == beta2");
  if (!(p.d + p.r_s > Scalar(0)))
    throw std::domain_error("lyapunov_L: requires d + r_s > 0");
  const Scalar weight = (p.d + p.r_a) / (p.d + p.r_s) * p.alpha;
  const Vec3<Scalar> f = rhs(p, state, p.beta1);
  return {state[1] + weight * state[2], f[1] + weight * f[2]};
}

/// Quadratic-plus-entropy function for the asymptomatic-free limit system in
/// the shifted variables x = S + sigma/(alpha beta), y = I_s. Its derivative
/// is the closed form -(x-x0)^2 (alpha beta y + d + sigma).
template <typename Scalar>
LyapunovEval<Scalar> lyapunov_V_mu0(const Params<Scalar>& p, const Vec2<Scalar>& xy) {
  if (!p.autonomous()) throw std::invalid_argument("lyapunov_V_mu0: requires beta1 == beta2");
  if (p.mu != Scalar(0)) throw std::domain_error("lyapunov_V_mu0: requires mu == 0");
  const Scalar beta = p.beta1;
  if (!(p.alpha * beta > Scalar(0)))
    throw std::domain_error("lyapunov_V_mu0: requires alpha*beta > 0");
  const Scalar r0 = r0_closed_form(p);
  if (!(r0 > Scalar(1))) throw std::domain_error("lyapunov_V_mu0: requires R0 > 1");
  if (!(xy[1] > Scalar(0))) throw std::domain_error("lyapunov_V_mu0: requires y > 0");

  const Scalar x0 = p.N / r0 + p.sigma / (p.alpha * beta);
  const Scalar y0 = (p.d + p.sigma) / (p.d + p.sigma + p.r_s) * p.N * (Scalar(1) - Scalar(1) / r0);
  const Scalar dx = xy[0] - x0;
  const Scalar value = dx * dx / Scalar(2) + x0 * (xy[1] - y0 - y0 * std::log(xy[1] / y0));
  const Scalar derivative = -dx * dx * (p.alpha * beta * xy[1] + p.d + p.sigma);
  return {value, derivative};
}

/// Map a model state to the (S, I, N1) coordinates of the equal-rates
/// reduction: I = I_a + alpha I_s, N1 = S + I_a + I_s.
template <typename Scalar, typename Derived>
Vec3<Scalar> equal_rates_coords(const Params<Scalar>& p,
                                const Eigen::MatrixBase<Derived>& state) {
  return {state[0], state[1] + p.alpha * state[2], state[0] + state[1] + state[2]};
}

/// Lyapunov functional of the equal-rates reduction (r_a = r_s = r > 0),
/// evaluated at (S, I, N1): quadratic in S and N1, entropy-like in I, with
/// the closed-form nonpositive derivative.
template <typename Scalar>
LyapunovEval<Scalar> lyapunov_V1_equal_rates(const Params<Scalar>& p, const Vec3<Scalar>& sin1) {
  if (!p.autonomous())
    throw std::invalid_argument("lyapunov_V1_equal_rates: requires beta1 == beta2");
  if (p.r_a != p.r_s || !(p.r_a > Scalar(0)))
    throw std::domain_error("lyapunov_V1_equal_rates: requires r_a == r_s > 0");
  if (!(p.mu > Scalar(0) && p.mu < Scalar(1)))
    throw std::domain_error("lyapunov_V1_equal_rates: requires 0 < mu < 1");
  const Scalar r0 = r0_closed_form(p);
  if (!(r0 > Scalar(1))) throw std::domain_error("lyapunov_V1_equal_rates: requires R0 > 1");
  if (!(sin1[1] > Scalar(0))) throw std::domain_error("lyapunov_V1_equal_rates: requires I > 0");

  const Scalar beta = p.beta1, r = p.r_a;
  const auto eqs = find_equilibria(p);
  const State<Scalar>& e1 = eqs.back().state;
  const Scalar S_star = e1[0];
  const Scalar I_star = e1[1] + p.alpha * e1[2];
  const Scalar N1_star = e1[0] + e1[1] + e1[2];
  const Scalar mu_tilde = (p.mu + p.alpha * (Scalar(1) - p.mu)) * beta;
  const Scalar nu2 = beta * S_star / mu_tilde;
  const Scalar nu3 = p.sigma / r;

  const Scalar x = sin1[0] / S_star, y = sin1[1] / I_star, z = sin1[2] / N1_star;
  const Scalar g = y - Scalar(1) - std::log(y);
  const Scalar dS = sin1[0] - S_star, dN1 = sin1[2] - N1_star;
  const Scalar value = dS * dS / Scalar(2) + nu2 * I_star * g + nu3 * dN1 * dN1 / Scalar(2);
  const Scalar derivative = -p.d * S_star * S_star * (x - 1) * (x - 1) -
                            nu3 * (p.d + r + p.sigma) * N1_star * N1_star * (z - 1) * (z - 1) -
                            beta * S_star * S_star * I_star * y * (x - 1) * (x - 1);
  return {value, derivative};
}

/// Perturb r_s = r_a +- delta_r and check convergence of interior starts to
/// the recomputed endemic point. Within the small-gap hypothesis
/// (delta_r <= 0.1 (d + r_a)) failures are Violated; outside it the verdict
/// is Inconclusive whatever happens.
template <typename Scalar>
VerdictReport<Scalar> check_near_equal_rates(const Params<Scalar>& p, Scalar delta_r,
                                             int sample_count = 100, std::uint64_t seed = 1,
                                             Scalar horizon = Scalar(0),
                                             const FlowSettings<Scalar>& st = {}) {
  if (!p.autonomous())
    throw std::domain_error("check_near_equal_rates: requires beta1 == beta2");
  if (!(p.mu > Scalar(0) && p.mu < Scalar(1)))
    throw std::domain_error("check_near_equal_rates: requires 0 < mu < 1");
  if (!(delta_r >= Scalar(0)))
    throw std::invalid_argument("check_near_equal_rates: delta_r must be nonnegative");
  Params<Scalar> anchor = p;
  anchor.r_s = anchor.r_a;
  if (!(r0_closed_form(anchor) > Scalar(1)))
    throw std::domain_error("check_near_equal_rates: requires R0 > 1 at r_s = r_a");

  const bool in_hypothesis = delta_r <= Scalar(0.1) * (p.d + p.r_a) * (Scalar(1) + Scalar(1e-12));
  VerdictReport<Scalar> rep;
  rep.theorem_id = delta_r == Scalar(0) ? "4.7" : "4.8";
  rep.hypothesis = {{"delta_r", delta_r},
                    {"hypothesis_bound", Scalar(0.1) * (p.d + p.r_a)},
                    {"R0_anchor", r0_closed_form(anchor)}};

  std::vector<Scalar> shifts;
  if (delta_r == Scalar(0))
    shifts = {Scalar(0)};
  else {
    shifts = {delta_r};
    if (anchor.r_a - delta_r >= Scalar(0))
      shifts.push_back(-delta_r);
    else
      rep.note = "minus variant skipped: r_a - delta_r below zero";
  }

  std::mt19937_64 rng(seed);
  const Scalar ball = Scalar(1e-4) * p.N;
  Scalar worst = 0;
  bool all_ok = true, capped = false, hypothesis_broke = false;
  for (const Scalar shift : shifts) {
    Params<Scalar> q = anchor;
    q.r_s = anchor.r_a + shift;
    const Scalar r0_v = r0_closed_form(q);
    if (!(r0_v > Scalar(1))) {
      hypothesis_broke = true;
      rep.note += std::string(rep.note.empty() ? "" : "; ") +
                  "perturbed variant fell below threshold";
      continue;
    }
    const auto eqs = find_equilibria(q);
    const State<Scalar>& e1 = eqs.back().state;
    Scalar slowest = Scalar(-1);
    for (const auto& ev : eig3(jacobian(q, e1, q.beta1)))
      slowest = std::max(slowest, ev.real());

    Scalar t_h = horizon;
    if (!(t_h > Scalar(0))) {
      Scalar target = Scalar(60) * q.omega;
      if (slowest < Scalar(0)) target = std::max(target, Scalar(30) / (-slowest));
      t_h = std::min(target, Scalar(detail::kHorizonCap));
      capped = capped || target > Scalar(detail::kHorizonCap);
    }
    for (int i = 0; i < sample_count; ++i) {
      const State<Scalar> p0 = sample_interior_state(rng, q.N);
      const auto [dist, t_reach] = detail::advance_until_near(q, p0, e1, t_h, ball / 2, st);
      worst = std::max(worst, dist);
      if (dist > ball && all_ok) {
        all_ok = false;
        rep.witness = {p0, t_reach};
      }
    }
  }
  rep.evidence = {{"worst_terminal_distance", worst}, {"ball", ball}};
  if (!all_ok)
    rep.outcome = (in_hypothesis && !capped) ? Outcome::Violated : Outcome::Inconclusive;
  else if (hypothesis_broke || !in_hypothesis) {
    rep.outcome = Outcome::Inconclusive;
    if (!in_hypothesis)
      rep.note += std::string(rep.note.empty() ? "" : "; ") +
                  "delta_r outside the small-gap hypothesis; convergence observed";
  } else
    rep.outcome = Outcome::Confirmed;
  return rep;
}

enum class SweepAxis { Theta, Beta2, Mu, Alpha };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Theta: return "theta";
    case SweepAxis::Beta2: return "beta2";
    case SweepAxis::Mu: return "mu";
    default: return "alpha";
  }
}

template <typename Scalar = double>
struct SweepRow {
  Scalar axis_value;
  Scalar rho = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar r0 = std::numeric_limits<Scalar>::quiet_NaN();
  std::string error;
  bool ok() const { return error.empty(); }
};

/// Threshold quantities along one parameter axis; illegal grid values are
/// reported per row and skipped.
template <typename Scalar>
std::vector<SweepRow<Scalar>> threshold_sweep(const Params<Scalar>& base, SweepAxis axis,
                                              std::vector<Scalar> grid) {
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow<Scalar>> rows;
  rows.reserve(grid.size());
  for (const Scalar v : grid) {
    SweepRow<Scalar> row;
    row.axis_value = v;
    Params<Scalar> q = base;
    switch (axis) {
      case SweepAxis::Theta: q.theta = v; break;
      case SweepAxis::Beta2: q.beta2 = v; break;
      case SweepAxis::Mu: q.mu = v; break;
      case SweepAxis::Alpha: q.alpha = v; break;
    }
    const auto check = validate(q);
    if (!check.ok()) {
      std::string msg;
      for (const auto& violation : check.violations)
        msg += (msg.empty() ? "" : "; ") + violation;
      row.error = msg;
    } else {
      row.rho = r0_threshold(q).rho;
      row.r0 = r0_bisection(q);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sirs
