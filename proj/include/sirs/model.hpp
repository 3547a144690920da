#pragma once

#include "sirs/params.hpp"
#include "sirs/types.hpp"

namespace sirs {

/// Right-hand side of the reduced system in (S, I_a, I_s), with the recovered
/// class eliminated through R = N - S - I_a - I_s and a fixed transmission
/// rate beta:
///
///   S'   = (d+sigma)(N-S) - beta S (I_a + alpha I_s) - sigma (I_a + I_s)
///   I_a' = mu beta S (I_a + alpha I_s) - (d+r_a) I_a
///   I_s' = (1-mu) beta S (I_a + alpha I_s) - (d+r_s) I_s
template <typename Scalar, typename Derived>
Vec3<Scalar> rhs(const Params<Scalar>& p, const Eigen::MatrixBase<Derived>& state, Scalar beta) {
  const Scalar S = state[0], Ia = state[1], Is = state[2];
  const Scalar force = beta * S * (Ia + p.alpha * Is);
  return {(p.d + p.sigma) * (p.N - S) - force - p.sigma * (Ia + Is),
          p.mu * force - (p.d + p.r_a) * Ia,
          (Scalar(1) - p.mu) * force - (p.d + p.r_s) * Is};
}

/// Full four-compartment right-hand side in (S, I_a, I_s, R), with the live
/// population N(t) = S + I_a + I_s + R. The four components sum to zero.
template <typename Scalar, typename Derived>
Vec4<Scalar> rhs_full4(const Params<Scalar>& p, const Eigen::MatrixBase<Derived>& state, Scalar beta) {
  const Scalar S = state[0], Ia = state[1], Is = state[2], R = state[3];
  const Scalar Nt = S + Ia + Is + R;
  const Scalar force = beta * S * (Ia + p.alpha * Is);
  return {p.d * Nt - p.d * S - force + p.sigma * R,
          p.mu * force - (p.d + p.r_a) * Ia,
          (Scalar(1) - p.mu) * force - (p.d + p.r_s) * Is,
          p.r_a * Ia + p.r_s * Is - (p.d + p.sigma) * R};
}

/// Membership in the invariant simplex {S, I_a, I_s >= 0, S+I_a+I_s <= N},
/// with `slack` (relative to N) absorbing integration round-off.
template <typename Scalar, typename Derived>
bool in_domain(const Params<Scalar>& p, const Eigen::MatrixBase<Derived>& state,
               Scalar slack = Scalar(0)) {
  const Scalar floor = -slack * p.N;
  return state[0] >= floor && state[1] >= floor && state[2] >= floor &&
         state[0] + state[1] + state[2] <= p.N * (Scalar(1) + slack);
}

/// Zero out components that round-off pushed slightly negative (no deeper than
/// -1e-10*N). Applied when recording trajectories, never inside the stepper.
template <typename Scalar>
State<Scalar> clamp_round_off(const Params<Scalar>& p, State<Scalar> state) {
  const Scalar floor = Scalar(-1e-10) * p.N;
  for (int i = 0; i < 3; ++i)
    if (state[i] < Scalar(0) && state[i] >= floor) state[i] = Scalar(0);
  return state;
}

}  // namespace sirs
