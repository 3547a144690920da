#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirs/types.hpp"

namespace sirs {

/// Epidemiological and seasonal constants. All rates are per unit time, with
/// time measured in the same unit as the period `omega`.
template <typename Scalar = double>
struct Params {
  Scalar d;      ///< birth rate = death rate
  Scalar alpha;  ///< contact reduction of symptomatic infectives, in [0,1]
  Scalar sigma;  ///< immunity loss rate
  Scalar mu;     ///< asymptomatic fraction of new infections, in [0,1]
  Scalar r_a;    ///< recovery rate of asymptomatic infectives
  Scalar r_s;    ///< recovery rate of symptomatic infectives
  Scalar beta1;  ///< low-season transmission rate
  Scalar beta2;  ///< high-season transmission rate
  Scalar theta;  ///< high-season share of the period, in (0,1)
  Scalar omega;  ///< period of the seasonal succession
  Scalar N;      ///< total population size

  Scalar low_season_length() const { return (Scalar(1) - theta) * omega; }
  Scalar high_season_length() const { return theta * omega; }
  bool autonomous() const { return beta1 == beta2; }
};

struct ValidationResult {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

/// Total check of the parameter ranges. beta2 < beta1 is legal but unusual and
/// only warns, so sensitivity studies can invert the seasons.
template <typename Scalar>
ValidationResult validate(const Params<Scalar>& p) {
  ValidationResult r;
  auto finite = [](Scalar x) { return std::isfinite(static_cast<double>(x)); };
  auto req = [&](bool cond, const char* msg) {
    if (!cond) r.violations.emplace_back(msg);
  };
  req(finite(p.d) && p.d >= Scalar(0), "d not in [0,inf)");
  req(finite(p.sigma) && p.sigma >= Scalar(0), "sigma not in [0,inf)");
  req(finite(p.r_a) && p.r_a >= Scalar(0), "r_a not in [0,inf)");
  req(finite(p.r_s) && p.r_s >= Scalar(0), "r_s not in [0,inf)");
  req(finite(p.beta1) && p.beta1 >= Scalar(0), "beta1 not in [0,inf)");
  req(finite(p.beta2) && p.beta2 >= Scalar(0), "beta2 not in [0,inf)");
  req(finite(p.mu) && p.mu >= Scalar(0) && p.mu <= Scalar(1), "mu not in [0,1]");
  req(finite(p.alpha) && p.alpha >= Scalar(0) && p.alpha <= Scalar(1), "alpha not in [0,1]");
  req(finite(p.theta) && p.theta > Scalar(0) && p.theta < Scalar(1), "theta not in (0,1)");
  req(finite(p.omega) && p.omega > Scalar(0), "omega not in (0,inf)");
  req(finite(p.N) && p.N > Scalar(0), "N not in (0,inf)");
  if (r.ok()) {
    if (p.beta1 == Scalar(0) && p.beta2 == Scalar(0))
      r.warnings.emplace_back("degenerate: no transmission");
    if (p.beta2 < p.beta1)
      r.warnings.emplace_back("beta2 < beta1: high season is the weaker one");
    // zero denominators are structurally sound for the flow itself but rule
    // out the closed-form analyses, which guard themselves
    if (p.d + p.sigma == Scalar(0)) r.warnings.emplace_back("degenerate: d + sigma = 0");
    if (p.d + p.r_a == Scalar(0)) r.warnings.emplace_back("degenerate: d + r_a = 0");
    if (p.d + p.r_s == Scalar(0)) r.warnings.emplace_back("degenerate: d + r_s = 0");
  }
  return r;
}

namespace detail {

/// Decomposition t = m*omega + phase with phase in [0, omega). One canonical
/// implementation so that the switching convention is identical everywhere.
template <typename Scalar>
struct PeriodPhase {
  long long m;
  Scalar phase;
};

template <typename Scalar>
PeriodPhase<Scalar> period_phase(const Params<Scalar>& p, Scalar t) {
  long long m = static_cast<long long>(std::floor(t / p.omega));
  Scalar phase = t - Scalar(m) * p.omega;
  if (phase < Scalar(0)) {
    phase += p.omega;
    --m;
  }
  if (phase >= p.omega) {
    phase -= p.omega;
    ++m;
  }
  return {m, phase};
}

}  // namespace detail

/// Season of time t. The value at a switch instant belongs to the season that
/// starts there (half-open season intervals).
template <typename Scalar>
Season season_at(const Params<Scalar>& p, Scalar t) {
  if (!(t >= Scalar(0))) throw std::domain_error("season_at: t must be nonnegative");
  return detail::period_phase(p, t).phase < p.low_season_length() ? Season::Low : Season::High;
}

template <typename Scalar>
SeasonLabel<Scalar> season_label_at(const Params<Scalar>& p, Scalar t) {
  if (!(t >= Scalar(0))) throw std::domain_error("season_label_at: t must be nonnegative");
  const auto pp = detail::period_phase(p, t);
  const Scalar start = Scalar(pp.m) * p.omega;
  if (pp.phase < p.low_season_length())
    return {Season::Low, start, start + p.low_season_length()};
  return {Season::High, start + p.low_season_length(), start + p.omega};
}

/// Piecewise-constant transmission rate: beta1 on the low season, beta2 on the
/// high season.
template <typename Scalar>
Scalar beta_at(const Params<Scalar>& p, Scalar t) {
  if (!(t >= Scalar(0))) throw std::domain_error("beta_at: t must be nonnegative");
  return detail::period_phase(p, t).phase < p.low_season_length() ? p.beta1 : p.beta2;
}

}  // namespace sirs
