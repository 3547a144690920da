#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirs/model.hpp"
#include "sirs/params.hpp"
#include "sirs/types.hpp"

namespace sirs {

/// Settings of the embedded Runge-Kutta 5(4) stepper. max_step = 0 selects
/// the default omega/50; integration is restarted at every season switch, so
/// no step ever spans one regardless of max_step.
template <typename Scalar = double>
struct FlowSettings {
  Scalar abs_tol = Scalar(1e-10);
  Scalar rel_tol = Scalar(1e-10);
  Scalar max_step = Scalar(0);
};

class FlowError : public std::runtime_error {
 public:
  explicit FlowError(const std::string& what) : std::runtime_error(what) {}
};

template <typename Scalar>
void validate_settings(const FlowSettings<Scalar>& s) {
  auto in_range = [](Scalar tol) { return tol > Scalar(0) && tol <= Scalar(1e-2); };
  if (!in_range(s.abs_tol) || !in_range(s.rel_tol))
    throw std::invalid_argument("FlowSettings: tolerances must lie in (0, 1e-2]");
  if (!(s.max_step >= Scalar(0)))
    throw std::invalid_argument("FlowSettings: max_step must be nonnegative");
}

template <typename Scalar>
struct TrajectorySample {
  Scalar t;
  State<Scalar> state;
  SeasonLabel<Scalar> season;
};

template <typename Scalar = double>
struct Trajectory {
  std::vector<TrajectorySample<Scalar>> samples;
  FlowSettings<Scalar> settings;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
template <typename S>
struct Dopri5 {
  static constexpr S c2 = S(1) / 5, c3 = S(3) / 10, c4 = S(4) / 5, c5 = S(8) / 9;
  static constexpr S a21 = S(1) / 5;
  static constexpr S a31 = S(3) / 40, a32 = S(9) / 40;
  static constexpr S a41 = S(44) / 45, a42 = S(-56) / 15, a43 = S(32) / 9;
  static constexpr S a51 = S(19372) / 6561, a52 = S(-25360) / 2187, a53 = S(64448) / 6561,
                     a54 = S(-212) / 729;
  static constexpr S a61 = S(9017) / 3168, a62 = S(-355) / 33, a63 = S(46732) / 5247,
                     a64 = S(49) / 176, a65 = S(-5103) / 18656;
  static constexpr S b1 = S(35) / 384, b3 = S(500) / 1113, b4 = S(125) / 192,
                     b5 = S(-2187) / 6784, b6 = S(11) / 84;
  // b - b* of the embedded 4th-order solution
  static constexpr S e1 = S(71) / 57600, e3 = S(-71) / 16695, e4 = S(71) / 1920,
                     e5 = S(-17253) / 339200, e6 = S(22) / 525, e7 = S(-1) / 40;
};

/// Adaptive integration of y' = f(t, y) over [t0, t1] where f is smooth.
/// on_accept(t, y) fires after every accepted step, the final one included.
template <typename Scalar, typename Vec, typename Rhs, typename OnAccept>
Vec dopri5_segment(Rhs&& f, Scalar t0, Vec y, Scalar t1, Scalar abs_tol, Scalar rel_tol,
                   Scalar max_step, OnAccept&& on_accept) {
  using T = Dopri5<Scalar>;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  if (!(t1 > t0)) return y;

  Scalar t = t0;
  Scalar h = std::min(max_step, t1 - t0);
  Vec k1 = f(t, y);
  while (t < t1) {
    if (t1 - t <= Scalar(4) * eps * std::max(std::abs(t1), Scalar(1))) break;
    h = std::min(h, t1 - t);

    const Vec k2 = f(t + T::c2 * h, (y + h * (T::a21 * k1)).eval());
    const Vec k3 = f(t + T::c3 * h, (y + h * (T::a31 * k1 + T::a32 * k2)).eval());
    const Vec k4 = f(t + T::c4 * h, (y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)).eval());
    const Vec k5 = f(t + T::c5 * h,
                     (y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)).eval());
    const Vec k6 =
        f(t + h,
          (y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5)).eval());
    const Vec y5 =
        y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    const Vec k7 = f(t + h, y5);
    const Vec err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 +
                         T::e7 * k7);

    Scalar err_norm = Scalar(0);
    for (int i = 0; i < y.size(); ++i) {
      const Scalar sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const Scalar e = err[i] / sc;
      err_norm += e * e;
    }
    err_norm = std::sqrt(err_norm / Scalar(y.size()));

    if (err_norm <= Scalar(1)) {
      t += h;
      y = y5;
      k1 = k7;
      on_accept(t, y);
      if (t >= t1) break;
    }
    const Scalar factor =
        err_norm > Scalar(0) ? Scalar(0.9) * std::pow(err_norm, Scalar(-0.2)) : Scalar(5);
    h *= std::min(Scalar(5), std::max(Scalar(0.2), factor));
    h = std::min(h, max_step);
    if (h < Scalar(64) * eps * std::max(std::abs(t), Scalar(1)))
      throw FlowError("step size underflow at t = " + std::to_string(double(t)));
  }
  return y;
}

template <typename Scalar>
Scalar next_switch_after(const Params<Scalar>& p, Scalar t) {
  const auto pp = period_phase(p, t);
  const Scalar low_len = p.low_season_length();
  const Scalar guard = Scalar(4) * std::numeric_limits<Scalar>::epsilon() *
                       std::max(std::abs(t), p.omega);
  Scalar cand = Scalar(pp.m) * p.omega + low_len;
  if (cand > t + guard) return cand;
  cand = Scalar(pp.m + 1) * p.omega;
  if (cand > t + guard) return cand;
  return Scalar(pp.m + 1) * p.omega + low_len;
}

/// Integrate a seasonally switched system from t0 to t1, restarting exactly
/// at every season switch. make_rhs(season) builds the smooth right-hand side
/// of one season; on_accept observes every accepted step. The season of a
/// chunk is read off its midpoint, which is insensitive to boundary rounding.
template <typename Scalar, typename Vec, typename MakeRhs, typename OnAccept>
Vec integrate_seasons(const Params<Scalar>& p, Vec y, Scalar t0, Scalar t1,
                      const FlowSettings<Scalar>& st, MakeRhs&& make_rhs, OnAccept&& on_accept) {
  const Scalar hmax = st.max_step > Scalar(0) ? st.max_step : p.omega / Scalar(50);
  Scalar t = t0;
  while (t < t1) {
    const Scalar tb = std::min(next_switch_after(p, t), t1);
    auto f = make_rhs(season_at(p, (t + tb) / Scalar(2)));
    y = dopri5_segment<Scalar, Vec>(f, t, y, tb, st.abs_tol, st.rel_tol, hmax, on_accept);
    t = tb;
  }
  return y;
}

}  // namespace detail

/// State at time t1 of the trajectory through (t0, y), without recording.
template <typename Scalar, typename OnAccept>
State<Scalar> advance_observed(const Params<Scalar>& p, const State<Scalar>& y, Scalar t0,
                               Scalar t1, const FlowSettings<Scalar>& st, OnAccept&& on_accept) {
  validate_settings(st);
  return detail::integrate_seasons(
      p, y, t0, t1, st,
      [&](Season s) {
        const Scalar beta = s == Season::Low ? p.beta1 : p.beta2;
        return [&p, beta](Scalar, const State<Scalar>& v) { return rhs(p, v, beta); };
      },
      on_accept);
}

template <typename Scalar>
State<Scalar> advance(const Params<Scalar>& p, const State<Scalar>& y, Scalar t0, Scalar t1,
                      const FlowSettings<Scalar>& st) {
  return advance_observed(p, y, t0, t1, st, [](Scalar, const State<Scalar>&) {});
}

namespace detail {

template <typename Scalar>
struct RecordMark {
  Scalar t;
  int priority;    // 0 = stride, 1 = switch, 2 = requested end time
  bool is_switch;  // a season starts at this time
  Season starts;
};

// Record times: every season switch in (0, t_end], every positive stride
// multiple below t_end, and t_end itself. Near-coincident marks collapse into
// one sample; the requested end wins the time value, a switch mark always
// contributes its starting season.
template <typename Scalar>
std::vector<RecordMark<Scalar>> record_times(const Params<Scalar>& p, Scalar t_end,
                                             Scalar stride) {
  const Scalar tol = Scalar(1e-9) * std::max(p.omega, stride);
  if (stride > Scalar(0) && t_end / stride > Scalar(1e7))
    throw std::invalid_argument("solve: stride yields too many samples");

  std::vector<RecordMark<Scalar>> marks;
  for (Scalar t = next_switch_after(p, Scalar(0)); t <= t_end + tol;
       t = next_switch_after(p, t)) {
    const Scalar mid_phase = period_phase(p, (t + next_switch_after(p, t)) / Scalar(2)).phase;
    marks.push_back(
        {t, 1, true, mid_phase < p.low_season_length() ? Season::Low : Season::High});
  }
  if (stride > Scalar(0))
    for (Scalar t = stride; t < t_end - tol; t += stride)
      marks.push_back({t, 0, false, Season::Low});
  marks.push_back({t_end, 2, false, Season::Low});
  std::stable_sort(marks.begin(), marks.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });

  std::vector<RecordMark<Scalar>> out;
  for (std::size_t i = 0; i < marks.size();) {
    std::size_t j = i;
    RecordMark<Scalar> keep = marks[i];
    while (j + 1 < marks.size() && marks[j + 1].t - marks[i].t <= tol) {
      ++j;
      if (marks[j].priority > keep.priority) {
        keep.t = marks[j].t;
        keep.priority = marks[j].priority;
      }
      if (marks[j].is_switch) {
        keep.is_switch = true;
        keep.starts = marks[j].starts;
      }
    }
    if (keep.t <= t_end) out.push_back(keep);
    i = j + 1;
  }
  return out;
}

}  // namespace detail

/// Trajectory through p0 over [0, t_end]. Season switches always appear as
/// sample times; stride > 0 adds samples at its multiples, stride = 0 records
/// every accepted step.
template <typename Scalar>
Trajectory<Scalar> solve(const Params<Scalar>& p, const State<Scalar>& p0, Scalar t_end,
                         const FlowSettings<Scalar>& st = {}, Scalar stride = Scalar(0)) {
  validate_settings(st);
  if (!(t_end > Scalar(0))) throw std::invalid_argument("solve: t_end must be positive");
  if (!in_domain(p, p0, Scalar(1e-12)))
    throw std::domain_error("solve: initial state is outside the invariant simplex");

  Trajectory<Scalar> traj;
  traj.settings = st;
  auto label_for = [&](Scalar t, const detail::RecordMark<Scalar>* mark) {
    if (mark && mark->is_switch) {
      const Scalar len =
          mark->starts == Season::Low ? p.low_season_length() : p.high_season_length();
      return SeasonLabel<Scalar>{mark->starts, t, t + len};
    }
    return season_label_at(p, t);
  };
  auto push = [&](Scalar t, const State<Scalar>& y, const detail::RecordMark<Scalar>* mark) {
    traj.samples.push_back({t, clamp_round_off(p, y), label_for(t, mark)});
  };
  push(Scalar(0), p0, nullptr);

  const auto marks = detail::record_times(p, t_end, stride);
  State<Scalar> y = p0;
  Scalar t_prev = Scalar(0);
  for (const auto& mark : marks) {
    auto observer = [&](Scalar t, const State<Scalar>& v) {
      if (stride == Scalar(0) && t < mark.t) push(t, v, nullptr);
    };
    y = advance_observed(p, y, t_prev, mark.t, st, observer);
    push(mark.t, y, &mark);
    t_prev = mark.t;
  }
  return traj;
}

/// The period map: state after one full period started at phase zero. Its
/// fixed points are the states of periodic solutions.
template <typename Scalar>
State<Scalar> period_map(const Params<Scalar>& p, const State<Scalar>& p0,
                         const FlowSettings<Scalar>& st = {}) {
  if (!in_domain(p, p0, Scalar(1e-12)))
    throw std::domain_error("period_map: initial state is outside the invariant simplex");
  return advance(p, p0, Scalar(0), p.omega, st);
}

/// Orbit {P(p0), P^2(p0), ..., P^k(p0)} of the period map.
template <typename Scalar>
std::vector<State<Scalar>> iterate_period_map(const Params<Scalar>& p, const State<Scalar>& p0,
                                              int k, const FlowSettings<Scalar>& st = {}) {
  if (k < 1) throw std::invalid_argument("iterate_period_map: k must be >= 1");
  std::vector<State<Scalar>> orbit;
  orbit.reserve(static_cast<std::size_t>(k));
  State<Scalar> y = p0;
  for (int i = 0; i < k; ++i) {
    y = period_map(p, y, st);
    orbit.push_back(y);
  }
  return orbit;
}

}  // namespace sirs
