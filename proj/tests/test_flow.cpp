#include <doctest.h>

#include <random>

#include "sirs/analysis.hpp"
#include "sirs/flow.hpp"
#include "sirs/reproduction.hpp"
#include "support/samplers.hpp"

using namespace sirs;
using testsup::baseline;

namespace {

// Closed-form endemic point of the baseline set with beta = 0.004, written
// out independently of the library formulas (R0 = 274/165).
State<double> baseline_endemic() {
  const double r0 = 0.004 * 100 * (0.4 / 0.12 + 0.3 * 0.6 / 0.22);
  const double S = 100.0 / r0;
  const double denom = 0.12 * 0.22 + 0.05 * (0.02 + 0.4 * 0.2) + 0.05 * 0.1 * 0.6;
  const double Ia = 0.4 * 0.07 * 0.22 * 100.0 * (1.0 - 1.0 / r0) / denom;
  const double Is = 0.6 * 0.12 / (0.4 * 0.22) * Ia;
  return {S, Ia, Is};
}

}  // namespace

TEST_SUITE_BEGIN("flow");

TEST_CASE("disease-free start stays put") {
  const Params<double> p = baseline();
  const State<double> e0(p.N, 0.0, 0.0);
  const auto traj = solve(p, e0, 5 * p.omega, {}, p.omega / 4);
  for (const auto& s : traj.samples) {
    CHECK(s.state[1] == 0.0);
    CHECK(s.state[2] == 0.0);
    CHECK(s.state[0] == doctest::Approx(p.N).epsilon(1e-12));
  }
}

TEST_CASE("equal seasons reduce to one autonomous integration") {
  Params<double> p = baseline();  // beta1 == beta2 == 0.004
  const State<double> p0(90.0, 5.0, 5.0);
  const FlowSettings<double> st;
  const double t_end = 10 * p.omega;
  const State<double> via_seasons = advance(p, p0, 0.0, t_end, st);
  // one smooth segment, switches ignored
  auto f = [&](double, const State<double>& y) { return rhs(p, y, p.beta1); };
  const State<double> direct = detail::dopri5_segment<double, State<double>>(
      f, 0.0, p0, t_end, st.abs_tol, st.rel_tol, p.omega / 50, [](double, const State<double>&) {});
  CHECK((via_seasons - direct).lpNorm<1>() < 1e-8);
}

TEST_CASE("supercritical baseline converges to the closed-form endemic point") {
  const Params<double> p = baseline();
  const State<double> e1 = baseline_endemic();
  const State<double> terminal = advance(p, State<double>(90.0, 5.0, 5.0), 0.0, 2000.0, {});
  CHECK((terminal - e1).lpNorm<1>() < 1e-4);
}

TEST_CASE("period map fixes the disease-free state") {
  const Params<double> p = baseline(0.003, 0.3, 7.0);
  const State<double> e0(p.N, 0.0, 0.0);
  const State<double> image = period_map(p, e0);
  CHECK((image - e0).lpNorm<1>() < 1e-9 * p.N);
}

TEST_CASE("period map of the autonomous model is the omega-time flow") {
  Params<double> p = baseline();
  const State<double> p0(70.0, 20.0, 5.0);
  const State<double> via_map = period_map(p, p0);
  auto f = [&](double, const State<double>& y) { return rhs(p, y, p.beta1); };
  const State<double> direct = detail::dopri5_segment<double, State<double>>(
      f, 0.0, p0, p.omega, 1e-10, 1e-10, p.omega / 50, [](double, const State<double>&) {});
  CHECK((via_map - direct).lpNorm<1>() < 1e-9);
}

TEST_CASE("two period maps equal one solve to 2 omega") {
  Params<double> p = baseline();
  p.beta1 = 0.003;
  p.beta2 = 0.006;  // genuinely seasonal
  const State<double> p0(80.0, 10.0, 5.0);
  const State<double> twice = period_map(p, period_map(p, p0));
  const State<double> direct = advance(p, p0, 0.0, 2 * p.omega, {});
  CHECK((twice - direct).lpNorm<1>() < 1e-9);
}

TEST_CASE("solve to m amounts to m-fold period map composition") {
  Params<double> p = baseline(0.004, 0.4, 6.0);
  p.beta2 = 0.007;
  const State<double> p0(75.0, 15.0, 5.0);
  State<double> composed = p0;
  for (int i = 0; i < 3; ++i) composed = period_map(p, composed);
  const State<double> direct = advance(p, p0, 0.0, 3 * p.omega, {});
  CHECK((composed - direct).lpNorm<1>() < 1e-8);
}

TEST_CASE("iterate_period_map from the fixed point is constant") {
  const Params<double> p = baseline();
  const State<double> e0(p.N, 0.0, 0.0);
  for (const auto& s : iterate_period_map(p, e0, 5))
    CHECK((s - e0).lpNorm<1>() < 1e-9 * p.N);
}

TEST_CASE("subcritical period-map iterates contract onto the disease-free state") {
  const Params<double> p = baseline(0.002);  // R0 ~ 0.83
  const double rho = spectral_radius2(monodromy(p));
  REQUIRE(rho < 1.0);
  // k chosen so the linear envelope rho^k N falls below 1e-7
  const int k = static_cast<int>(std::ceil(std::log(1e-7 / p.N) / std::log(rho)));
  const auto orbit = iterate_period_map(p, State<double>(60.0, 25.0, 10.0), k);
  const State<double> e0(p.N, 0.0, 0.0);
  CHECK((orbit.back() - e0).lpNorm<1>() < 1e-6);
}

TEST_CASE("supercritical period-map iterates keep both infections alive") {
  const Params<double> p = baseline(0.004);  // R0 ~ 1.66, 0 < mu < 1, alpha beta > 0
  const auto orbit = iterate_period_map(p, State<double>(90.0, 5.0, 5.0), 40);
  double floor = p.N;
  for (std::size_t i = 9; i < orbit.size(); ++i)
    floor = std::min({floor, orbit[i][1], orbit[i][2]});
  CHECK(floor > 1e-6 * p.N);
}

TEST_CASE("invariant simplex is forward invariant") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const Params<double> p = testsup::random_params(rng, trial % 2 == 0);
    const State<double> p0 = sample_domain_state(rng, p.N);
    const auto traj = solve(p, p0, 20 * p.omega, {}, p.omega / 4);
    double prev = -1.0;
    for (const auto& s : traj.samples) {
      CHECK(s.t > prev);
      prev = s.t;
      CHECK(in_domain(p, s.state, 1e-8));
    }
  }
}

TEST_CASE("every switch time appears as a sample and labels the new season") {
  const Params<double> p = baseline(0.004, 0.25, 4.0);
  const auto traj = solve(p, State<double>(90.0, 5.0, 5.0), 10.0, {}, 0.7);
  // switches at 3, 4, 7, 8 inside (0, 10)
  for (const double ts : {3.0, 4.0, 7.0, 8.0}) {
    bool found = false;
    for (const auto& s : traj.samples)
      if (s.t == ts) {
        found = true;
        const bool is_high_start = std::fmod(ts, 4.0) == 3.0;
        CHECK(s.season.which == (is_high_start ? Season::High : Season::Low));
        CHECK(s.season.t_begin == ts);
      }
    CHECK(found);
  }
}

TEST_CASE("state at 10 omega is stable under max_step refinement") {
  Params<double> p = baseline(0.003, 0.35, 5.0);
  p.beta2 = 0.006;
  const State<double> p0(85.0, 10.0, 5.0);
  FlowSettings<double> coarse;
  coarse.max_step = p.omega / 50;
  FlowSettings<double> fine = coarse;
  fine.max_step = coarse.max_step / 2;
  const State<double> a = advance(p, p0, 0.0, 10 * p.omega, coarse);
  const State<double> b = advance(p, p0, 0.0, 10 * p.omega, fine);
  CHECK((a - b).lpNorm<1>() <= 1e-8 * p.N);
}

TEST_CASE("nonlinear infections stay below the linear majorant") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const Params<double> p = testsup::random_params(rng, false);
    const State<double> p0 = sample_domain_state(rng, p.N);
    const FlowSettings<double> st;
    const double t_end = 10 * p.omega;
    const auto traj = solve(p, p0, t_end, st, p.omega / 8);
    Vec2<double> lin(p0[1], p0[2]);
    double t_prev = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      const auto& s = traj.samples[i];
      lin = advance_linear_infection(p, lin, t_prev, s.t, st,
                                     [](double, const Vec2<double>&) {});
      t_prev = s.t;
      CHECK(s.state[1] <= lin[0] + 1e-9 * p.N);
      CHECK(s.state[2] <= lin[1] + 1e-9 * p.N);
    }
  }
}

TEST_CASE("linear infection flow matches the exponential product closed form") {
  // piecewise-constant system: the fundamental matrix is a product of
  // exponentials, an independent check of the stepper's accuracy
  Params<double> p = baseline(0.003, 0.4, 6.0);
  p.beta2 = 0.007;
  const Vec2<double> I0(3.0, 2.0);
  const Vec2<double> integrated = advance_linear_infection(
      p, I0, 0.0, p.omega, FlowSettings<double>{}, [](double, const Vec2<double>&) {});
  const Vec2<double> closed = monodromy(p) * I0;
  CHECK((integrated - closed).lpNorm<1>() < 1e-8 * closed.lpNorm<1>());
}

TEST_CASE("initial states outside the simplex are rejected") {
  const Params<double> p = baseline();
  CHECK_THROWS_AS(solve(p, State<double>(-1.0, 0.0, 0.0), 1.0), std::domain_error);
  CHECK_THROWS_AS(solve(p, State<double>(90.0, 20.0, 5.0), 1.0), std::domain_error);
  CHECK_THROWS_AS(period_map(p, State<double>(p.N, p.N, p.N)), std::domain_error);
}

TEST_CASE("step-size underflow is reported with the offending time") {
  using V1 = Eigen::Matrix<double, 1, 1>;
  auto blow_up = [](double, const V1& y) { return V1(y[0] * y[0]); };  // escapes at t = 1
  try {
    detail::dopri5_segment<double, V1>(blow_up, 0.0, V1(1.0), 2.0, 1e-10, 1e-10, 0.1,
                                       [](double, const V1&) {});
    FAIL("expected FlowError");
  } catch (const FlowError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("tolerances outside (0, 1e-2] are rejected") {
  const Params<double> p = baseline();
  FlowSettings<double> st;
  st.rel_tol = 0.5;
  CHECK_THROWS_AS(solve(p, State<double>(90.0, 5.0, 5.0), 1.0, st), std::invalid_argument);
}

TEST_SUITE_END();
