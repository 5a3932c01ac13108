#include "gridhier/dynamics.hpp"
#include "gridhier/error.hpp"
#include "gridhier/statespace.hpp"
#include "gridhier/steadystate.hpp"

#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gridhier;
namespace gt = gridhier::testing;

namespace {

double state_gap(const SystemState& a, const SystemState& b) {
  double gap = std::max(std::abs(a.y - b.y), (a.x - b.x).cwiseAbs().maxCoeff());
  if (a.z && b.z) gap = std::max(gap, std::abs(*a.z - *b.z));
  return gap;
}

// Valid parameters whose closed loop has spectral abscissa ~ +2.96.
Scenario unstable_single_agent() {
  Scenario s;
  s.system = {0.1, 0.1};
  s.fleet.tau = Vector::Constant(1, 0.1);
  s.fleet.droop = Vector::Constant(1, -0.1);
  s.fleet.capacity = Vector::Constant(1, 10.0);
  s.fleet.cost_a = Vector::Ones(1);
  s.fleet.cost_b = Vector::Zero(1);
  s.fleet.cost_c = Vector::Zero(1);
  s.secondary = SecondaryParams{0.1, -5.0, Vector::Ones(1), false};
  s.x_star = Vector::Ones(1);
  s.demand_schedule = {{0.0, 1.5}};
  s.d_hat = 1.0;
  s.horizon = 100.0;
  return s;
}

}  // namespace

TEST_CASE("zero mismatch from the dispatch point stays put") {
  auto s = gt::two_agent();
  s.demand_schedule = {{0.0, 2.0}};
  SimulationOptions opt;
  opt.initial = SystemState{0.0, s.x_star, 2.0};
  const auto traj = simulate(s, Mode::full, opt);
  REQUIRE(traj.size() > 10);
  for (const auto& st : traj.states) CHECK(state_gap(st, *opt.initial) < 1e-14);
}

TEST_CASE("demand step from the anticipated equilibrium converges to the closed form") {
  auto s = gt::two_agent();
  s.secondary->participation << 0.7, 0.3;
  s.horizon = 80.0;
  s.demand_schedule = {{0.0, 3.0}};
  SimulationOptions opt;
  opt.initial = steady_full(s, s.d_hat).state.as_state();
  const auto traj = simulate(s, Mode::full, opt);
  const auto target = steady_unit_participation(s, 3.0);
  CHECK(state_gap(traj.states.back(), target.as_state()) < 1e-6);
}

TEST_CASE("primary-only step settles on the droop plateau") {
  auto s = gt::two_agent(false);
  s.horizon = 40.0;
  s.demand_schedule = {{0.0, 2.0}, {1.0, 3.0}};
  const auto traj = simulate(s, Mode::primary_only);
  CHECK(traj.states.front().y == 0.0);
  const double plateau = (s.x_star.sum() - 3.0) / (s.system.damping - s.fleet.droop.sum());
  CHECK(std::abs(traj.states.back().y - plateau) < 1e-6);
  CHECK_FALSE(traj.states.back().z.has_value());
}

TEST_CASE("reference trace follows x* + k (z - 1'x*)") {
  auto s = gt::two_agent();
  s.secondary->participation << 0.25, 0.75;
  s.demand_schedule = {{0.0, 2.0}, {0.5, 2.6}};
  const auto traj = simulate(s, Mode::full);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const Vector expected = s.x_star + s.secondary->participation * (*traj.states[j].z - s.x_star.sum());
    CHECK((traj.x_ref[j] - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(traj.demand.front() == 2.0);
  CHECK(traj.demand.back() == 2.6);
}

TEST_CASE("uniform time grid") {
  auto s = gt::two_agent();
  s.dt = 0.05;
  s.horizon = 1.0;
  const auto traj = simulate(s, Mode::full);
  REQUIRE(traj.size() == 21);
  for (std::size_t j = 0; j < traj.size(); ++j) CHECK(traj.times[j] == doctest::Approx(0.05 * static_cast<double>(j)));
  CHECK(traj.warnings.empty());
}

TEST_CASE("off-grid demand steps are snapped with a warning") {
  auto s = gt::two_agent();
  s.dt = 0.01;
  s.horizon = 0.1;
  s.demand_schedule = {{0.0, 2.0}, {0.0132, 3.0}};
  const auto traj = simulate(s, Mode::full);
  REQUIRE(traj.warnings.size() == 1);
  CHECK(traj.warnings.front().find("snapped") != std::string::npos);
  CHECK(traj.demand[0] == 2.0);
  CHECK(traj.demand[1] == 3.0);  // 0.0132 / 0.01 rounds to grid index 1
}

TEST_CASE("settle examples") {
  SUBCASE("constant demand, unit participation") {
    auto s = gt::two_agent();
    SettleOptions opt;
    opt.tol = 1e-11;
    const auto st = settle(s, Mode::full, opt);
    CHECK(state_gap(st, steady_unit_participation(s, 3.0).as_state()) < 1e-8);
  }
  SUBCASE("balanced primary-only") {
    auto s = gt::two_agent(false);
    s.demand_schedule = {{0.0, 2.0}};
    const auto st = settle(s, Mode::primary_only);
    CHECK(st.y == 0.0);
    CHECK(st.x == s.x_star);
  }
  SUBCASE("two-step schedule ends at the final equilibrium") {
    auto s = gt::two_agent();
    s.secondary->participation << 0.2, 0.5;  // 1'k = 0.7: general equilibrium
    s.demand_schedule = {{0.0, 2.5}, {3.0, 1.5}};
    SettleOptions opt;
    opt.tol = 1e-12;
    const auto st = settle(s, Mode::full, opt);
    CHECK(state_gap(st, steady_full(s, 1.5).state.as_state()) < 1e-9);
  }
}

TEST_CASE("superposition of demand inputs") {
  gt::Rng rng(53);
  for (int i = 0; i < 5; ++i) {
    auto base = gt::random_scenario(rng, true, 4);
    base.horizon = 5.0;
    const double d1 = gt::uniform(rng, 0.0, 3.0);
    const double d2 = gt::uniform(rng, -1.0, 1.0);
    SimulationOptions opt;
    opt.initial = steady_full(base, base.d_hat).state.as_state();

    auto both = base;
    both.demand_schedule = {{0.0, d1 + d2}, {2.0, d1}};
    auto first = base;
    first.demand_schedule = {{0.0, d1}, {2.0, d1}};
    auto second = base;
    second.x_star.setZero();
    second.demand_schedule = {{0.0, d2}, {2.0, 0.0}};
    SimulationOptions zero;
    zero.initial = SystemState{0.0, Vector::Zero(base.x_star.size()), 0.0};

    const auto ta = simulate(both, Mode::full, opt);
    const auto tb = simulate(first, Mode::full, opt);
    const auto tc = simulate(second, Mode::full, zero);
    REQUIRE(ta.size() == tc.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < ta.size(); ++j) {
      const Vector diff = to_vector(ta.states[j]) - to_vector(tb.states[j]) - to_vector(tc.states[j]);
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("fourth-order convergence") {
  auto s = gt::two_agent();
  s.secondary->participation << 0.6, 0.4;
  s.fleet.tau << 0.8, 1.7;
  s.horizon = 6.0;
  s.demand_schedule = {{0.0, 2.0}, {1.0, 3.0}};
  auto terminal = [&](double dt) {
    SimulationOptions opt;
    opt.dt = dt;
    return to_vector(simulate(s, Mode::full, opt).states.back());
  };
  const double h = 0.2;
  const Vector reference = terminal(h / 8.0);
  const double e1 = (terminal(h) - reference).cwiseAbs().maxCoeff();
  const double e2 = (terminal(h / 2.0) - reference).cwiseAbs().maxCoeff();
  CHECK(e1 > 1e-12);
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("divergence and timeout") {
  const auto s = unstable_single_agent();
  try {
    simulate(s, Mode::full);
    FAIL("expected Divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergence);
    CHECK(std::string(e.what()).find("spectral abscissa") != std::string::npos);
  }
  try {
    settle(s, Mode::full);
    FAIL("expected Divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergence);
  }

  SettleOptions quick;
  quick.max_steps = 10;
  try {
    settle(gt::two_agent(), Mode::full, quick);
    FAIL("expected Timeout");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Timeout);
  }
}

TEST_CASE("initial state shape is checked") {
  SimulationOptions opt;
  opt.initial = SystemState{0.0, Vector::Ones(2), std::nullopt};
  CHECK_THROWS_AS(simulate(gt::two_agent(), Mode::full, opt), Error);
  CHECK_THROWS_AS(parse_mode("tertiary"), Error);
  CHECK(parse_mode("primary") == Mode::primary_only);
}

TEST_CASE("CSV output") {
  auto s = gt::two_agent();
  s.horizon = 0.5;
  s.dt = 0.1;
  const auto traj = simulate(s, Mode::full);
  std::ostringstream a, b;
  write_csv(traj, a);
  write_csv(simulate(s, Mode::full), b);
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,y,x_1,x_2,z,d,xref_1,xref_2");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == traj.size());

  std::ostringstream p;
  write_csv(simulate(s, Mode::primary_only), p);
  CHECK(p.str().rfind("t,y,x_1,x_2,d,xref_1,xref_2\n", 0) == 0);
}
