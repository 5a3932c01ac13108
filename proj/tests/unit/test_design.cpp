#include "gridhier/design.hpp"
#include "gridhier/dynamics.hpp"
#include "gridhier/error.hpp"
#include "gridhier/statespace.hpp"
#include "gridhier/steadystate.hpp"

#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace gridhier;
namespace gt = gridhier::testing;

namespace {

AgentFleet fleet_with(std::initializer_list<double> a, std::initializer_list<double> cap) {
  AgentFleet f;
  const auto n = static_cast<Eigen::Index>(a.size());
  f.cost_a = Eigen::Map<const Vector>(a.begin(), n);
  f.capacity = Eigen::Map<const Vector>(cap.begin(), n);
  f.cost_b = Vector::Zero(n);
  f.cost_c = Vector::Zero(n);
  f.tau = Vector::Ones(n);
  f.droop = -Vector::Ones(n);
  return f;
}

}  // namespace

TEST_CASE("participation factors from cost curvature") {
  auto k = design_participation(fleet_with({1.0, 2.0}, {10, 10})).k;
  CHECK(k[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(k[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  k = design_participation(fleet_with({3, 3, 3, 3}, {1, 1, 1, 1})).k;
  CHECK((k.array() - 0.25).abs().maxCoeff() < 1e-15);

  k = design_participation(fleet_with({0.7}, {1})).k;
  CHECK(k[0] == 1.0);

  CHECK_THROWS_AS(design_participation(fleet_with({1.0, -1.0}, {1, 1})), Error);
}

TEST_CASE("designed participation always sums to one and is scale-invariant") {
  gt::Rng rng(79);
  for (int i = 0; i < 100; ++i) {
    auto fleet = gt::random_scenario(rng, false).fleet;
    const auto k = design_participation(fleet).k;
    CHECK(std::abs(k.sum() - 1.0) <= 1e-12);
    CHECK((k.array() > 0.0).all());

    auto scaled = fleet;
    scaled.cost_a *= gt::uniform(rng, 0.01, 100.0);
    CHECK((design_participation(scaled).k - k).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("designed participation drives the frequency error to zero for any demand") {
  gt::Rng rng(83);
  for (int i = 0; i < 50; ++i) {
    auto s = gt::random_scenario(rng, true);
    s.secondary->participation = design_participation(s.fleet).k;
    for (int j = 0; j < 5; ++j) {
      const double d = gt::uniform(rng, 0.0, 20.0);
      CHECK(std::abs(steady_full(s, d).state.y_ss) < 1e-10);
    }
  }
}

TEST_CASE("economic optimality of the designed participation") {
  const auto fleet = fleet_with({1.0, 2.0}, {10, 10});
  auto report = verify_economic_optimality(fleet, 3.0, 4.5);
  CHECK(report.preconditions_hold());
  CHECK(report.residual < 1e-8);
  CHECK(report.certified());
  CHECK(report.redispatch.x_star[0] == doctest::Approx(3.0));
  CHECK(report.redispatch.x_star[1] == doctest::Approx(1.5));

  report = verify_economic_optimality(fleet, 3.0, 3.0);
  CHECK(report.residual < 1e-12);

  const auto tight = fleet_with({1.0, 2.0}, {2.1, 10});
  report = verify_economic_optimality(tight, 3.0, 6.0);
  CHECK_FALSE(report.preconditions_hold());
  CHECK(report.binding == std::vector<std::size_t>{0});
  CHECK_FALSE(report.certified());
  CHECK(report.residual > 1e-3);
}

TEST_CASE("heterogeneous linear costs do not disturb the participation rule") {
  gt::Rng rng(89);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 40; ++i) {
    auto fleet = gt::random_scenario(rng, false, 5).fleet;
    fleet.capacity = Vector::Constant(fleet.cost_a.size(), 50.0);
    fleet.cost_b = gt::uniform_vector(rng, fleet.size(), 0.0, 2.0);
    const double d_hat = gt::uniform(rng, 8.0, 20.0);
    const double d = d_hat * gt::uniform(rng, 0.8, 1.2);
    const auto report = verify_economic_optimality(fleet, d_hat, d);
    if (!report.preconditions_hold()) continue;
    ++checked;
    CHECK(report.residual < 1e-8);
  }
  CHECK(checked >= 20);
}

TEST_CASE("end-to-end: the closed loop lands on the re-dispatched optimum") {
  gt::Rng rng(97);
  int checked = 0;
  for (int i = 0; i < 100 && checked < 10; ++i) {
    auto s = gt::random_scenario(rng, true, 5);
    s.fleet.capacity = Vector::Constant(s.fleet.cost_a.size(), 50.0);
    s.fleet.cost_b = gt::uniform_vector(rng, s.agents(), 0.0, 2.0);
    s.d_hat = gt::uniform(rng, 5.0, 15.0);
    const double d = s.d_hat * gt::uniform(rng, 0.8, 1.2);
    s.x_star = redispatch(s.fleet, s.d_hat).x_star;
    s.secondary->participation = design_participation(s.fleet).k;
    s.demand_schedule = {{0.0, d}};
    const auto target = redispatch(s.fleet, d);
    if (!target.interior() || !redispatch(s.fleet, s.d_hat).interior()) continue;
    if (!(gt::max_real_eigenvalue(assemble_full(s).a) < 0.0)) continue;
    ++checked;
    const auto settled = settle(s, Mode::full);
    CHECK((settled.x - target.x_star).cwiseAbs().maxCoeff() < 1e-5);
  }
  CHECK(checked == 10);
}

TEST_CASE("capacity-proportional droop") {
  const SystemParams sys{1.0, 1.0};
  const auto design = design_droop(sys, fleet_with({1, 1}, {2, 2}), 4.0);
  CHECK(design.kappa == -0.75);
  CHECK(design.r[0] == -1.5);
  CHECK(design.r[1] == -1.5);
  CHECK(sys.damping - design.r.sum() == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(design_droop(sys, fleet_with({1}, {1}), 1.0), Error);
  CHECK_THROWS_AS(design_droop(sys, fleet_with({1}, {1}), 0.5), Error);
  try {
    design_droop(sys, fleet_with({1}, {1}), std::nextafter(1.0, 0.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRegulation);
  }
}

TEST_CASE("proportional sharing and achieved regulation") {
  auto s = gt::two_agent(false);
  s.fleet.capacity << 2.0, 2.0;
  const auto design = design_droop(s.system, s.fleet, 4.0);
  auto report = verify_proportional_sharing(design, s, 3.0);
  CHECK(report.proportional());
  CHECK(report.max_ratio_residual < 1e-10);
  CHECK(report.achieved_regulation == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(report.delta_x[0] == report.delta_x[1]);

  s.fleet.capacity << 1.0, 3.0;
  report = verify_proportional_sharing(design_droop(s.system, s.fleet, 7.0), s, 2.5);
  CHECK(report.delta_x[0] / report.delta_x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  DroopDesign hand = design;
  hand.r << -1.0, -2.0;  // not proportional to (2, 2)
  report = verify_proportional_sharing(hand, s, 3.0);
  CHECK_FALSE(report.proportional());
  CHECK(report.violated_pairs.size() == 1);

  CHECK_THROWS_AS(verify_proportional_sharing(design, s, 2.0), Error);
}

TEST_CASE("droop regulation identity on random fleets") {
  gt::Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    auto s = gt::random_scenario(rng, false);
    const double pi = s.system.damping * gt::uniform(rng, 1.1, 12.0);
    const auto design = design_droop(s.system, s.fleet, pi);
    CHECK(design.r == design.kappa * s.fleet.capacity);
    CHECK(std::abs(s.system.damping - design.r.sum() - pi) <= 1e-12 * pi);
    const double d = s.x_star.sum() + gt::uniform(rng, 0.1, 2.0) * (i % 2 ? 1.0 : -1.0);
    const auto report = verify_proportional_sharing(design, s, d);
    CHECK(report.regulation_error() < 1e-10);
    CHECK(report.proportional());
  }
}
