#pragma once

#include "gridhier/dispatch.hpp"
#include "gridhier/model.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace gridhier {

struct ParticipationDesign {
  Vector k;
  Vector cost_a;
};

/// k_n = (1/a_n) / sum_m (1/a_m): each agent picks up excess demand in
/// inverse proportion to the curvature of its cost. Error(InvalidCost) if
/// some a_n <= 0.
ParticipationDesign design_participation(const AgentFleet& fleet);

struct OptimalityReport {
  Vector k;
  DispatchSolution baseline;    // optimum for the anticipated demand
  DispatchSolution redispatch;  // optimum for the realized demand
  Vector secondary_allocation;  // x* + k (d - 1'x*)
  double residual = 0.0;        // max-abs gap to the redispatch optimum
  /// Indices at a box limit in either solution; non-empty means the residual
  /// certifies nothing.
  std::vector<std::size_t> binding;
  double tolerance = 1e-8;

  bool preconditions_hold() const { return binding.empty(); }
  bool certified() const { return preconditions_hold() && residual < tolerance; }
};

/// Compares where secondary control leaves the fleet (with designed k)
/// against a fresh dispatch for the realized demand. Binding limits are
/// reported, not thrown.
OptimalityReport verify_economic_optimality(const AgentFleet& fleet, double d_hat, double d);

struct DroopDesign {
  Vector r;
  double kappa = 0.0;
  double pi = 0.0;
  Vector capacity;
};

/// r = kappa * capacity with kappa = (D - pi) / 1'capacity, so that
/// D - 1'r = pi. Error(InvalidRegulation) unless pi > D.
DroopDesign design_droop(const SystemParams& system, const AgentFleet& fleet, double pi);

struct SharingReport {
  Vector delta_x;
  double max_ratio_residual = 0.0;  // max |dx_i/dx_j - cap_i/cap_j|
  std::vector<std::pair<std::size_t, std::size_t>> violated_pairs;
  double achieved_regulation = 0.0;  // (1'x* - d) / y_ss
  double target_regulation = 0.0;
  double tolerance = 1e-10;

  bool proportional() const { return violated_pairs.empty(); }
  double regulation_error() const;  // relative
};

/// Evaluates the primary-only equilibrium with the designed droop at the
/// scenario's final demand. Error(ZeroDisturbance) when 1'x* == d.
SharingReport verify_proportional_sharing(const DroopDesign& design, const Scenario& scenario);

/// Same, for explicit demand.
SharingReport verify_proportional_sharing(const DroopDesign& design, const Scenario& scenario, double demand);

}  // namespace gridhier
