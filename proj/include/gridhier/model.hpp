#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gridhier {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Aggregate inertia and damping of the system-wide performance metric
/// (frequency): M dy/dt + D y = 1'x - d.
struct SystemParams {
  double inertia = 1.0;  // M
  double damping = 1.0;  // D
};

/// Per-agent first-order response, droop gain, capacity and quadratic cost
/// f_n(x) = a_n x^2 + b_n x + c_n. All vectors have one entry per agent.
struct AgentFleet {
  Vector tau;
  Vector droop;
  Vector capacity;
  Vector cost_a;
  Vector cost_b;
  Vector cost_c;

  std::size_t size() const { return static_cast<std::size_t>(tau.size()); }
};

/// Secondary (AGC-style) compensator: tau_z dz/dt = -z + beta y + 1'x, with
/// references x_ref = x* + k (z - 1'x*).
struct SecondaryParams {
  double tau_z = 1.0;
  double beta = -1.0;
  Vector participation;  // k
  /// When set, validation rejects |1'k - 1| > kUnitSumTolerance instead of
  /// only warning about it.
  bool enforce_unit_sum = false;
};

inline constexpr double kUnitSumTolerance = 1e-12;

struct DemandStep {
  double time = 0.0;
  double demand = 0.0;
};

struct Scenario {
  SystemParams system;
  AgentFleet fleet;
  std::optional<SecondaryParams> secondary;
  Vector x_star;
  std::vector<DemandStep> demand_schedule;
  double d_hat = 0.0;
  double horizon = 1.0;
  /// Integration step; nullopt selects `default_step`.
  std::optional<double> dt;

  std::size_t agents() const { return fleet.size(); }
};

/// Stacked dynamic state. `z` is empty when secondary control is disabled.
struct SystemState {
  double y = 0.0;
  Vector x;
  std::optional<double> z;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// Checks every parameter invariant. Never throws; an empty `errors` list
/// means the scenario can be handed to every other operation.
ValidationReport validate(const Scenario& scenario);

/// Throws Error(InvalidScenario) listing every violation when validate fails.
void require_valid(const Scenario& scenario);

/// min(tau_min, M/D, tau_z) / 20.
double default_step(const Scenario& scenario);

/// scenario.dt if given, otherwise default_step.
double step_size(const Scenario& scenario);

/// Demand in force after the last schedule entry.
double final_demand(const Scenario& scenario);

/// Sum of participation factors, 1'k.
double participation_sum(const SecondaryParams& secondary);

bool has_unit_participation(const SecondaryParams& secondary,
                            double tol = kUnitSumTolerance);

}  // namespace gridhier
