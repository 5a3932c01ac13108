#pragma once

#include "gridhier/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridhier {

enum class Mode { full, primary_only };

/// "full" or "primary" (also accepts "primary_only").
Mode parse_mode(const std::string& text);

struct SimulationOptions {
  /// Defaults to the analytic equilibrium for the first scheduled demand.
  std::optional<SystemState> initial;
  /// Overrides scenario.dt / default_step.
  std::optional<double> dt;
  /// Override for scenario.horizon.
  std::optional<double> horizon;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<double> demand;
  std::vector<Vector> x_ref;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

/// Fixed-step classical RK4 of the closed loop (or the primary-only loop)
/// under the piecewise-constant demand schedule. Demand steps take effect at
/// the grid point nearest their time; off-grid times add a warning.
/// Throws Error(Divergence) once any state magnitude exceeds 1e9.
Trajectory simulate(const Scenario& scenario, Mode mode, const SimulationOptions& options = {});

struct SettleOptions {
  double tol = 1e-10;
  std::size_t max_steps = 20'000'000;
  /// Defaults to the dispatch operating point (0, x*, 1'x*), which involves
  /// no equilibrium formula.
  std::optional<SystemState> initial;
  std::optional<double> dt;
};

/// Integrates through the whole demand schedule, then holds the final demand
/// until max|ds/dt| < tol. Requires a Hurwitz state matrix
/// (Error(Divergence) otherwise); Error(Timeout) after max_steps.
SystemState settle(const Scenario& scenario, Mode mode, const SettleOptions& options = {});

/// Max-abs entry of A s + B u for the given state and demand.
double derivative_norm(const Scenario& scenario, Mode mode, const SystemState& state, double demand);

/// CSV with header t,y,x_1..x_N[,z],d,xref_1..xref_N. Numbers use the
/// shortest round-trip representation, so output is byte-stable.
void write_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace gridhier
