#pragma once

#include "gridhier/model.hpp"

#include <optional>

namespace gridhier {

struct SteadyState {
  double y_ss = 0.0;
  Vector x_ss;
  std::optional<double> z_ss;  // empty for primary-only equilibria

  SystemState as_state() const { return {y_ss, x_ss, z_ss}; }
};

/// Rank-one pieces of the closed-loop equilibrium map:
///   nu    = -r/D - (beta/D + 1) k
///   denom = 1 + 1'nu
///   Delta = (I + nu 1')^-1 = I - nu 1' / denom
struct SteadyStateOperator {
  Matrix delta;
  Vector nu;
  double denom = 1.0;

  /// Delta * v in O(N) without touching the dense matrix.
  Vector apply(const Vector& v) const;
};

inline constexpr double kSingularityTolerance = 1e-12;

/// Builds (nu, denom, Delta). Throws Error(MissingSecondary) or
/// Error(SingularOperator) when |denom| <= kSingularityTolerance.
SteadyStateOperator steady_operator(const Scenario& scenario);

struct FullSteadyState {
  SteadyState state;
  SteadyStateOperator op;
};

/// Equilibrium of the closed loop (primary + secondary) for constant demand.
/// Valid for any participation vector, not only 1'k = 1.
FullSteadyState steady_full(const Scenario& scenario, double demand);

/// Equilibrium of the primary-only loop:
///   y_ss = (1'x* - d) / (D - 1'r),  x_ss = x* + r y_ss.
/// Error(DegenerateDamping) when D - 1'r == 0.
SteadyState steady_primary(const Scenario& scenario, double demand);

/// Closed form for 1'k = 1: (0, x* + k (d - 1'x*), d). Pure vector
/// arithmetic. Error(ParticipationSumViolated) if |1'k - 1| > 1e-12.
SteadyState steady_unit_participation(const Scenario& scenario, double demand);

/// Residuals of the two identities that collapse the closed-loop equilibrium
/// when 1'k = 1:
///   Delta (I - k 1') = I - k 1'
///   (Delta / D)(r + beta k) = -k
struct IdentityReport {
  double participation_sum = 0.0;
  double annihilation_residual = 0.0;  // max-abs entry of Delta(I-k1') - (I-k1')
  double gain_residual = 0.0;          // max-abs entry of (Delta/D)(r+beta k) + k
  double tolerance = 1e-10;

  bool holds() const {
    return annihilation_residual < tolerance && gain_residual < tolerance;
  }
};

/// Reporting only: evaluates the residuals whatever 1'k is.
IdentityReport participation_identities(const Scenario& scenario);

}  // namespace gridhier
