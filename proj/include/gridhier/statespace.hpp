#pragma once

#include "gridhier/model.hpp"

#include <string>
#include <vector>

namespace gridhier {

/// dx/dt = A x + B u with state (y, x_1..x_N[, z]) and input (x*_1..x*_N, d).
struct LtiSystem {
  Matrix a;
  Matrix b;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;

  Eigen::Index states() const { return a.rows(); }
  bool has_secondary() const { return !state_labels.empty() && state_labels.back() == "z"; }
};

/// Closed loop with primary and secondary control. Throws
/// Error(MissingSecondary) when the scenario has no secondary block.
LtiSystem assemble_full(const Scenario& scenario);

/// Primary control only: agents track the constant dispatch x*.
LtiSystem assemble_primary(const Scenario& scenario);

/// Input vector (x*, d).
Vector input_vector(const Scenario& scenario, double demand);

Vector to_vector(const SystemState& state);
SystemState to_state(const Vector& stacked, bool with_secondary);

/// Largest real part over the eigenvalues of `a`. Throws Error(EigenFailure)
/// if the QR iteration fails to converge.
double spectral_abscissa(const Matrix& a);
inline double spectral_abscissa(const LtiSystem& sys) { return spectral_abscissa(sys.a); }

}  // namespace gridhier
