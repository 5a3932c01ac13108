#pragma once

#include "gridhier/model.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace gridhier {

/// min sum_n a_n x_n^2 + b_n x_n + c_n  s.t.  1'x = demand, 0 <= x <= capacity.
struct DispatchProblem {
  Vector cost_a;
  Vector cost_b;
  Vector cost_c;
  Vector capacity;
  double demand = 0.0;

  static DispatchProblem from_fleet(const AgentFleet& fleet, double demand);
  std::size_t size() const { return static_cast<std::size_t>(cost_a.size()); }
  double objective(const Vector& x) const;
};

struct DispatchSolution {
  Vector x_star;
  double lambda = 0.0;  // marginal cost of the balance constraint
  std::vector<std::size_t> binding_lower;
  std::vector<std::size_t> binding_upper;
  double objective = 0.0;

  bool interior() const { return binding_lower.empty() && binding_upper.empty(); }
};

/// Distance to a bound below which a box constraint counts as binding.
inline constexpr double kBindingTolerance = 1e-9;

struct DispatchOptions {
  /// Initial lambda bracket; defaults to [min b, max(2 a cap + b)].
  std::optional<std::pair<double, double>> bracket;
  std::size_t max_iterations = 200;
};

/// Bisection on the multiplier: x_n(lambda) = clamp((lambda - b_n) / 2a_n, 0, cap_n)
/// is monotone in lambda, so 1'x(lambda) = demand has a bracketed root.
/// Error(Infeasible) if demand is outside [0, 1'cap]; Error(InvalidCost) if
/// some a_n <= 0.
DispatchSolution solve(const DispatchProblem& problem, const DispatchOptions& options = {});

/// Re-solves for the realized demand d.
DispatchSolution redispatch(const AgentFleet& fleet, double demand);

/// Exhaustive search on a uniform grid (bounds always included). Every agent
/// takes a turn as the balancing variable so the best grid point is within
/// second order of the optimum whenever some agent is interior.
/// Error(TooLarge) for more than four agents.
DispatchSolution brute_force_oracle(const DispatchProblem& problem, double grid);

/// KKT residuals of a candidate solution.
struct KktCertificate {
  double balance_residual = 0.0;       // |1'x - demand|
  double bound_violation = 0.0;        // max(0, -x, x - cap)
  double stationarity_residual = 0.0;  // max over free agents |2a x + b - lambda|
  double dual_violation = 0.0;         // max(0, -mu) over binding agents

  bool holds(double stationarity_tol = 1e-8, double balance_tol = 1e-10) const {
    return balance_residual < balance_tol && bound_violation <= 1e-12 &&
           stationarity_residual < stationarity_tol && dual_violation < stationarity_tol;
  }
};

KktCertificate check_kkt(const DispatchProblem& problem, const DispatchSolution& solution);

}  // namespace gridhier
