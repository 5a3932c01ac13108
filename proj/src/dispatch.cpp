#include "gridhier/dispatch.hpp"

#include "gridhier/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridhier {
namespace {

void check_problem(const DispatchProblem& p) {
  const auto n = p.cost_a.size();
  if (n == 0) throw Error(ErrorCode::InvalidScenario, "dispatch needs at least one agent");
  if (p.cost_b.size() != n || p.cost_c.size() != n || p.capacity.size() != n) {
    throw Error(ErrorCode::InvalidScenario, "cost and capacity vectors differ in length");
  }
  if (!(p.cost_a.array() > 0.0).all()) throw Error(ErrorCode::InvalidCost, "quadratic coefficients must be positive");
  if (!(p.capacity.array() > 0.0).all()) throw Error(ErrorCode::InvalidScenario, "capacities must be positive");
  const double total = p.capacity.sum();
  if (!(p.demand >= 0.0 && p.demand <= total)) {
    throw Error(ErrorCode::Infeasible,
                fmt::format("demand {} outside the feasible range [0, {}]", p.demand, total));
  }
}

Vector response(const DispatchProblem& p, double lambda) {
  Vector x = (lambda - p.cost_b.array()) / (2.0 * p.cost_a.array());
  return x.cwiseMax(0.0).cwiseMin(p.capacity);
}

DispatchSolution finish(const DispatchProblem& p, Vector x, double lambda) {
  DispatchSolution sol;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    if (x[e] <= kBindingTolerance) sol.binding_lower.push_back(i);
    else if (x[e] >= p.capacity[e] - kBindingTolerance) sol.binding_upper.push_back(i);
  }
  sol.objective = p.objective(x);
  sol.x_star = std::move(x);
  sol.lambda = lambda;
  return sol;
}

}  // namespace

DispatchProblem DispatchProblem::from_fleet(const AgentFleet& fleet, double demand) {
  return {fleet.cost_a, fleet.cost_b, fleet.cost_c, fleet.capacity, demand};
}

double DispatchProblem::objective(const Vector& x) const {
  return (cost_a.array() * x.array().square() + cost_b.array() * x.array() + cost_c.array()).sum();
}

DispatchSolution solve(const DispatchProblem& p, const DispatchOptions& options) {
  check_problem(p);
  const auto supply = [&](double lambda) { return response(p, lambda).sum(); };

  double lo = p.cost_b.minCoeff();
  double hi = (2.0 * p.cost_a.cwiseProduct(p.capacity) + p.cost_b).maxCoeff();
  if (options.bracket) {
    lo = std::min(lo, options.bracket->first);
    hi = std::max(hi, options.bracket->second);
  }

  double lambda = lo;
  double gap = supply(lo) - p.demand;
  if (std::abs(gap) >= 1e-12) {
    lambda = hi;
    gap = supply(hi) - p.demand;
  }
  for (std::size_t it = 0; it < options.max_iterations && std::abs(gap) >= 1e-12; ++it) {
    lambda = 0.5 * (lo + hi);
    gap = supply(lambda) - p.demand;
    if (gap < 0.0) lo = lambda;
    else hi = lambda;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda))) break;
  }

  Vector x = response(p, lambda);
  // Bisection stalls at the lambda resolution; absorb the last sliver of
  // imbalance with one Newton step along the free agents.
  const Eigen::ArrayXd slope =
      ((x.array() > 0.0) && (x.array() < p.capacity.array())).cast<double>() / (2.0 * p.cost_a.array());
  if (slope.sum() > 0.0 && std::abs(gap) > 0.0) {
    lambda -= (x.sum() - p.demand) / slope.sum();
    x = response(p, lambda);
  }
  return finish(p, std::move(x), lambda);
}

DispatchSolution redispatch(const AgentFleet& fleet, double demand) {
  return solve(DispatchProblem::from_fleet(fleet, demand));
}

DispatchSolution brute_force_oracle(const DispatchProblem& p, double grid) {
  if (p.size() > 4) throw Error(ErrorCode::TooLarge, fmt::format("grid oracle supports N <= 4, got {}", p.size()));
  check_problem(p);
  if (!(grid > 0.0)) throw Error(ErrorCode::InvalidScenario, "grid resolution must be positive");

  const auto n = static_cast<Eigen::Index>(p.size());
  auto cost = [&](Eigen::Index i, double v) { return (p.cost_a[i] * v + p.cost_b[i]) * v + p.cost_c[i]; };

  // Grid for each agent: 0, h, 2h, ... plus the capacity itself.
  std::vector<std::vector<double>> points(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& pts = points[static_cast<std::size_t>(i)];
    const auto count = static_cast<std::size_t>(std::floor(p.capacity[i] / grid));
    for (std::size_t j = 0; j <= count; ++j) pts.push_back(static_cast<double>(j) * grid);
    if (pts.back() < p.capacity[i]) pts.push_back(p.capacity[i]);
  }

  double best = std::numeric_limits<double>::infinity();
  Vector best_x = Vector::Zero(n);
  Vector x(n);

  for (Eigen::Index slack = 0; slack < n; ++slack) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) if (i != slack) free.push_back(i);

    // Odometer over the grids of the non-slack agents.
    std::vector<std::size_t> pos(free.size(), 0);
    while (true) {
      double partial = 0.0;
      double fixed_cost = 0.0;
      for (std::size_t f = 0; f < free.size(); ++f) {
        const double v = points[static_cast<std::size_t>(free[f])][pos[f]];
        x[free[f]] = v;
        partial += v;
        fixed_cost += cost(free[f], v);
      }
      const double rest = p.demand - partial;
      if (rest >= 0.0 && rest <= p.capacity[slack]) {
        const double total = fixed_cost + cost(slack, rest);
        if (total < best) {
          best = total;
          x[slack] = rest;
          best_x = x;
        }
      }
      std::size_t f = 0;
      for (; f < free.size(); ++f) {
        if (++pos[f] < points[static_cast<std::size_t>(free[f])].size()) break;
        pos[f] = 0;
      }
      if (f == free.size()) break;
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::Infeasible, "no grid point satisfies the balance constraint");

  // Multiplier estimate: mean marginal cost over strictly interior agents.
  double lambda = 0.0;
  int interior = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (best_x[i] > kBindingTolerance && best_x[i] < p.capacity[i] - kBindingTolerance) {
      lambda += 2.0 * p.cost_a[i] * best_x[i] + p.cost_b[i];
      ++interior;
    }
  }
  if (interior > 0) lambda /= interior;
  return finish(p, std::move(best_x), lambda);
}

KktCertificate check_kkt(const DispatchProblem& p, const DispatchSolution& sol) {
  KktCertificate cert;
  const Vector& x = sol.x_star;
  cert.balance_residual = std::abs(x.sum() - p.demand);
  cert.bound_violation = std::max({0.0, (-x).maxCoeff(), (x - p.capacity).maxCoeff()});

  const auto is_in = [](const std::vector<std::size_t>& set, std::size_t i) {
    return std::find(set.begin(), set.end(), i) != set.end();
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    const double marginal = 2.0 * p.cost_a[e] * x[e] + p.cost_b[e];
    if (is_in(sol.binding_lower, i)) {
      // marginal - lambda - mu_lo = 0 with mu_lo >= 0
      cert.dual_violation = std::max(cert.dual_violation, sol.lambda - marginal);
    } else if (is_in(sol.binding_upper, i)) {
      // marginal - lambda + mu_up = 0 with mu_up >= 0
      cert.dual_violation = std::max(cert.dual_violation, marginal - sol.lambda);
    } else {
      cert.stationarity_residual = std::max(cert.stationarity_residual, std::abs(marginal - sol.lambda));
    }
  }
  return cert;
}

}  // namespace gridhier
