#pragma once

// Randomized scenario and dispatch-instance generators shared by the
// property tests and the acceptance suite.

#include "gridhier/dispatch.hpp"
#include "gridhier/model.hpp"

#include <Eigen/Eigenvalues>

#include <cstddef>
#include <random>

namespace gridhier::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& e : v) e = uniform(rng, lo, hi);
  return v;
}

inline std::size_t uniform_count(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Two-agent fixture: M = D = 1, tau = 1, r = -1, x* = (1, 1), d = 3.
inline Scenario two_agent(bool with_secondary = true) {
  Scenario s;
  s.system = {1.0, 1.0};
  s.fleet.tau = Vector::Ones(2);
  s.fleet.droop = -Vector::Ones(2);
  s.fleet.capacity = Vector::Constant(2, 10.0);
  s.fleet.cost_a = (Vector(2) << 1.0, 2.0).finished();
  s.fleet.cost_b = Vector::Zero(2);
  s.fleet.cost_c = Vector::Zero(2);
  if (with_secondary) {
    SecondaryParams sec;
    sec.tau_z = 1.0;
    sec.beta = -1.0;
    sec.participation = Vector::Constant(2, 0.5);
    s.secondary = sec;
  }
  s.x_star = Vector::Ones(2);
  s.demand_schedule = {{0.0, 3.0}};
  s.d_hat = 2.0;
  s.horizon = 10.0;
  return s;
}

/// Parameter ranges of the randomized acceptance criteria:
/// N in [1, 8]; M, D, tau, tau_z in [0.1, 10]; r, beta in [-5, -0.1];
/// k >= 0 normalized to 1'k = 1.
inline Scenario random_scenario(Rng& rng, bool with_secondary, std::size_t max_agents = 8) {
  const std::size_t n = uniform_count(rng, 1, max_agents);
  Scenario s;
  s.system = {uniform(rng, 0.1, 10.0), uniform(rng, 0.1, 10.0)};
  s.fleet.tau = uniform_vector(rng, n, 0.1, 10.0);
  s.fleet.droop = uniform_vector(rng, n, -5.0, -0.1);
  s.fleet.capacity = uniform_vector(rng, n, 5.0, 10.0);
  s.fleet.cost_a = uniform_vector(rng, n, 0.5, 5.0);
  s.fleet.cost_b = uniform_vector(rng, n, 0.0, 2.0);
  s.fleet.cost_c = uniform_vector(rng, n, 0.0, 1.0);
  if (with_secondary) {
    SecondaryParams sec;
    sec.tau_z = uniform(rng, 0.1, 10.0);
    sec.beta = uniform(rng, -5.0, -0.1);
    Vector k = uniform_vector(rng, n, 0.0, 1.0);
    sec.participation = k / k.sum();
    s.secondary = sec;
  }
  s.x_star = uniform_vector(rng, n, 0.5, 3.0);
  s.d_hat = s.x_star.sum();
  s.demand_schedule = {{0.0, s.d_hat * uniform(rng, 0.6, 1.4)}};
  s.horizon = 10.0;
  return s;
}

/// Largest real eigenvalue part of a dense matrix, straight from Eigen.
inline double max_real_eigenvalue(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

inline DispatchProblem random_dispatch(Rng& rng, std::size_t max_agents, double cap_lo, double cap_hi) {
  const std::size_t n = uniform_count(rng, 1, max_agents);
  DispatchProblem p;
  p.cost_a = uniform_vector(rng, n, 0.5, 5.0);
  p.cost_b = uniform_vector(rng, n, 0.0, 3.0);
  p.cost_c = uniform_vector(rng, n, 0.0, 1.0);
  p.capacity = uniform_vector(rng, n, cap_lo, cap_hi);
  p.demand = uniform(rng, 0.0, p.capacity.sum());
  return p;
}

}  // namespace gridhier::testing
