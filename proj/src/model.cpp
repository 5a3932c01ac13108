#include "gridhier/model.hpp"

#include "gridhier/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridhier {
namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

void check_vector(ValidationReport& report, const Vector& v, std::size_t n,
                  const char* name) {
  if (static_cast<std::size_t>(v.size()) != n) {
    report.errors.push_back(
        fmt::format("{} has length {} but the fleet has {} agents", name, v.size(), n));
  } else if (!all_finite(v)) {
    report.errors.push_back(fmt::format("{} contains non-finite entries", name));
  }
}

// Entry-wise sign rule, reported once per offending index.
template <class Pred>
void check_entries(ValidationReport& report, const Vector& v, Pred ok,
                   const char* rule) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!ok(v[i])) report.errors.push_back(fmt::format("{} violated at agent {}", rule, i + 1));
  }
}

}  // namespace

ValidationReport validate(const Scenario& s) {
  ValidationReport report;

  const auto& sys = s.system;
  if (!(sys.inertia > 0.0)) report.errors.emplace_back("M > 0 violated");
  if (!(sys.damping > 0.0)) report.errors.emplace_back("D > 0 violated");

  const auto& fleet = s.fleet;
  const std::size_t n = fleet.size();
  if (n == 0) {
    report.errors.emplace_back("fleet must contain at least one agent (N >= 1)");
    return report;
  }

  const std::size_t before = report.errors.size();
  check_vector(report, fleet.droop, n, "droop");
  check_vector(report, fleet.capacity, n, "capacity");
  check_vector(report, fleet.cost_a, n, "cost_a");
  check_vector(report, fleet.cost_b, n, "cost_b");
  check_vector(report, fleet.cost_c, n, "cost_c");
  check_vector(report, s.x_star, n, "x_star");
  if (!all_finite(fleet.tau)) report.errors.emplace_back("tau contains non-finite entries");
  const bool shapes_ok = report.errors.size() == before;

  if (shapes_ok) {
    check_entries(report, fleet.tau, [](double v) { return v > 0.0; }, "tau > 0");
    check_entries(report, fleet.droop, [](double v) { return v < 0.0; }, "r < 0");
    check_entries(report, fleet.capacity, [](double v) { return v > 0.0; }, "capacity > 0");
    check_entries(report, fleet.cost_a, [](double v) { return v > 0.0; }, "a > 0");
  }

  if (s.secondary) {
    const auto& sec = *s.secondary;
    if (!(sec.tau_z > 0.0)) report.errors.emplace_back("tau_z > 0 violated");
    if (!(sec.beta < 0.0)) report.errors.emplace_back("beta < 0 violated");
    const std::size_t k_before = report.errors.size();
    check_vector(report, sec.participation, n, "k");
    if (report.errors.size() == k_before) {
      check_entries(report, sec.participation, [](double v) { return v >= 0.0; }, "k >= 0");
      const double sum = participation_sum(sec);
      if (std::abs(sum - 1.0) > kUnitSumTolerance) {
        auto msg = fmt::format(
            "1ᵀk = {} ≠ 1; zero-frequency-error steady-state guarantees void", sum);
        if (sec.enforce_unit_sum) {
          report.errors.push_back(std::move(msg));
        } else {
          report.warnings.push_back(std::move(msg));
        }
      }
      // Closed-loop equilibrium must be unique: 1 + 1'nu away from zero.
      if (shapes_ok && sys.damping > 0.0) {
        const double d = sys.damping;
        const double denom =
            1.0 - fleet.droop.sum() / d - (sec.beta / d + 1.0) * sum;
        if (std::abs(denom) <= 1e-12) {
          report.errors.push_back(fmt::format(
              "steady-state operator singular (1 + 1ᵀν = {}); no unique equilibrium", denom));
        }
      }
    }
  }

  if (s.demand_schedule.empty()) {
    report.errors.emplace_back("demand_schedule must contain at least one step");
  } else {
    if (s.demand_schedule.front().time != 0.0)
      report.errors.emplace_back("demand_schedule must start at t = 0");
    for (std::size_t i = 1; i < s.demand_schedule.size(); ++i) {
      if (!(s.demand_schedule[i].time > s.demand_schedule[i - 1].time)) {
        report.errors.push_back(
            fmt::format("demand_schedule times not strictly increasing at entry {}", i + 1));
      }
    }
    for (const auto& step : s.demand_schedule) {
      if (!std::isfinite(step.demand) || !std::isfinite(step.time)) {
        report.errors.emplace_back("demand_schedule contains non-finite entries");
        break;
      }
    }
  }
  if (!std::isfinite(s.d_hat)) report.errors.emplace_back("d_hat must be finite");

  if (!(s.horizon > 0.0)) report.errors.emplace_back("horizon > 0 violated");
  if (s.dt) {
    if (!(*s.dt > 0.0)) report.errors.emplace_back("dt > 0 violated");
    else if (*s.dt > s.horizon) report.errors.emplace_back("dt <= horizon violated");
  }
  return report;
}

void require_valid(const Scenario& scenario) {
  const auto report = validate(scenario);
  if (report.ok()) return;
  std::string msg;
  for (const auto& e : report.errors) {
    if (!msg.empty()) msg += "; ";
    msg += e;
  }
  throw Error(ErrorCode::InvalidScenario, msg);
}

double default_step(const Scenario& s) {
  double fastest = s.system.inertia / s.system.damping;
  if (s.fleet.tau.size() > 0) fastest = std::min(fastest, s.fleet.tau.minCoeff());
  if (s.secondary) fastest = std::min(fastest, s.secondary->tau_z);
  return fastest / 20.0;
}

double step_size(const Scenario& s) { return s.dt.value_or(default_step(s)); }

double final_demand(const Scenario& s) {
  if (s.demand_schedule.empty()) throw Error(ErrorCode::InvalidScenario, "empty demand schedule");
  return s.demand_schedule.back().demand;
}

double participation_sum(const SecondaryParams& secondary) {
  return secondary.participation.sum();
}

bool has_unit_participation(const SecondaryParams& secondary, double tol) {
  return std::abs(participation_sum(secondary) - 1.0) <= tol;
}

}  // namespace gridhier
