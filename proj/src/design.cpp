#include "gridhier/design.hpp"

#include "gridhier/error.hpp"
#include "gridhier/steadystate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace gridhier {

ParticipationDesign design_participation(const AgentFleet& fleet) {
  if (fleet.cost_a.size() == 0) throw Error(ErrorCode::InvalidCost, "no cost coefficients");
  for (Eigen::Index i = 0; i < fleet.cost_a.size(); ++i) {
    if (!(fleet.cost_a[i] > 0.0)) {
      throw Error(ErrorCode::InvalidCost, fmt::format("a_{} = {} is not positive", i + 1, fleet.cost_a[i]));
    }
  }
  const Vector inv = fleet.cost_a.cwiseInverse();
  return {inv / inv.sum(), fleet.cost_a};
}

OptimalityReport verify_economic_optimality(const AgentFleet& fleet, double d_hat, double d) {
  OptimalityReport report;
  report.k = design_participation(fleet).k;
  report.baseline = redispatch(fleet, d_hat);
  report.redispatch = redispatch(fleet, d);

  const Vector& x_star = report.baseline.x_star;
  report.secondary_allocation = x_star + report.k * (d - x_star.sum());
  report.residual = (report.secondary_allocation - report.redispatch.x_star).cwiseAbs().maxCoeff();

  for (const auto* sol : {&report.baseline, &report.redispatch}) {
    for (auto i : sol->binding_lower) report.binding.push_back(i);
    for (auto i : sol->binding_upper) report.binding.push_back(i);
  }
  std::sort(report.binding.begin(), report.binding.end());
  report.binding.erase(std::unique(report.binding.begin(), report.binding.end()), report.binding.end());
  return report;
}

DroopDesign design_droop(const SystemParams& system, const AgentFleet& fleet, double pi) {
  if (!(pi > system.damping)) {
    throw Error(ErrorCode::InvalidRegulation,
                fmt::format("regulation level {} must exceed D = {} for negative droop", pi, system.damping));
  }
  DroopDesign design;
  design.pi = pi;
  design.capacity = fleet.capacity;
  design.kappa = (system.damping - pi) / fleet.capacity.sum();
  design.r = design.kappa * fleet.capacity;
  return design;
}

double SharingReport::regulation_error() const {
  return std::abs(achieved_regulation - target_regulation) / std::abs(target_regulation);
}

SharingReport verify_proportional_sharing(const DroopDesign& design, const Scenario& scenario) {
  return verify_proportional_sharing(design, scenario, final_demand(scenario));
}

SharingReport verify_proportional_sharing(const DroopDesign& design, const Scenario& scenario, double demand) {
  const double mismatch = scenario.x_star.sum() - demand;
  if (mismatch == 0.0) throw Error(ErrorCode::ZeroDisturbance, "1'x* = d; sharing ratios are undefined");

  Scenario designed = scenario;
  designed.fleet.droop = design.r;
  const SteadyState ss = steady_primary(designed, demand);

  SharingReport report;
  report.delta_x = ss.x_ss - scenario.x_star;
  report.target_regulation = design.pi;
  report.achieved_regulation = mismatch / ss.y_ss;

  const auto n = report.delta_x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double forward = std::abs(report.delta_x[i] / report.delta_x[j] - design.capacity[i] / design.capacity[j]);
      const double backward = std::abs(report.delta_x[j] / report.delta_x[i] - design.capacity[j] / design.capacity[i]);
      const double residual = std::max(forward, backward);
      report.max_ratio_residual = std::max(report.max_ratio_residual, residual);
      if (!(residual < report.tolerance)) {
        report.violated_pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return report;
}

}  // namespace gridhier
