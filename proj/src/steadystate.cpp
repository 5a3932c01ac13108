#include "gridhier/steadystate.hpp"

#include "gridhier/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gridhier {

Vector SteadyStateOperator::apply(const Vector& v) const {
  return v - nu * (v.sum() / denom);
}

SteadyStateOperator steady_operator(const Scenario& s) {
  if (!s.secondary) throw Error(ErrorCode::MissingSecondary, "closed-loop equilibrium needs secondary parameters");
  const auto& sec = *s.secondary;
  const double d = s.system.damping;
  const auto n = static_cast<Eigen::Index>(s.agents());

  SteadyStateOperator op;
  op.nu = -s.fleet.droop / d - (sec.beta / d + 1.0) * sec.participation;
  op.denom = 1.0 + op.nu.sum();
  if (!(std::abs(op.denom) > kSingularityTolerance)) {
    throw Error(ErrorCode::SingularOperator,
                fmt::format("1 + 1'nu = {:.3e}; equilibrium is not unique", op.denom));
  }
  // Sherman-Morrison on I + nu 1'.
  op.delta = Matrix::Identity(n, n) - (op.nu / op.denom) * Vector::Ones(n).transpose();
  return op;
}

FullSteadyState steady_full(const Scenario& s, double demand) {
  auto op = steady_operator(s);
  const auto& sec = *s.secondary;
  const auto& k = sec.participation;
  const double damping = s.system.damping;

  // x_ss = Delta (I - k 1') x*  -  (Delta / D)(r + beta k) d
  const Vector feed = s.x_star - k * s.x_star.sum();
  const Vector gain = (s.fleet.droop + sec.beta * k) / damping;
  Vector x_ss = op.apply(feed - gain * demand);

  const double supply = x_ss.sum();
  SteadyState ss;
  ss.y_ss = (supply - demand) / damping;
  ss.z_ss = (sec.beta / damping + 1.0) * supply - sec.beta / damping * demand;
  ss.x_ss = std::move(x_ss);
  return {std::move(ss), std::move(op)};
}

SteadyState steady_primary(const Scenario& s, double demand) {
  const double regulation = s.system.damping - s.fleet.droop.sum();
  if (regulation == 0.0) {
    throw Error(ErrorCode::DegenerateDamping, "D - 1'r = 0; primary equilibrium undefined");
  }
  SteadyState ss;
  ss.y_ss = (s.x_star.sum() - demand) / regulation;
  ss.x_ss = s.x_star + s.fleet.droop * ss.y_ss;
  return ss;
}

SteadyState steady_unit_participation(const Scenario& s, double demand) {
  if (!s.secondary) throw Error(ErrorCode::MissingSecondary, "participation factors required");
  if (!has_unit_participation(*s.secondary)) {
    throw Error(ErrorCode::ParticipationSumViolated,
                fmt::format("1'k = {} but the closed form needs 1'k = 1", participation_sum(*s.secondary)));
  }
  SteadyState ss;
  ss.y_ss = 0.0;
  ss.x_ss = s.x_star + s.secondary->participation * (demand - s.x_star.sum());
  ss.z_ss = demand;
  return ss;
}

IdentityReport participation_identities(const Scenario& s) {
  const auto op = steady_operator(s);
  const auto& sec = *s.secondary;
  const auto n = static_cast<Eigen::Index>(s.agents());
  const Matrix projector =
      Matrix::Identity(n, n) - sec.participation * Vector::Ones(n).transpose();

  IdentityReport report;
  report.participation_sum = participation_sum(sec);
  report.annihilation_residual = (op.delta * projector - projector).cwiseAbs().maxCoeff();
  const Vector gain = op.delta * (s.fleet.droop + sec.beta * sec.participation) / s.system.damping;
  report.gain_residual = (gain + sec.participation).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace gridhier
