#include "gridhier/statespace.hpp"

#include "gridhier/error.hpp"

#include <Eigen/Eigenvalues>

namespace gridhier {
namespace {

std::vector<std::string> labels(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::string> input_labels(std::size_t n) {
  auto out = labels("x*_", n);
  out.emplace_back("d");
  return out;
}

}  // namespace

LtiSystem assemble_full(const Scenario& s) {
  if (!s.secondary) throw Error(ErrorCode::MissingSecondary, "full closed loop needs secondary parameters");
  const auto& sec = *s.secondary;
  const auto n = static_cast<Eigen::Index>(s.agents());
  const double m = s.system.inertia;
  const double d = s.system.damping;
  const Vector inv_tau = s.fleet.tau.cwiseInverse();
  const Eigen::Index z = n + 1;

  LtiSystem sys;
  sys.a = Matrix::Zero(n + 2, n + 2);
  sys.a(0, 0) = -d / m;
  sys.a.block(0, 1, 1, n).setConstant(1.0 / m);

  sys.a.block(1, 0, n, 1) = inv_tau.cwiseProduct(s.fleet.droop);
  sys.a.block(1, 1, n, n).diagonal() = -inv_tau;
  sys.a.block(1, z, n, 1) = inv_tau.cwiseProduct(sec.participation);

  sys.a(z, 0) = sec.beta / sec.tau_z;
  sys.a.block(z, 1, 1, n).setConstant(1.0 / sec.tau_z);
  sys.a(z, z) = -1.0 / sec.tau_z;

  // x* enters through diag(tau)^-1 (I - k 1'); demand only drives y.
  sys.b = Matrix::Zero(n + 2, n + 1);
  sys.b.block(1, 0, n, n) =
      inv_tau.asDiagonal() *
      (Matrix::Identity(n, n) - sec.participation * Vector::Ones(n).transpose());
  sys.b(0, n) = -1.0 / m;

  sys.state_labels = {"y"};
  auto xs = labels("x_", s.agents());
  sys.state_labels.insert(sys.state_labels.end(), xs.begin(), xs.end());
  sys.state_labels.emplace_back("z");
  sys.input_labels = input_labels(s.agents());
  return sys;
}

LtiSystem assemble_primary(const Scenario& s) {
  const auto n = static_cast<Eigen::Index>(s.agents());
  const double m = s.system.inertia;
  const Vector inv_tau = s.fleet.tau.cwiseInverse();

  LtiSystem sys;
  sys.a = Matrix::Zero(n + 1, n + 1);
  sys.a(0, 0) = -s.system.damping / m;
  sys.a.block(0, 1, 1, n).setConstant(1.0 / m);
  sys.a.block(1, 0, n, 1) = inv_tau.cwiseProduct(s.fleet.droop);
  sys.a.block(1, 1, n, n).diagonal() = -inv_tau;

  sys.b = Matrix::Zero(n + 1, n + 1);
  sys.b.block(1, 0, n, n).diagonal() = inv_tau;
  sys.b(0, n) = -1.0 / m;

  sys.state_labels = {"y"};
  auto xs = labels("x_", s.agents());
  sys.state_labels.insert(sys.state_labels.end(), xs.begin(), xs.end());
  sys.input_labels = input_labels(s.agents());
  return sys;
}

Vector input_vector(const Scenario& s, double demand) {
  Vector u(s.x_star.size() + 1);
  u << s.x_star, demand;
  return u;
}

Vector to_vector(const SystemState& state) {
  const Eigen::Index n = state.x.size();
  Vector v(n + 1 + (state.z ? 1 : 0));
  v[0] = state.y;
  v.segment(1, n) = state.x;
  if (state.z) v[n + 1] = *state.z;
  return v;
}

SystemState to_state(const Vector& v, bool with_secondary) {
  const Eigen::Index n = v.size() - 1 - (with_secondary ? 1 : 0);
  SystemState s;
  s.y = v[0];
  s.x = v.segment(1, n);
  if (with_secondary) s.z = v[n + 1];
  return s;
}

double spectral_abscissa(const Matrix& a) {
  if (a.size() == 0) throw Error(ErrorCode::EigenFailure, "empty state matrix");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().real().maxCoeff();
}

}  // namespace gridhier
