#include "gridhier/design.hpp"
#include "gridhier/dispatch.hpp"
#include "gridhier/dynamics.hpp"
#include "gridhier/error.hpp"
#include "gridhier/model.hpp"
#include "gridhier/report.hpp"
#include "gridhier/scenario_io.hpp"
#include "gridhier/statespace.hpp"
#include "gridhier/steadystate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gridhier;

namespace {

py::dict trajectory_dict(const Trajectory& traj) {
  const auto rows = static_cast<Eigen::Index>(traj.size());
  const auto n = rows ? traj.states.front().x.size() : 0;
  const bool with_z = rows && traj.states.front().z.has_value();
  Vector t(rows), y(rows), d(rows), z(with_z ? rows : 0);
  Matrix x(rows, n), xref(rows, n);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const auto& st = traj.states[static_cast<std::size_t>(j)];
    t[j] = traj.times[static_cast<std::size_t>(j)];
    y[j] = st.y;
    d[j] = traj.demand[static_cast<std::size_t>(j)];
    x.row(j) = st.x.transpose();
    xref.row(j) = traj.x_ref[static_cast<std::size_t>(j)].transpose();
    if (with_z) z[j] = *st.z;
  }
  py::dict out;
  out["t"] = t;
  out["y"] = y;
  out["x"] = x;
  out["z"] = with_z ? py::cast(z) : py::none();
  out["d"] = d;
  out["x_ref"] = xref;
  out["dt"] = traj.dt;
  out["warnings"] = traj.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchical frequency-control dynamics, equilibria, dispatch and design";

  static py::exception<Error> error(m, "GridhierError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      PyErr_SetObject(exc.ptr(), py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("M", &SystemParams::inertia)
      .def_readwrite("D", &SystemParams::damping);

  py::class_<AgentFleet>(m, "AgentFleet")
      .def(py::init<>())
      .def_readwrite("tau", &AgentFleet::tau)
      .def_readwrite("droop", &AgentFleet::droop)
      .def_readwrite("capacity", &AgentFleet::capacity)
      .def_readwrite("cost_a", &AgentFleet::cost_a)
      .def_readwrite("cost_b", &AgentFleet::cost_b)
      .def_readwrite("cost_c", &AgentFleet::cost_c)
      .def("__len__", &AgentFleet::size);

  py::class_<SecondaryParams>(m, "SecondaryParams")
      .def(py::init<>())
      .def_readwrite("tau_z", &SecondaryParams::tau_z)
      .def_readwrite("beta", &SecondaryParams::beta)
      .def_readwrite("k", &SecondaryParams::participation)
      .def_readwrite("enforce_unit_sum", &SecondaryParams::enforce_unit_sum);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("system", &Scenario::system)
      .def_readwrite("fleet", &Scenario::fleet)
      .def_readwrite("secondary", &Scenario::secondary)
      .def_readwrite("x_star", &Scenario::x_star)
      .def_property(
          "demand_schedule",
          [](const Scenario& s) {
            std::vector<std::pair<double, double>> out;
            for (const auto& step : s.demand_schedule) out.emplace_back(step.time, step.demand);
            return out;
          },
          [](Scenario& s, const std::vector<std::pair<double, double>>& steps) {
            s.demand_schedule.clear();
            for (const auto& [t, d] : steps) s.demand_schedule.push_back({t, d});
          })
      .def_readwrite("d_hat", &Scenario::d_hat)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("dt", &Scenario::dt)
      .def("to_json", [](const Scenario& s) { return scenario_to_json(s).dump(); });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"));

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("errors", &ValidationReport::errors)
      .def_readonly("warnings", &ValidationReport::warnings)
      .def("ok", &ValidationReport::ok);
  m.def("validate", &validate, py::arg("scenario"));

  py::class_<SystemState>(m, "SystemState")
      .def(py::init<>())
      .def(py::init([](double y, Vector x, std::optional<double> z) { return SystemState{y, std::move(x), z}; }),
           py::arg("y"), py::arg("x"), py::arg("z") = py::none())
      .def_readwrite("y", &SystemState::y)
      .def_readwrite("x", &SystemState::x)
      .def_readwrite("z", &SystemState::z);

  py::class_<LtiSystem>(m, "LtiSystem")
      .def_readonly("A", &LtiSystem::a)
      .def_readonly("B", &LtiSystem::b)
      .def_readonly("state_labels", &LtiSystem::state_labels)
      .def_readonly("input_labels", &LtiSystem::input_labels);
  m.def("assemble_full", &assemble_full, py::arg("scenario"));
  m.def("assemble_primary", &assemble_primary, py::arg("scenario"));
  m.def("spectral_abscissa", py::overload_cast<const Matrix&>(&spectral_abscissa), py::arg("a"));

  py::class_<SteadyState>(m, "SteadyState")
      .def_readonly("y", &SteadyState::y_ss)
      .def_readonly("x", &SteadyState::x_ss)
      .def_readonly("z", &SteadyState::z_ss);
  py::class_<SteadyStateOperator>(m, "SteadyStateOperator")
      .def_readonly("delta", &SteadyStateOperator::delta)
      .def_readonly("nu", &SteadyStateOperator::nu)
      .def_readonly("denom", &SteadyStateOperator::denom);
  m.def(
      "steady_full",
      [](const Scenario& s, double d) {
        auto r = steady_full(s, d);
        return py::make_tuple(r.state, r.op);
      },
      py::arg("scenario"), py::arg("demand"));
  m.def("steady_primary", &steady_primary, py::arg("scenario"), py::arg("demand"));
  m.def("steady_unit_participation", &steady_unit_participation, py::arg("scenario"), py::arg("demand"));

  py::class_<IdentityReport>(m, "IdentityReport")
      .def_readonly("participation_sum", &IdentityReport::participation_sum)
      .def_readonly("annihilation_residual", &IdentityReport::annihilation_residual)
      .def_readonly("gain_residual", &IdentityReport::gain_residual)
      .def("holds", &IdentityReport::holds);
  m.def("participation_identities", &participation_identities, py::arg("scenario"));

  m.def(
      "simulate",
      [](const Scenario& s, const std::string& mode, std::optional<SystemState> initial) {
        SimulationOptions opt;
        opt.initial = std::move(initial);
        return trajectory_dict(simulate(s, parse_mode(mode), opt));
      },
      py::arg("scenario"), py::arg("mode") = "full", py::arg("initial") = py::none());
  m.def(
      "settle",
      [](const Scenario& s, const std::string& mode, double tol) {
        SettleOptions opt;
        opt.tol = tol;
        return settle(s, parse_mode(mode), opt);
      },
      py::arg("scenario"), py::arg("mode") = "full", py::arg("tol") = 1e-10);

  py::class_<DispatchProblem>(m, "DispatchProblem")
      .def(py::init([](Vector a, Vector b, Vector c, Vector cap, double demand) {
             return DispatchProblem{std::move(a), std::move(b), std::move(c), std::move(cap), demand};
           }),
           py::arg("cost_a"), py::arg("cost_b"), py::arg("cost_c"), py::arg("capacity"), py::arg("demand"))
      .def_static("from_fleet", &DispatchProblem::from_fleet, py::arg("fleet"), py::arg("demand"))
      .def_readwrite("demand", &DispatchProblem::demand)
      .def("objective", &DispatchProblem::objective);
  py::class_<DispatchSolution>(m, "DispatchSolution")
      .def_readonly("x", &DispatchSolution::x_star)
      .def_readonly("lam", &DispatchSolution::lambda)
      .def_readonly("binding_lower", &DispatchSolution::binding_lower)
      .def_readonly("binding_upper", &DispatchSolution::binding_upper)
      .def_readonly("objective", &DispatchSolution::objective);
  m.def("solve_dispatch", [](const DispatchProblem& p) { return solve(p); }, py::arg("problem"));
  m.def("redispatch", &redispatch, py::arg("fleet"), py::arg("demand"));
  m.def("brute_force_oracle", &brute_force_oracle, py::arg("problem"), py::arg("grid") = 1e-3);

  py::class_<ParticipationDesign>(m, "ParticipationDesign")
      .def_readonly("k", &ParticipationDesign::k)
      .def_readonly("cost_a", &ParticipationDesign::cost_a);
  m.def("design_participation", &design_participation, py::arg("fleet"));

  py::class_<OptimalityReport>(m, "OptimalityReport")
      .def_readonly("k", &OptimalityReport::k)
      .def_readonly("residual", &OptimalityReport::residual)
      .def_readonly("binding", &OptimalityReport::binding)
      .def_readonly("secondary_allocation", &OptimalityReport::secondary_allocation)
      .def("certified", &OptimalityReport::certified);
  m.def("verify_economic_optimality", &verify_economic_optimality, py::arg("fleet"), py::arg("d_hat"),
        py::arg("d"));

  py::class_<DroopDesign>(m, "DroopDesign")
      .def_readonly("r", &DroopDesign::r)
      .def_readonly("kappa", &DroopDesign::kappa)
      .def_readonly("pi", &DroopDesign::pi)
      .def_readonly("capacity", &DroopDesign::capacity);
  m.def("design_droop", &design_droop, py::arg("system"), py::arg("fleet"), py::arg("pi"));

  py::class_<SharingReport>(m, "SharingReport")
      .def_readonly("delta_x", &SharingReport::delta_x)
      .def_readonly("max_ratio_residual", &SharingReport::max_ratio_residual)
      .def_readonly("violated_pairs", &SharingReport::violated_pairs)
      .def_readonly("achieved_regulation", &SharingReport::achieved_regulation)
      .def("proportional", &SharingReport::proportional);
  m.def(
      "verify_proportional_sharing",
      [](const DroopDesign& design, const Scenario& s, std::optional<double> demand) {
        return demand ? verify_proportional_sharing(design, s, *demand) : verify_proportional_sharing(design, s);
      },
      py::arg("design"), py::arg("scenario"), py::arg("demand") = py::none());

  m.def(
      "run_verify",
      [](const Scenario& s, std::optional<std::uint64_t> seed) {
        VerifyOptions opt;
        opt.seed = seed;
        const auto report = run_verify(s, opt);
        return py::make_tuple(report.exit_code(), report.to_json().dump());
      },
      py::arg("scenario"), py::arg("seed") = py::none(),
      "Returns (exit_code, report_json).");
}
