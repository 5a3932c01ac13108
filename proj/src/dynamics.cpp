#include "gridhier/dynamics.hpp"

#include "gridhier/error.hpp"
#include "gridhier/statespace.hpp"
#include "gridhier/steadystate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gridhier {
namespace {

constexpr double kDivergenceThreshold = 1e9;

LtiSystem assemble(const Scenario& s, Mode mode) {
  return mode == Mode::full ? assemble_full(s) : assemble_primary(s);
}

// One RK4 step of ds/dt = A s + B u with u held constant is the affine map
//   s+ = P s + h R B u,  P = I + hA R,  R = I + hA/2 + (hA)^2/6 + (hA)^3/24,
// i.e. exactly the classical four-stage update, evaluated once per step size.
class Rk4Propagator {
 public:
  Rk4Propagator(const LtiSystem& sys, double h) : b_(sys.b) {
    const auto n = sys.a.rows();
    const Matrix ha = h * sys.a;
    const Matrix id = Matrix::Identity(n, n);
    const Matrix r = id + ha * (id / 2.0 + ha * (id / 6.0 + ha / 24.0));
    step_ = id + ha * r;
    forcing_ = h * r;
  }

  /// Constant contribution of input u over one step.
  Vector drive(const Vector& u) const { return forcing_ * (b_ * u); }

  void advance(Vector& s, const Vector& drive) const { s = step_ * s + drive; }

 private:
  Matrix b_;
  Matrix step_;
  Matrix forcing_;
};

SystemState warm_start(const Scenario& s, Mode mode) {
  const double d0 = s.demand_schedule.front().demand;
  if (mode == Mode::full) return steady_full(s, d0).state.as_state();
  return steady_primary(s, d0).as_state();
}

SystemState dispatch_point(const Scenario& s, Mode mode) {
  SystemState st;
  st.y = 0.0;
  st.x = s.x_star;
  if (mode == Mode::full) st.z = s.x_star.sum();
  return st;
}

Vector checked_initial(const SystemState& st, Mode mode, std::size_t agents) {
  if (static_cast<std::size_t>(st.x.size()) != agents) {
    throw Error(ErrorCode::InvalidScenario, "initial state has the wrong number of agents");
  }
  if ((mode == Mode::full) != st.z.has_value()) {
    throw Error(ErrorCode::InvalidScenario,
                mode == Mode::full ? "initial state needs z in full mode"
                                   : "initial state must not carry z in primary mode");
  }
  return to_vector(st);
}

[[noreturn]] void diverged(const LtiSystem& sys, double t) {
  double abscissa = std::nan("");
  try {
    abscissa = spectral_abscissa(sys);
  } catch (const Error&) {
  }
  throw Error(ErrorCode::Divergence,
              fmt::format("state magnitude exceeded {:g} at t = {:g} (spectral abscissa {:.6g})",
                          kDivergenceThreshold, t, abscissa));
}

Vector reference(const Scenario& s, Mode mode, const SystemState& st) {
  if (mode == Mode::primary_only) return s.x_star;
  return s.x_star + s.secondary->participation * (*st.z - s.x_star.sum());
}

// Grid index at which each schedule entry takes effect.
std::vector<std::size_t> snap_schedule(const Scenario& s, double dt, std::vector<std::string>& warnings) {
  std::vector<std::size_t> idx;
  idx.reserve(s.demand_schedule.size());
  for (const auto& step : s.demand_schedule) {
    const double ratio = step.time / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
      warnings.push_back(fmt::format("demand step at t = {} snapped to t = {}", step.time, rounded * dt));
    }
    const auto i = static_cast<std::size_t>(rounded);
    if (!idx.empty() && i == idx.back()) {
      warnings.push_back(fmt::format("demand step at t = {} collapses onto the previous step", step.time));
    }
    idx.push_back(i);
  }
  return idx;
}

}  // namespace

Mode parse_mode(const std::string& text) {
  if (text == "full") return Mode::full;
  if (text == "primary" || text == "primary_only") return Mode::primary_only;
  throw Error(ErrorCode::InvalidScenario, "unknown mode '" + text + "' (expected full|primary)");
}

Trajectory simulate(const Scenario& s, Mode mode, const SimulationOptions& options) {
  require_valid(s);
  const LtiSystem sys = assemble(s, mode);
  const bool with_z = mode == Mode::full;

  Trajectory traj;
  traj.dt = options.dt.value_or(step_size(s));
  if (!(traj.dt > 0.0)) throw Error(ErrorCode::InvalidScenario, "dt must be positive");
  const double horizon = options.horizon.value_or(s.horizon);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / traj.dt - 1e-9));

  const auto switch_at = snap_schedule(s, traj.dt, traj.warnings);
  Vector state = checked_initial(options.initial ? *options.initial : warm_start(s, mode), mode, s.agents());

  const Rk4Propagator rk4(sys, traj.dt);
  std::size_t next = 0;
  double demand = s.demand_schedule.front().demand;
  Vector drive;

  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.demand.reserve(steps + 1);
  traj.x_ref.reserve(steps + 1);

  for (std::size_t j = 0;; ++j) {
    bool changed = j == 0;
    while (next < switch_at.size() && switch_at[next] <= j) {
      demand = s.demand_schedule[next].demand;
      ++next;
      changed = true;
    }
    if (changed) drive = rk4.drive(input_vector(s, demand));

    const double t = static_cast<double>(j) * traj.dt;
    auto st = to_state(state, with_z);
    traj.x_ref.push_back(reference(s, mode, st));
    traj.times.push_back(t);
    traj.demand.push_back(demand);
    traj.states.push_back(std::move(st));
    if (j == steps) break;

    rk4.advance(state, drive);
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
      diverged(sys, t + traj.dt);
    }
  }
  return traj;
}

double derivative_norm(const Scenario& s, Mode mode, const SystemState& state, double demand) {
  const LtiSystem sys = assemble(s, mode);
  return (sys.a * to_vector(state) + sys.b * input_vector(s, demand)).cwiseAbs().maxCoeff();
}

SystemState settle(const Scenario& s, Mode mode, const SettleOptions& options) {
  require_valid(s);
  const LtiSystem sys = assemble(s, mode);
  const bool with_z = mode == Mode::full;

  const double abscissa = spectral_abscissa(sys);
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::Divergence,
                fmt::format("state matrix is not Hurwitz (spectral abscissa {:.6g}); no equilibrium to settle to",
                            abscissa));
  }

  const double dt = options.dt.value_or(step_size(s));
  std::vector<std::string> ignored;
  const auto switch_at = snap_schedule(s, dt, ignored);
  const std::size_t last_switch = switch_at.back();

  Vector state = checked_initial(options.initial ? *options.initial : dispatch_point(s, mode), mode, s.agents());
  const Rk4Propagator rk4(sys, dt);

  std::size_t next = 0;
  double demand = s.demand_schedule.front().demand;
  Vector drive;
  Vector input;

  for (std::size_t j = 0; j <= options.max_steps; ++j) {
    bool changed = j == 0;
    while (next < switch_at.size() && switch_at[next] <= j) {
      demand = s.demand_schedule[next].demand;
      ++next;
      changed = true;
    }
    if (changed) {
      input = input_vector(s, demand);
      drive = rk4.drive(input);
    }
    if (j >= last_switch) {
      const double rate = (sys.a * state + sys.b * input).cwiseAbs().maxCoeff();
      if (rate < options.tol) return to_state(state, with_z);
    }
    rk4.advance(state, drive);
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
      diverged(sys, static_cast<double>(j + 1) * dt);
    }
  }
  throw Error(ErrorCode::Timeout,
              fmt::format("derivative still above {:g} after {} steps", options.tol, options.max_steps));
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.states.empty()) return;
  const auto n = traj.states.front().x.size();
  const bool with_z = traj.states.front().z.has_value();

  out << "t,y";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  if (with_z) out << ",z";
  out << ",d";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",xref_" << i;
  out << '\n';

  fmt::memory_buffer line;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    line.clear();
    const auto& st = traj.states[j];
    fmt::format_to(std::back_inserter(line), "{},{}", traj.times[j], st.y);
    for (double v : st.x) fmt::format_to(std::back_inserter(line), ",{}", v);
    if (with_z) fmt::format_to(std::back_inserter(line), ",{}", *st.z);
    fmt::format_to(std::back_inserter(line), ",{}", traj.demand[j]);
    for (double v : traj.x_ref[j]) fmt::format_to(std::back_inserter(line), ",{}", v);
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
}

}  // namespace gridhier
