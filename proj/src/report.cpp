#include "gridhier/report.hpp"

#include "gridhier/dynamics.hpp"
#include "gridhier/error.hpp"
#include "gridhier/scenario_io.hpp"
#include "gridhier/statespace.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace gridhier {
namespace {

using Kind = CheckResult::Kind;

double max_gap(const SteadyState& a, const SteadyState& b) {
  double gap = std::max(std::abs(a.y_ss - b.y_ss), (a.x_ss - b.x_ss).cwiseAbs().maxCoeff());
  if (a.z_ss && b.z_ss) gap = std::max(gap, std::abs(*a.z_ss - *b.z_ss));
  return gap;
}

SteadyState from_state(const SystemState& st) { return {st.y, st.x, st.z}; }

double fixed_point_residual(const LtiSystem& sys, const Scenario& s, const SteadyState& ss, double demand) {
  return (sys.a * to_vector(ss.as_state()) + sys.b * input_vector(s, demand)).cwiseAbs().maxCoeff();
}

void add(RunReport& r, std::string name, Kind kind, double value, double tol, std::string detail = {}) {
  r.checks.push_back({std::move(name), kind, value < tol, value, tol, std::move(detail)});
}

void fail(RunReport& r, std::string name, Kind kind, std::string detail) {
  r.checks.push_back({std::move(name), kind, false, std::nan(""), 0.0, std::move(detail)});
}

nlohmann::json state_json(const SteadyState& ss) {
  nlohmann::json j;
  j["y"] = ss.y_ss;
  j["x"] = std::vector<double>(ss.x_ss.begin(), ss.x_ss.end());
  if (ss.z_ss) j["z"] = *ss.z_ss;
  return j;
}

std::string vec_text(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", v[i]);
  return out + "]";
}

std::string state_text(const SteadyState& ss) {
  std::string out = fmt::format("y={} x={}", ss.y_ss, vec_text(ss.x_ss));
  if (ss.z_ss) out += fmt::format(" z={}", *ss.z_ss);
  return out;
}

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::validation: return "validation";
    case Kind::numerical: return "numerical";
    case Kind::info: return "info";
  }
  return "";
}

void verify_loop(RunReport& r, const Scenario& s, Mode mode, const VerifyOptions& opt) {
  const bool full = mode == Mode::full;
  const char* tag = full ? "full" : "primary";
  const LtiSystem sys = full ? assemble_full(s) : assemble_primary(s);

  double abscissa = 0.0;
  try {
    abscissa = spectral_abscissa(sys);
  } catch (const Error& e) {
    fail(r, fmt::format("{}.stable", tag), Kind::numerical, e.what());
    return;
  }
  (full ? r.abscissa_full : r.abscissa_primary) = abscissa;
  r.checks.push_back({fmt::format("{}.stable", tag), Kind::numerical, abscissa < 0.0, abscissa, 0.0,
                      "spectral abscissa must be negative"});

  SteadyState analytic;
  try {
    analytic = full ? steady_full(s, r.demand).state : steady_primary(s, r.demand);
  } catch (const Error& e) {
    fail(r, fmt::format("{}.steady_state", tag), Kind::numerical, e.what());
    return;
  }
  (full ? r.steady_full : r.steady_primary) = analytic;
  add(r, fmt::format("{}.fixed_point", tag), Kind::numerical, fixed_point_residual(sys, s, analytic, r.demand),
      opt.fixed_point_tol, "max |A ss + B u|");

  if (opt.seed) {
    std::mt19937_64 rng(*opt.seed);
    const double scale = std::max({1.0, std::abs(r.demand), std::abs(s.d_hat)});
    std::uniform_real_distribution<double> draw(-scale, 2.0 * scale);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.random_demands; ++i) {
      const double d = draw(rng);
      const auto ss = full ? steady_full(s, d).state : steady_primary(s, d);
      worst = std::max(worst, fixed_point_residual(sys, s, ss, d) / std::max(1.0, std::abs(d)));
    }
    add(r, fmt::format("{}.fixed_point_random", tag), Kind::numerical, worst, opt.fixed_point_tol,
        fmt::format("{} random demands, seed {}", opt.random_demands, *opt.seed));
  }

  if (!(abscissa < 0.0)) return;
  try {
    SettleOptions so;
    so.tol = opt.settle_tol;
    const auto settled = from_state(settle(s, mode, so));
    (full ? r.settled_full : r.settled_primary) = settled;
    add(r, fmt::format("{}.settle_agreement", tag), Kind::numerical, max_gap(settled, analytic), opt.agreement_tol,
        "max |closed form - settled trajectory|");
  } catch (const Error& e) {
    fail(r, fmt::format("{}.settle_agreement", tag), Kind::numerical, e.what());
  }
}

}  // namespace

int RunReport::exit_code() const {
  if (!validation.ok()) return 1;
  bool numerical = false;
  for (const auto& c : checks) {
    if (c.passed || c.kind == Kind::info) continue;
    if (c.kind == Kind::validation) return 1;
    numerical = true;
  }
  return numerical ? 2 : 0;
}

RunReport run_verify(const Scenario& s, const VerifyOptions& opt) {
  RunReport r;
  r.agents = s.agents();
  r.validation = validate(s);
  if (!r.validation.ok()) return r;
  r.demand = final_demand(s);

  verify_loop(r, s, Mode::primary_only, opt);
  if (r.steady_primary) {
    const double mismatch = s.x_star.sum() - r.demand;
    const double regulation = s.system.damping - s.fleet.droop.sum();
    const double predicted = mismatch * s.system.damping / regulation;
    const double actual = r.steady_primary->x_ss.sum() - r.demand;
    add(r, "primary.imbalance_identity", Kind::numerical, std::abs(actual - predicted),
        1e-12 * std::max(1.0, std::abs(mismatch)), "1'x_ss - d = (1'x* - d) D / (D - 1'r)");
  }

  if (s.secondary) {
    verify_loop(r, s, Mode::full, opt);
    try {
      r.identities = participation_identities(s);
      const bool unit = has_unit_participation(*s.secondary);
      const Kind kind = unit ? Kind::numerical : Kind::info;
      add(r, "identities.annihilation", kind, r.identities->annihilation_residual, r.identities->tolerance,
          "Delta (I - k 1') = I - k 1'");
      add(r, "identities.gain", kind, r.identities->gain_residual, r.identities->tolerance,
          "(Delta / D)(r + beta k) = -k");
      if (unit && r.steady_full) {
        const auto closed = steady_unit_participation(s, r.demand);
        add(r, "full.unit_participation_closed_form", Kind::numerical, max_gap(*r.steady_full, closed), 1e-10,
            "closed loop equals (0, x* + k (d - 1'x*), d)");
      }
    } catch (const Error& e) {
      fail(r, "identities", Kind::numerical, e.what());
    }
  }

  try {
    const auto problem = DispatchProblem::from_fleet(s.fleet, s.d_hat);
    r.dispatch = solve(problem);
    const auto cert = check_kkt(problem, *r.dispatch);
    add(r, "dispatch.balance", Kind::numerical, cert.balance_residual, 1e-10, "|1'x - d_hat|");
    add(r, "dispatch.stationarity", Kind::numerical, std::max(cert.stationarity_residual, cert.dual_violation), 1e-8,
        "KKT stationarity and dual sign");
  } catch (const Error& e) {
    fail(r, "dispatch.solve", exit_code_for(e.code()) == 2 ? Kind::numerical : Kind::validation, e.what());
  }
  return r;
}

RunReport run_verify(const std::filesystem::path& path, const VerifyOptions& options) {
  auto report = run_verify(load_scenario(path), options);
  report.source = path.string();
  return report;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["source"] = source;
  j["agents"] = agents;
  j["demand"] = demand;
  j["validation"] = {{"errors", validation.errors}, {"warnings", validation.warnings}};
  if (abscissa_primary) j["spectral_abscissa"]["primary"] = *abscissa_primary;
  if (abscissa_full) j["spectral_abscissa"]["full"] = *abscissa_full;
  if (steady_primary) j["steady_state"]["primary"] = state_json(*steady_primary);
  if (steady_full) j["steady_state"]["full"] = state_json(*steady_full);
  if (settled_primary) j["settled"]["primary"] = state_json(*settled_primary);
  if (settled_full) j["settled"]["full"] = state_json(*settled_full);
  if (identities) {
    j["identities"] = {{"participation_sum", identities->participation_sum},
                       {"annihilation_residual", identities->annihilation_residual},
                       {"gain_residual", identities->gain_residual}};
  }
  if (dispatch) {
    j["dispatch"] = {{"x", std::vector<double>(dispatch->x_star.begin(), dispatch->x_star.end())},
                     {"lambda", dispatch->lambda},
                     {"binding_lower", dispatch->binding_lower},
                     {"binding_upper", dispatch->binding_upper},
                     {"objective", dispatch->objective}};
  }
  auto checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj = {{"name", c.name}, {"kind", kind_name(c.kind)}, {"passed", c.passed}, {"detail", c.detail}};
    cj["value"] = std::isnan(c.value) ? nlohmann::json() : nlohmann::json(c.value);
    cj["tolerance"] = c.tolerance;
    checks_json.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks_json);
  j["exit_code"] = exit_code();
  return j;
}

std::string RunReport::to_text() const {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{}: {}\n", key, value); };
  if (!source.empty()) line("source", source);
  line("agents", fmt::format("{}", agents));
  line("demand", fmt::format("{}", demand));
  for (const auto& e : validation.errors) line("validation.error", e);
  for (const auto& w : validation.warnings) line("warning", w);
  if (abscissa_primary) line("spectral_abscissa.primary", fmt::format("{}", *abscissa_primary));
  if (abscissa_full) line("spectral_abscissa.full", fmt::format("{}", *abscissa_full));
  if (steady_primary) line("steady.primary", state_text(*steady_primary));
  if (steady_full) line("steady.full", state_text(*steady_full));
  if (settled_primary) line("settled.primary", state_text(*settled_primary));
  if (settled_full) line("settled.full", state_text(*settled_full));
  if (identities) {
    line("identities.participation_sum", fmt::format("{}", identities->participation_sum));
  }
  if (dispatch) {
    line("dispatch.x", vec_text(dispatch->x_star));
    line("dispatch.lambda", fmt::format("{}", dispatch->lambda));
    line("dispatch.objective", fmt::format("{}", dispatch->objective));
  }
  for (const auto& c : checks) {
    const char* verdict = c.kind == Kind::info ? "INFO" : (c.passed ? "PASS" : "FAIL");
    std::string value = std::isnan(c.value) ? std::string("n/a") : fmt::format("{:.3e}", c.value);
    line(fmt::format("check.{}", c.name),
         fmt::format("{} value={} tol={:.1e}{}{}", verdict, value, c.tolerance, c.detail.empty() ? "" : " ; ",
                     c.detail));
  }
  line("exit_code", fmt::format("{}", exit_code()));
  return out;
}

}  // namespace gridhier
