// gridhier: command-line front end for scenario simulation, steady-state
// verification, economic dispatch and control design.

#include "gridhier/design.hpp"
#include "gridhier/dispatch.hpp"
#include "gridhier/dynamics.hpp"
#include "gridhier/error.hpp"
#include "gridhier/report.hpp"
#include "gridhier/scenario_io.hpp"
#include "gridhier/statespace.hpp"
#include "gridhier/steadystate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string out;
  bool json = false;
  std::optional<std::uint64_t> seed;
};

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw gridhier::Error(gridhier::ErrorCode::IoError, "cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> to_std(const gridhier::Vector& v) { return {v.begin(), v.end()}; }

std::string vec_text(const gridhier::Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", v[i]);
  return out + "]";
}

gridhier::Scenario load_valid(const std::string& path) {
  auto scenario = gridhier::load_scenario(path);
  const auto report = gridhier::validate(scenario);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (!report.ok()) {
    for (const auto& e : report.errors) std::cerr << "invalid: " << e << '\n';
    throw gridhier::Error(gridhier::ErrorCode::InvalidScenario, path + " failed validation");
  }
  return scenario;
}

void print_matrix_csv(std::ostream& out, const std::string& title, const gridhier::Matrix& m,
                      const std::vector<std::string>& rows, const std::vector<std::string>& cols) {
  out << "# " << title << '\n';
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << fmt::format(",{}", m(i, j));
    out << '\n';
  }
}

json matrix_json(const gridhier::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json state_json(const gridhier::SteadyState& ss) {
  json j = {{"y", ss.y_ss}, {"x", to_std(ss.x_ss)}};
  if (ss.z_ss) j["z"] = *ss.z_ss;
  return j;
}

int cmd_matrices(const Globals& g, const std::string& path, bool primary) {
  const auto s = load_valid(path);
  const bool full = s.secondary && !primary;
  const auto sys = full ? gridhier::assemble_full(s) : gridhier::assemble_primary(s);
  const double abscissa = gridhier::spectral_abscissa(sys);
  Output out(g.out);
  if (g.json) {
    json j = {{"mode", full ? "full" : "primary"},
              {"state_labels", sys.state_labels},
              {"input_labels", sys.input_labels},
              {"A", matrix_json(sys.a)},
              {"B", matrix_json(sys.b)},
              {"spectral_abscissa", abscissa}};
    out.stream() << j.dump(2) << '\n';
  } else {
    print_matrix_csv(out.stream(), full ? "A (full)" : "A (primary)", sys.a, sys.state_labels, sys.state_labels);
    print_matrix_csv(out.stream(), full ? "B (full)" : "B (primary)", sys.b, sys.state_labels, sys.input_labels);
    out.stream() << fmt::format("# spectral_abscissa,{}\n", abscissa);
  }
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& path, const std::string& mode_text) {
  const auto s = load_valid(path);
  const auto mode = gridhier::parse_mode(mode_text);
  const auto traj = gridhier::simulate(s, mode);
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  Output out(g.out);
  gridhier::write_csv(traj, out.stream());
  return 0;
}

int cmd_steady(const Globals& g, const std::string& path, bool primary_only, bool verify,
               std::optional<double> demand_opt) {
  const auto s = load_valid(path);
  const double demand = demand_opt.value_or(gridhier::final_demand(s));
  const bool full = s.secondary && !primary_only;
  if (!primary_only && !s.secondary) std::cerr << "warning: no secondary block; reporting primary-only equilibrium\n";

  const auto ss = full ? gridhier::steady_full(s, demand).state : gridhier::steady_primary(s, demand);
  json j = {{"mode", full ? "full" : "primary"}, {"demand", demand}, {"steady_state", state_json(ss)}};
  std::string text = fmt::format("mode: {}\ndemand: {}\ny_ss: {}\nx_ss: {}\n", full ? "full" : "primary", demand,
                                 ss.y_ss, vec_text(ss.x_ss));
  if (ss.z_ss) text += fmt::format("z_ss: {}\n", *ss.z_ss);

  int code = 0;
  if (verify) {
    gridhier::Scenario held = s;
    held.demand_schedule = {{0.0, demand}};
    const auto mode = full ? gridhier::Mode::full : gridhier::Mode::primary_only;
    const auto settled = gridhier::settle(held, mode);
    double residual = std::max(std::abs(settled.y - ss.y_ss), (settled.x - ss.x_ss).cwiseAbs().maxCoeff());
    if (ss.z_ss) residual = std::max(residual, std::abs(*settled.z - *ss.z_ss));
    j["settle_residual"] = residual;
    text += fmt::format("settle_residual: {:.3e}\n", residual);
    if (!(residual < 1e-6)) code = 2;
  }
  Output out(g.out);
  out.stream() << (g.json ? j.dump(2) + "\n" : text);
  return code;
}

int cmd_dispatch(const Globals& g, const std::string& path, std::optional<double> demand_opt, bool oracle,
                 double grid) {
  const auto s = load_valid(path);
  const auto problem = gridhier::DispatchProblem::from_fleet(s.fleet, demand_opt.value_or(s.d_hat));
  const auto sol = gridhier::solve(problem);
  const auto cert = gridhier::check_kkt(problem, sol);

  json j = {{"demand", problem.demand},
            {"x", to_std(sol.x_star)},
            {"lambda", sol.lambda},
            {"binding_lower", sol.binding_lower},
            {"binding_upper", sol.binding_upper},
            {"objective", sol.objective},
            {"kkt", {{"balance", cert.balance_residual}, {"stationarity", cert.stationarity_residual}}}};
  auto one_based = [](const std::vector<std::size_t>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", v[i] + 1);
    return out + "]";
  };
  std::string text = fmt::format("demand: {}\nx: {}\nlambda: {}\nbinding_lower: {}\nbinding_upper: {}\nobjective: {}\n",
                                 problem.demand, vec_text(sol.x_star), sol.lambda, one_based(sol.binding_lower),
                                 one_based(sol.binding_upper), sol.objective);
  int code = cert.holds() ? 0 : 2;
  if (oracle) {
    const auto brute = gridhier::brute_force_oracle(problem, grid);
    const double gap = std::abs(brute.objective - sol.objective);
    j["oracle"] = {{"grid", grid}, {"x", to_std(brute.x_star)}, {"objective", brute.objective}, {"gap", gap}};
    text += fmt::format("oracle.x: {}\noracle.objective: {}\noracle.gap: {:.3e}\n", vec_text(brute.x_star),
                        brute.objective, gap);
    if (!(gap <= 5.0 * grid)) code = 2;
  }
  Output out(g.out);
  out.stream() << (g.json ? j.dump(2) + "\n" : text);
  return code;
}

int cmd_design_k(const Globals& g, const std::string& path, bool write) {
  auto s = load_valid(path);
  const auto design = gridhier::design_participation(s.fleet);
  json j = {{"k", to_std(design.k)}};
  std::string text = fmt::format("k: {}\n", vec_text(design.k));
  if (s.secondary) {
    const auto rep = gridhier::verify_economic_optimality(s.fleet, s.d_hat, gridhier::final_demand(s));
    j["optimality"] = {{"residual", rep.residual}, {"binding", rep.binding}, {"certified", rep.certified()}};
    text += fmt::format("optimality_residual: {:.3e}\ncertified: {}\n", rep.residual, rep.certified());
  }
  if (write) {
    if (!s.secondary) throw gridhier::Error(gridhier::ErrorCode::MissingSecondary, "no secondary block to patch");
    s.secondary->participation = design.k;
    gridhier::save_scenario(s, path);
    text += "written: " + path + "\n";
  }
  Output out(g.out);
  out.stream() << (g.json ? j.dump(2) + "\n" : text);
  return 0;
}

int cmd_design_droop(const Globals& g, const std::string& path, double pi, bool write) {
  auto s = load_valid(path);
  const auto design = gridhier::design_droop(s.system, s.fleet, pi);
  json j = {{"pi", design.pi}, {"kappa", design.kappa}, {"r", to_std(design.r)}};
  std::string text = fmt::format("pi: {}\nkappa: {}\nr: {}\n", design.pi, design.kappa, vec_text(design.r));
  const double demand = gridhier::final_demand(s);
  if (s.x_star.sum() != demand) {
    const auto rep = gridhier::verify_proportional_sharing(design, s, demand);
    j["sharing"] = {{"delta_x", to_std(rep.delta_x)},
                    {"max_ratio_residual", rep.max_ratio_residual},
                    {"achieved_regulation", rep.achieved_regulation}};
    text += fmt::format("delta_x: {}\nmax_ratio_residual: {:.3e}\nachieved_regulation: {}\n", vec_text(rep.delta_x),
                        rep.max_ratio_residual, rep.achieved_regulation);
  }
  if (write) {
    s.fleet.droop = design.r;
    gridhier::save_scenario(s, path);
    text += "written: " + path + "\n";
  }
  Output out(g.out);
  out.stream() << (g.json ? j.dump(2) + "\n" : text);
  return 0;
}

struct VerifyOutcome {
  int code = 0;
  std::string text;
  json doc;
};

VerifyOutcome verify_one(const fs::path& path, const gridhier::VerifyOptions& options) {
  VerifyOutcome o;
  try {
    const auto report = gridhier::run_verify(path, options);
    o.code = report.exit_code();
    o.text = report.to_text();
    o.doc = report.to_json();
  } catch (const gridhier::Error& e) {
    o.code = gridhier::exit_code_for(e.code());
    o.text = fmt::format("source: {}\nerror: {}\nexit_code: {}\n", path.string(), e.what(), o.code);
    o.doc = {{"source", path.string()}, {"error", e.what()}, {"exit_code", o.code}};
  }
  return o;
}

int cmd_verify(const Globals& g, const std::string& target, unsigned jobs) {
  gridhier::VerifyOptions options;
  options.seed = g.seed;

  std::vector<fs::path> files;
  if (fs::is_directory(target)) {
    for (const auto& entry : fs::directory_iterator(target)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(target);
  }

  std::vector<VerifyOutcome> results(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) results[i] = verify_one(files[i], options);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& r : results) code = std::max(code, r.code);

  Output out(g.out);
  if (g.json) {
    if (results.size() == 1 && !fs::is_directory(target)) {
      out.stream() << results.front().doc.dump(2) << '\n';
    } else {
      json arr = json::array();
      for (auto& r : results) arr.push_back(r.doc);
      out.stream() << arr.dump(2) << '\n';
    }
  } else {
    for (std::size_t i = 0; i < results.size(); ++i) out.stream() << (i ? "\n" : "") << results[i].text;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical frequency-control simulation and design toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--out", g.out, "Write output to this file instead of stdout");
  app.add_flag("--json", g.json, "Machine-readable JSON output");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized checks (verify)");
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Parallel workers when verifying a directory")->check(CLI::PositiveNumber);

  std::string scenario;
  bool primary = false;
  auto* matrices = app.add_subcommand("matrices", "Print the state-space matrices A and B as CSV blocks");
  matrices->add_option("scenario", scenario, "Scenario JSON file")->required();
  matrices->add_flag("--primary", primary, "Primary-only system even when secondary parameters exist");

  std::string mode = "full";
  auto* simulate = app.add_subcommand("simulate", "Integrate the dynamics and emit a CSV trajectory");
  simulate->add_option("scenario", scenario, "Scenario JSON file")->required();
  simulate->add_option("--mode", mode, "full|primary")->check(CLI::IsMember({"full", "primary"}));

  bool primary_only = false;
  bool verify_flag = false;
  std::optional<double> demand;
  auto* steady = app.add_subcommand("steady", "Closed-form equilibrium for the final scheduled demand");
  steady->add_option("scenario", scenario, "Scenario JSON file")->required();
  steady->add_flag("--primary-only", primary_only, "Primary-only equilibrium");
  steady->add_flag("--verify", verify_flag, "Cross-check against a settled simulation");
  steady->add_option("--demand", demand, "Override the demand");

  bool oracle = false;
  double grid = 1e-3;
  auto* dispatch = app.add_subcommand("dispatch", "Solve the economic dispatch");
  dispatch->add_option("scenario", scenario, "Scenario JSON file")->required();
  dispatch->add_option("--demand", demand, "Demand to serve (default: d_hat)");
  dispatch->add_flag("--oracle", oracle, "Cross-check with the exhaustive grid search (N <= 4)");
  dispatch->add_option("--grid", grid, "Grid resolution for --oracle")->check(CLI::PositiveNumber);

  bool write = false;
  auto* design_k = app.add_subcommand("design-k", "Design cost-optimal participation factors");
  design_k->add_option("scenario", scenario, "Scenario JSON file")->required();
  design_k->add_flag("--write", write, "Patch the scenario file in place");

  double pi = 0.0;
  auto* design_droop = app.add_subcommand("design-droop", "Design capacity-proportional droop gains");
  design_droop->add_option("scenario", scenario, "Scenario JSON file")->required();
  design_droop->add_option("--pi", pi, "Regulation level (must exceed D)")->required();
  design_droop->add_flag("--write", write, "Patch the scenario file in place");

  auto* verify = app.add_subcommand("verify", "Run every consistency check on a scenario or a directory of them");
  verify->add_option("scenario", scenario, "Scenario JSON file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*matrices) return cmd_matrices(g, scenario, primary);
    if (*simulate) return cmd_simulate(g, scenario, mode);
    if (*steady) return cmd_steady(g, scenario, primary_only, verify_flag, demand);
    if (*dispatch) return cmd_dispatch(g, scenario, demand, oracle, grid);
    if (*design_k) return cmd_design_k(g, scenario, write);
    if (*design_droop) return cmd_design_droop(g, scenario, pi, write);
    if (*verify) return cmd_verify(g, scenario, jobs);
  } catch (const gridhier::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gridhier::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
