#pragma once

#include "gridhier/dispatch.hpp"
#include "gridhier/model.hpp"
#include "gridhier/steadystate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gridhier {

struct CheckResult {
  enum class Kind { validation, numerical, info };

  std::string name;
  Kind kind = Kind::numerical;
  bool passed = true;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunReport {
  std::string source;
  std::size_t agents = 0;
  double demand = 0.0;
  ValidationReport validation;

  std::optional<double> abscissa_full;
  std::optional<double> abscissa_primary;
  std::optional<SteadyState> steady_full;
  std::optional<SteadyState> steady_primary;
  std::optional<SteadyState> settled_full;
  std::optional<SteadyState> settled_primary;
  std::optional<IdentityReport> identities;
  std::optional<DispatchSolution> dispatch;

  std::vector<CheckResult> checks;

  /// 0 all checks pass, 1 validation failure, 2 numerical check failure.
  int exit_code() const;
  bool passed() const { return exit_code() == 0; }

  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct VerifyOptions {
  double settle_tol = 1e-10;
  double agreement_tol = 1e-6;
  double fixed_point_tol = 1e-10;
  /// When set, also checks the closed forms at randomly drawn demands.
  std::optional<std::uint64_t> seed;
  std::size_t random_demands = 8;
};

/// validate -> assemble -> spectral abscissa -> closed-form equilibria ->
/// settle -> identity residuals -> dispatch, collecting one check per step.
RunReport run_verify(const Scenario& scenario, const VerifyOptions& options = {});

/// Loads the file first; parse and I/O problems propagate as Error.
RunReport run_verify(const std::filesystem::path& path, const VerifyOptions& options = {});

}  // namespace gridhier
