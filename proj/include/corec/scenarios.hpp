#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "corec/rectify.hpp"

namespace corec {

struct PerturbationSpec {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  // uniform-ball | single-pair | analytic (analytic is the evaluable
  // closed-form profile used on Lie groups).
  std::string profile = "uniform-ball";
};

// A complete experiment description: group, target, action, ground-truth
// cocycle, perturbation, and solver settings.
struct Scenario {
  std::string name = "custom";
  CompactGroupPtr group;
  TargetGroupPtr target;
  GActionPtr action;

  std::string base_kind = "named";  // named | principal | zero | table
  std::string base_name;
  int base_arity = 1;
  Matrix principal_point;
  std::vector<Matrix> base_table;

  PerturbationSpec perturbation;
  RectifySettings settings;
};

// JSON schema (documented in the README): schema version 1 with fields
// group/target/action/base/perturbation/settings.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

std::vector<std::string> template_names();
Scenario template_scenario(const std::string& name);

// Ground-truth cocycle per the scenario's base description. Named,
// principal, and zero bases are checked to be exact cocycles (defect
// <= 1e-13, sampled on Lie groups); explicit tables are taken as-is.
Cochain base_cocycle(const Scenario& sc);

// Multiplicative exponential perturbation rho~(t) = exp_u(eta(t)) rho(t):
//   uniform-ball: seeded Gaussian direction per element, norm eps*u_t;
//   single-pair: eta supported on the last non-identity element, norm eps;
//   analytic: fixed closed-form low-frequency profile (Lie groups).
Cochain perturb(const Cochain& rho, double epsilon, std::uint64_t seed,
                const std::string& profile);

// base_cocycle followed by the scenario's perturbation.
Cochain scenario_input(const Scenario& sc);

struct RunResult {
  Cochain input;
  Cochain output;
  RectifyReport report;
};

// Dispatches to rectify (matrix targets) or rectify_abelian.
RunResult run_scenario(const Scenario& sc);

struct SweepRow {
  double epsilon = 0.0;
  double final_defect = 0.0;
  double distance = 0.0;
  double fitted_order = 0.0;
  RectifyStatus status = RectifyStatus::Converged;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;     // log-log slope of distance vs epsilon
  bool slope_valid = false;
  double c_hu_max = 0.0;  // max distance / epsilon over converged rows
};

// One rectify run per epsilon with derived seeds seed_i = seed + i; rows
// fail in isolation. jobs > 1 runs rows on a worker pool.
SweepResult sweep(const Scenario& sc, const std::vector<double>& epsilons,
                  int jobs = 1);

}  // namespace corec
