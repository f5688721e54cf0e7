#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "corec/cochain.hpp"

namespace corec {

enum class RectifyStatus {
  Converged,
  QuadratureFloor,
  Diverged,
  ChartError,
  GateRejected
};

std::string status_name(RectifyStatus s);

struct RectifySettings {
  double tol = 1e-12;                  // target defect
  int max_iter = 30;
  double input_defect_max = 1.0 / 16;  // admission threshold
  double ad_bound_max = 1e3;           // conjugation-operator bound
  int stagnation_window = 2;
  // Lie-group evaluation sets: node tuples capped by a seeded sample plus
  // seeded random tuples (finite groups are always exhaustive).
  std::uint64_t eval_seed = 7;
  int lie_random_tuples = 48;
  int lie_node_tuple_cap = 4096;

  void validate() const;
};

struct GateResult {
  bool pass = false;
  std::string reason;  // violated bound and witness when rejected
};

struct StepDiagnostics {
  double alpha_sup = 0.0;
  double pre_defect = 0.0;
  double post_defect = 0.0;
};

struct RectifyReport {
  RectifyStatus status = RectifyStatus::Converged;
  int iterations = 0;
  std::vector<double> defect_trace;
  double fitted_k = 0.0;
  double fitted_order = 0.0;
  bool fit_valid = false;
  double final_defect = 0.0;
  double distance = 0.0;
  bool near_coboundary_valid = false;
  double near_coboundary_residual = 0.0;
  std::string gate_reason;
  std::string worst_tuple;
  std::string eval_provenance;
};

// Admission gate: defect within the input threshold and the conjugation
// operator norm of rho bounded over all Haar nodes.
GateResult gate_check(const Cochain& rho, const RectifySettings& settings,
                      const HaarScheme& scheme);

// One correction step: beta = beta_of(rho), alpha = homotopy_average,
// rho'(t) = exp_u(alpha(t)) * rho(t).
std::pair<Cochain, StepDiagnostics> rectify_step(const Cochain& rho,
                                                 const HaarScheme& scheme);

// Full iteration for matrix targets (arity 1). Stops at tol (Converged),
// on stagnation above tol (QuadratureFloor), at max_iter, on two
// consecutive defect increases (Diverged), or on chart errors.
std::pair<Cochain, RectifyReport> rectify(const Cochain& rho,
                                          const RectifySettings& settings,
                                          const HaarScheme& scheme);

// One-shot deformation for abelian targets, any arity >= 1:
// rho' = rho - h(coboundary rho); exact up to quadrature/roundoff.
std::pair<Cochain, RectifyReport> rectify_abelian(const Cochain& rho,
                                                  const RectifySettings& settings,
                                                  const HaarScheme& scheme);

struct ContractionFit {
  double k = 0.0;
  double order = 0.0;
  bool valid = false;
};

// Least-squares fit of log eps_{k+1} = order * log eps_k + log K over
// consecutive trace pairs above the floor.
ContractionFit fit_contraction(const std::vector<double>& trace,
                               double floor = 1e-12);

}  // namespace corec
