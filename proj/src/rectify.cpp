#include "corec/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace corec {

namespace {

EvaluationSet eval_for(const Cochain& rho, const RectifySettings& s,
                       const HaarScheme& scheme, int arity) {
  return default_eval_set(rho.group(), scheme, arity, s.eval_seed,
                          s.lie_random_tuples, s.lie_node_tuple_cap);
}

// rho'(t) = exp_u(alpha(t)) * rho(t) (abelian: rho + alpha).
Cochain apply_correction(const Cochain& rho, const Cochain& alpha) {
  Cochain r = rho, a = alpha;
  const TargetGroupPtr t = rho.target();
  return make_derived_cochain(
      rho.arity(), rho.group(), rho.target(), rho.action(),
      ValueSpace::GroupValued,
      [r, a, t](std::span<const GroupElement> args) {
        return t->compose(exp_u(*t, a(args)), r(args));
      },
      /*memoize=*/true);
}

double cochain_sup(const Cochain& c, const EvaluationSet& eval) {
  double best = 0.0;
  for (const auto& tup : eval.tuples) {
    best = std::max(best, alg_norm(*c.target(), c(tup.elems)));
  }
  return best;
}

// sup over eval tuples of || log_u(rho'(t) rho(t)^-1) || (matrix) or
// || rho' - rho || (abelian): the closeness of the deformed cochain.
double cochain_distance(const Cochain& next, const Cochain& prev,
                        const EvaluationSet& eval) {
  const TargetGroup& t = *next.target();
  double best = 0.0;
  for (const auto& tup : eval.tuples) {
    const Matrix d = t.compose(next(tup.elems), t.invert(prev(tup.elems)));
    best = std::max(best, t.abelian() ? alg_norm(t, d)
                                      : alg_norm(t, log_u(t, d)));
  }
  return best;
}

void finish_fit(RectifyReport& rep) {
  // Entries at the roundoff plateau (~5e-16 for these dimensions) carry
  // no contraction signal; on floor-limited runs everything at the
  // quadrature floor is equally uninformative.
  double floor = 5e-15;
  if (rep.status == RectifyStatus::QuadratureFloor) {
    floor = std::max(floor, rep.final_defect * 1.5);
  }
  const ContractionFit fit = fit_contraction(rep.defect_trace, floor);
  rep.fitted_k = fit.k;
  rep.fitted_order = fit.order;
  rep.fit_valid = fit.valid;
}

}  // namespace

std::string status_name(RectifyStatus s) {
  switch (s) {
    case RectifyStatus::Converged:
      return "Converged";
    case RectifyStatus::QuadratureFloor:
      return "QuadratureFloor";
    case RectifyStatus::Diverged:
      return "Diverged";
    case RectifyStatus::ChartError:
      return "ChartError";
    case RectifyStatus::GateRejected:
      return "GateRejected";
  }
  return "Unknown";
}

void RectifySettings::validate() const {
  if (!(tol > 0.0)) throw PreconditionError("settings: tol must be positive");
  if (input_defect_max > 0.25) {
    throw PreconditionError(
        "settings: input_defect_max above 0.25 breaks chart safety");
  }
  if (max_iter < 0) throw PreconditionError("settings: max_iter negative");
}

GateResult gate_check(const Cochain& rho, const RectifySettings& settings,
                      const HaarScheme& scheme) {
  settings.validate();
  GateResult res;
  if (!rho.target()->abelian()) {
    for (std::size_t i = 0; i < scheme.nodes.size(); ++i) {
      const double ad = ad_operator_norm(*rho.target(),
                                         rho(scheme.nodes[i].point));
      if (ad > settings.ad_bound_max) {
        std::ostringstream os;
        os << "Ad bound: " << ad << " > " << settings.ad_bound_max
           << " at node " << i;
        res.pass = false;
        res.reason = os.str();
        return res;
      }
    }
  }
  DefectResult d;
  try {
    d = defect(rho, eval_for(rho, settings, scheme, rho.arity() + 1));
  } catch (const BranchCutError& e) {
    res.pass = false;
    res.reason = std::string("defect bound: ") + e.what();
    return res;
  }
  if (d.value > settings.input_defect_max) {
    std::ostringstream os;
    os << "defect bound: " << d.value << " > " << settings.input_defect_max
       << " at tuple " << describe_tuple(d.argmax);
    res.pass = false;
    res.reason = os.str();
    return res;
  }
  res.pass = true;
  return res;
}

std::pair<Cochain, StepDiagnostics> rectify_step(const Cochain& rho,
                                                 const HaarScheme& scheme) {
  if (rho.arity() != 1 || !rho.group_valued()) {
    throw PreconditionError("rectify_step: expected a group-valued 1-cochain");
  }
  if (rho.target()->abelian()) {
    throw PreconditionError("rectify_step: matrix targets only");
  }
  const Cochain beta = beta_of(rho);
  const Cochain alpha = homotopy_average(beta, rho, scheme);
  Cochain next = apply_correction(rho, alpha);

  RectifySettings defaults;
  StepDiagnostics diag;
  EvaluationSet eval1 = eval_for(rho, defaults, scheme, 1);
  EvaluationSet eval2 = eval_for(rho, defaults, scheme, 2);
  diag.alpha_sup = cochain_sup(alpha, eval1);
  diag.pre_defect = defect(rho, eval2).value;
  diag.post_defect = defect(next, eval2).value;
  return {std::move(next), diag};
}

std::pair<Cochain, RectifyReport> rectify(const Cochain& rho,
                                          const RectifySettings& settings,
                                          const HaarScheme& scheme) {
  settings.validate();
  if (rho.arity() != 1 || !rho.group_valued()) {
    throw PreconditionError("rectify: expected a group-valued 1-cochain");
  }
  if (rho.target()->abelian()) {
    throw PreconditionError("rectify: use rectify_abelian for abelian targets");
  }
  RectifyReport rep;
  const EvaluationSet eval2 = eval_for(rho, settings, scheme, 2);
  const EvaluationSet eval1 = eval_for(rho, settings, scheme, 1);
  rep.eval_provenance = eval2.provenance;

  const GateResult gate = gate_check(rho, settings, scheme);
  if (!gate.pass) {
    rep.status = RectifyStatus::GateRejected;
    rep.gate_reason = gate.reason;
    return {rho, rep};
  }

  Cochain current = rho;
  DefectResult d;
  try {
    d = defect(current, eval2);
  } catch (const BranchCutError& e) {
    rep.status = RectifyStatus::ChartError;
    rep.gate_reason = e.what();
    return {rho, rep};
  }
  rep.defect_trace.push_back(d.value);
  rep.worst_tuple = describe_tuple(d.argmax);

  RectifyStatus status = RectifyStatus::QuadratureFloor;
  int increases = 0;
  while (true) {
    if (rep.defect_trace.back() <= settings.tol) {
      status = RectifyStatus::Converged;
      break;
    }
    if (rep.iterations >= settings.max_iter) {
      status = RectifyStatus::QuadratureFloor;
      break;
    }
    Cochain next = current;
    DefectResult dn;
    try {
      const Cochain beta = beta_of(current);
      const Cochain alpha = homotopy_average(beta, current, scheme);
      next = apply_correction(current, alpha);
      dn = defect(next, eval2);
    } catch (const BranchCutError& e) {
      status = RectifyStatus::ChartError;
      rep.gate_reason = e.what();
      break;
    }
    current = std::move(next);
    rep.iterations += 1;
    const double prev = rep.defect_trace.back();
    rep.defect_trace.push_back(dn.value);
    rep.worst_tuple = describe_tuple(dn.argmax);
    increases = (dn.value > prev) ? increases + 1 : 0;
    if (increases >= 2) {
      status = RectifyStatus::Diverged;
      break;
    }
    const std::size_t len = rep.defect_trace.size();
    const int w = settings.stagnation_window;
    if (int(len) >= w + 1 && dn.value > settings.tol &&
        dn.value > 0.5 * rep.defect_trace[len - 1 - std::size_t(w)]) {
      status = RectifyStatus::QuadratureFloor;
      break;
    }
  }

  rep.status = status;
  rep.final_defect = rep.defect_trace.back();
  rep.distance = cochain_distance(current, rho, eval1);
  finish_fit(rep);

  // Accumulated-correction diagnostic: the total correction is a
  // near-coboundary of the initial defect, ||beta0 + delta_|> alpha_total||
  // = O(eps^2) with the almost-action taken along the input cochain.
  if (status == RectifyStatus::Converged && rep.defect_trace.size() > 1) {
    try {
      Cochain input = rho, output = current;
      const TargetGroupPtr t = rho.target();
      Cochain alpha_total = make_derived_cochain(
          1, rho.group(), rho.target(), rho.action(), ValueSpace::AlgebraValued,
          [input, output, t](std::span<const GroupElement> args) {
            return log_u(*t, mat_mul(output(args), mat_inv(input(args))));
          },
          /*memoize=*/true);
      const Cochain beta0 = beta_of(rho);
      double best = 0.0;
      for (const auto& tup : eval2.tuples) {
        const Matrix resid = mat_add(beta0(tup.elems),
                                     twisted_delta_at(alpha_total, rho, tup.elems));
        best = std::max(best, alg_norm(*t, resid));
      }
      rep.near_coboundary_residual = best;
      rep.near_coboundary_valid = true;
    } catch (const BranchCutError&) {
      rep.near_coboundary_valid = false;
    }
  }
  return {std::move(current), rep};
}

std::pair<Cochain, RectifyReport> rectify_abelian(const Cochain& rho,
                                                  const RectifySettings& settings,
                                                  const HaarScheme& scheme) {
  settings.validate();
  if (!rho.group_valued() || rho.arity() < 1) {
    throw PreconditionError("rectify_abelian: expected a group-valued cochain");
  }
  if (!rho.target()->abelian()) {
    throw PreconditionError("rectify_abelian: abelian targets only");
  }
  RectifyReport rep;
  const EvaluationSet eval_n1 = eval_for(rho, settings, scheme, rho.arity() + 1);
  const EvaluationSet eval_n = eval_for(rho, settings, scheme, rho.arity());
  rep.eval_provenance = eval_n1.provenance;

  // No admission gate here: the abelian path involves no chart, so any
  // finite defect is admissible.
  DefectResult d0 = defect(rho, eval_n1);
  rep.defect_trace.push_back(d0.value);
  rep.worst_tuple = describe_tuple(d0.argmax);
  if (d0.value <= settings.tol) {
    rep.status = RectifyStatus::Converged;
    rep.final_defect = d0.value;
    return {rho, rep};
  }

  // One shot: gamma = coboundary(rho) is an exact cocycle (delta delta = 0),
  // so subtracting h(gamma) cancels the whole defect at once.
  const Cochain gamma = coboundary(rho);
  const Cochain h = homotopy_last_slot(gamma, scheme);
  Cochain hc = h;
  const TargetGroupPtr t = rho.target();
  Cochain r = rho;
  Cochain next = make_derived_cochain(
      rho.arity(), rho.group(), rho.target(), rho.action(),
      ValueSpace::GroupValued,
      [r, hc](std::span<const GroupElement> args) {
        return mat_sub(r(args), hc(args));
      },
      /*memoize=*/true);

  DefectResult d1 = defect(next, eval_n1);
  rep.iterations = 1;
  rep.defect_trace.push_back(d1.value);
  rep.worst_tuple = describe_tuple(d1.argmax);
  rep.final_defect = d1.value;
  rep.status = (d1.value <= settings.tol) ? RectifyStatus::Converged
                                          : RectifyStatus::QuadratureFloor;
  rep.distance = cochain_distance(next, rho, eval_n);
  finish_fit(rep);
  return {std::move(next), rep};
}

ContractionFit fit_contraction(const std::vector<double>& trace, double floor) {
  ContractionFit fit;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    if (trace[k] > floor && trace[k + 1] > floor) {
      pts.emplace_back(std::log(trace[k]), std::log(trace[k + 1]));
    }
  }
  if (pts.size() < 2) {
    if (pts.size() == 1) {
      // A single pair cannot separate order from constant.
      fit.valid = false;
    }
    return fit;
  }
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / double(pts.size());
  const double my = sy / double(pts.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 1e-30) {
    fit.order = 0.0;  // flat trace: flagged non-quadratic
    fit.k = std::exp(my);
    fit.valid = true;
    return fit;
  }
  fit.order = sxy / sxx;
  fit.k = std::exp(my - fit.order * mx);
  fit.valid = true;
  return fit;
}

}  // namespace corec
