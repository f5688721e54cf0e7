#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corec/groups.hpp"
#include "corec/target.hpp"

namespace corec {

enum class ValueSpace { GroupValued, AlgebraValued };

// A map G^n -> U (group-valued) or G^n -> Lie(U) (algebra-valued).
// Finite groups carry a full table indexed row-major by element indices
// (first argument most significant); Lie groups carry a pure evaluator
// with a memo cache keyed by coordinates quantized on a 1e-12 grid.
// Cochains are immutable and safe to evaluate concurrently.
class Cochain {
 public:
  using Evaluator = std::function<Matrix(std::span<const GroupElement>)>;

  Cochain() = default;

  static Cochain from_table(int arity, CompactGroupPtr group,
                            TargetGroupPtr target, GActionPtr action,
                            std::vector<Matrix> table, ValueSpace space);
  static Cochain from_evaluator(int arity, CompactGroupPtr group,
                                TargetGroupPtr target, GActionPtr action,
                                Evaluator eval, ValueSpace space);

  int arity() const { return arity_; }
  ValueSpace space() const { return space_; }
  bool group_valued() const { return space_ == ValueSpace::GroupValued; }
  const CompactGroupPtr& group() const { return group_; }
  const TargetGroupPtr& target() const { return target_; }
  const GActionPtr& action() const { return action_; }
  bool tabulated() const { return table_ != nullptr; }
  const std::vector<Matrix>& table() const { return *table_; }

  Matrix operator()(std::span<const GroupElement> args) const;
  Matrix operator()(const GroupElement& s) const;  // arity-1 sugar
  Matrix operator()(const GroupElement& s, const GroupElement& t) const;

  std::size_t tuple_index(std::span<const GroupElement> args) const;

  // Copy with the memo cache bypassed; results must agree bit-for-bit.
  Cochain without_memo() const;

 private:
  int arity_ = 1;
  ValueSpace space_ = ValueSpace::GroupValued;
  CompactGroupPtr group_;
  TargetGroupPtr target_;
  GActionPtr action_;
  std::shared_ptr<const std::vector<Matrix>> table_;
  Evaluator eval_;

  struct Memo {
    std::mutex mu;
    std::unordered_map<std::string, Matrix> map;
  };
  std::shared_ptr<Memo> memo_;
  bool memo_enabled_ = true;
};

struct EvalTuple {
  std::vector<GroupElement> elems;
};

// Tuples over which sup-norms are estimated: exhaustive for finite
// groups; Haar-node tuples (capped by a seeded sample) plus seeded
// random tuples for Lie groups.
struct EvaluationSet {
  int tuple_arity = 2;
  std::vector<EvalTuple> tuples;
  std::string provenance;
};

// Builds a derived cochain from a pointwise rule: tabulated eagerly on
// finite groups, a (optionally memoized) evaluator on Lie groups.
Cochain make_derived_cochain(int arity, const CompactGroupPtr& g,
                             const TargetGroupPtr& t, const GActionPtr& a,
                             ValueSpace space, const Cochain::Evaluator& fn,
                             bool memoize);

EvaluationSet exhaustive_eval_set(const CompactGroupPtr& g, int arity);
EvaluationSet lie_eval_set(const CompactGroupPtr& g, const HaarScheme& scheme,
                           int arity, std::uint64_t seed, int random_count,
                           int node_tuple_cap);
// Exhaustive for finite groups, lie_eval_set otherwise.
EvaluationSet default_eval_set(const CompactGroupPtr& g,
                               const HaarScheme& scheme, int arity,
                               std::uint64_t seed, int random_count,
                               int node_tuple_cap);

std::string describe_tuple(const EvalTuple& t);

// Coboundary of a group-valued n-cochain evaluated at one (n+1)-tuple:
// the alternating sum for abelian targets (any n, action on the leading
// term), s ^> x * x^-1 for n = 0, rho(s) * s^>rho(t) * rho(st)^-1 for
// n = 1 on non-abelian targets.
Matrix coboundary_at(const Cochain& rho, std::span<const GroupElement> tuple);

// The full coboundary as an (n+1)-cochain (tabulated for finite G).
Cochain coboundary(const Cochain& rho);

struct DefectResult {
  double value = 0.0;
  EvalTuple argmax;
};

// Sup over the evaluation set of ||log_u(coboundary)|| (matrix targets)
// or ||coboundary|| (abelian). BranchCutError from the chart is rethrown
// with the offending tuple ("defect >= chart radius").
DefectResult defect(const Cochain& rho, const EvaluationSet& eval);

// beta(s,t) = log_u(rho(s) * s^>rho(t) * rho(st)^-1), the algebra-valued
// 2-cochain with rho(s) * s^>rho(t) = exp(beta(s,t)) * rho(st).
Cochain beta_of(const Cochain& rho);

// The almost-action s |> x = rho(s) * (s^>x) * rho(s)^-1 (conjugation by
// rho composed with the induced algebra action); for abelian targets it
// reduces to the algebra action itself.
Matrix almost_action(const Cochain& rho, const GroupElement& s,
                     const Matrix& x);

// Twisted coboundary of an algebra-valued n-cochain at an (n+1)-tuple:
// s0 |> c(s1..sn) + sum_i (-1)^i c(.., s_{i-1} s_i, ..) + (-1)^{n+1} c(s0..s_{n-1}).
Matrix twisted_delta_at(const Cochain& c, const Cochain& rho,
                        std::span<const GroupElement> tuple);
Cochain twisted_delta(const Cochain& c, const Cochain& rho);

// Sup over eval triples of ||s|>beta(t,u) - beta(st,u) + beta(s,tu) - beta(s,t)||.
double twisted_cocycle_defect(const Cochain& beta, const Cochain& rho,
                              const EvaluationSet& eval);

// Haar-averaged correction: alpha1(t) = -sum_s w_s (s |> beta(s^-1, t)).
Cochain homotopy_average(const Cochain& beta, const Cochain& rho,
                         const HaarScheme& scheme);

// Last-slot averaging homotopy for abelian targets:
// (h gamma)(s1..sn) = (-1)^{n+1} sum_u w_u gamma(s1..sn, u), gamma of
// arity n+1 >= 2. Satisfies delta(h gamma) + h(delta gamma) = gamma.
Cochain homotopy_last_slot(const Cochain& gamma, const HaarScheme& scheme);

}  // namespace corec
