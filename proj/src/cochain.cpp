#include "corec/cochain.hpp"

#include <cmath>
#include <sstream>

#include "corec/rng.hpp"

namespace corec {

namespace {

std::string tuple_key(const CompactGroup& g,
                      std::span<const GroupElement> args) {
  std::vector<std::int64_t> key;
  key.reserve(args.size() * 4);
  for (const auto& e : args) append_quantized_key(g, e, key);
  return std::string(reinterpret_cast<const char*>(key.data()),
                     key.size() * sizeof(std::int64_t));
}

// Memo growth cap: beyond this the cache stops inserting and behaves as
// if absent (results are pure either way).
constexpr std::size_t kMemoCap = 1u << 18;

}  // namespace

Cochain make_derived_cochain(int arity, const CompactGroupPtr& g,
                             const TargetGroupPtr& t, const GActionPtr& a,
                             ValueSpace space, const Cochain::Evaluator& fn,
                             bool memoize) {
  if (g->kind == CompactGroup::Kind::Finite) {
    const int m = g->order;
    std::size_t total = 1;
    for (int i = 0; i < arity; ++i) total *= std::size_t(m);
    std::vector<Matrix> table(total);
    std::vector<GroupElement> tup(arity, GroupElement::finite(0));
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (int pos = arity - 1; pos >= 0; --pos) {
        tup[std::size_t(pos)] = GroupElement::finite(long(rem % m));
        rem /= std::size_t(m);
      }
      table[flat] = fn(tup);
    }
    return Cochain::from_table(arity, g, t, a, std::move(table), space);
  }
  Cochain c = Cochain::from_evaluator(arity, g, t, a, fn, space);
  return memoize ? c : c.without_memo();
}

Cochain Cochain::from_table(int arity, CompactGroupPtr group,
                            TargetGroupPtr target, GActionPtr action,
                            std::vector<Matrix> table, ValueSpace space) {
  if (group->kind != CompactGroup::Kind::Finite) {
    throw PreconditionError("from_table: tables require a finite group");
  }
  std::size_t expect = 1;
  for (int i = 0; i < arity; ++i) expect *= std::size_t(group->order);
  if (table.size() != expect) {
    throw PreconditionError("from_table: table does not cover all tuples");
  }
  for (const Matrix& v : table) {
    if (space == ValueSpace::GroupValued) {
      target->check_member(v, "cochain table entry");
    } else {
      target->check_algebra(v, "cochain table entry");
    }
  }
  Cochain c;
  c.arity_ = arity;
  c.space_ = space;
  c.group_ = std::move(group);
  c.target_ = std::move(target);
  c.action_ = std::move(action);
  c.table_ = std::make_shared<const std::vector<Matrix>>(std::move(table));
  return c;
}

Cochain Cochain::from_evaluator(int arity, CompactGroupPtr group,
                                TargetGroupPtr target, GActionPtr action,
                                Evaluator eval, ValueSpace space) {
  Cochain c;
  c.arity_ = arity;
  c.space_ = space;
  c.group_ = std::move(group);
  c.target_ = std::move(target);
  c.action_ = std::move(action);
  c.eval_ = std::move(eval);
  c.memo_ = std::make_shared<Memo>();
  return c;
}

std::size_t Cochain::tuple_index(std::span<const GroupElement> args) const {
  std::size_t flat = 0;
  for (const auto& e : args) {
    flat = flat * std::size_t(group_->order) + std::size_t(e.index);
  }
  return flat;
}

Matrix Cochain::operator()(std::span<const GroupElement> args) const {
  if (int(args.size()) != arity_) {
    throw PreconditionError("cochain evaluated at wrong tuple arity");
  }
  if (table_) {
    for (const auto& e : args) {
      if (!e.is_finite || e.index < 0 || e.index >= group_->order) {
        throw KindMismatchError("cochain argument outside the finite group");
      }
    }
    return (*table_)[tuple_index(args)];
  }
  if (!memo_ || !memo_enabled_) return eval_(args);
  const std::string key = tuple_key(*group_, args);
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->map.find(key);
    if (it != memo_->map.end()) return it->second;
  }
  Matrix v = eval_(args);
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    if (memo_->map.size() < kMemoCap) memo_->map.emplace(key, v);
  }
  return v;
}

Matrix Cochain::operator()(const GroupElement& s) const {
  return (*this)(std::span<const GroupElement>(&s, 1));
}

Matrix Cochain::operator()(const GroupElement& s, const GroupElement& t) const {
  const GroupElement pair[2] = {s, t};
  return (*this)(std::span<const GroupElement>(pair, 2));
}

Cochain Cochain::without_memo() const {
  Cochain c = *this;
  c.memo_enabled_ = false;
  c.memo_ = std::make_shared<Memo>();
  return c;
}

EvaluationSet exhaustive_eval_set(const CompactGroupPtr& g, int arity) {
  if (g->kind != CompactGroup::Kind::Finite) {
    throw PreconditionError("exhaustive evaluation set requires a finite group");
  }
  EvaluationSet set;
  set.tuple_arity = arity;
  set.provenance = "exhaustive";
  const int m = g->order;
  std::size_t total = 1;
  for (int i = 0; i < arity; ++i) total *= std::size_t(m);
  set.tuples.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    EvalTuple t;
    t.elems.resize(std::size_t(arity), GroupElement::finite(0));
    std::size_t rem = flat;
    for (int pos = arity - 1; pos >= 0; --pos) {
      t.elems[std::size_t(pos)] = GroupElement::finite(long(rem % m));
      rem /= std::size_t(m);
    }
    set.tuples.push_back(std::move(t));
  }
  return set;
}

EvaluationSet lie_eval_set(const CompactGroupPtr& g, const HaarScheme& scheme,
                           int arity, std::uint64_t seed, int random_count,
                           int node_tuple_cap) {
  EvaluationSet set;
  set.tuple_arity = arity;
  const std::size_t n = scheme.nodes.size();
  double combos = 1.0;
  for (int i = 0; i < arity; ++i) combos *= double(n);
  std::ostringstream prov;
  if (combos <= double(node_tuple_cap)) {
    std::vector<std::size_t> idx(std::size_t(arity), 0);
    while (true) {
      EvalTuple t;
      for (int pos = 0; pos < arity; ++pos) {
        t.elems.push_back(scheme.nodes[idx[std::size_t(pos)]].point);
      }
      set.tuples.push_back(std::move(t));
      int pos = 0;
      while (pos < arity && ++idx[std::size_t(pos)] == n) {
        idx[std::size_t(pos)] = 0;
        ++pos;
      }
      if (pos == arity) break;
    }
    prov << "nodes-plus-random(all node tuples";
  } else {
    for (int k = 0; k < node_tuple_cap; ++k) {
      EvalTuple t;
      for (int pos = 0; pos < arity; ++pos) {
        t.elems.push_back(
            scheme.nodes[rng_word(seed, 0x6E0D, std::uint64_t(k) * arity + pos) % n]
                .point);
      }
      set.tuples.push_back(std::move(t));
    }
    prov << "nodes-plus-random(sampled " << node_tuple_cap << " node tuples";
  }
  for (int k = 0; k < random_count; ++k) {
    EvalTuple t;
    for (int pos = 0; pos < arity; ++pos) {
      t.elems.push_back(
          sample_element(*g, seed, std::uint64_t(k) * arity + pos + 1000));
    }
    set.tuples.push_back(std::move(t));
  }
  prov << ", seed=" << seed << ", random=" << random_count << ")";
  set.provenance = prov.str();
  return set;
}

EvaluationSet default_eval_set(const CompactGroupPtr& g,
                               const HaarScheme& scheme, int arity,
                               std::uint64_t seed, int random_count,
                               int node_tuple_cap) {
  if (g->kind == CompactGroup::Kind::Finite) {
    return exhaustive_eval_set(g, arity);
  }
  return lie_eval_set(g, scheme, arity, seed, random_count, node_tuple_cap);
}

std::string describe_tuple(const EvalTuple& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < t.elems.size(); ++i) {
    if (i) os << ", ";
    if (t.elems[i].is_finite) {
      os << t.elems[i].index;
    } else {
      os << "[";
      for (std::size_t j = 0; j < t.elems[i].coords.size(); ++j) {
        if (j) os << " ";
        os << t.elems[i].coords[j];
      }
      os << "]";
    }
  }
  os << ")";
  return os.str();
}

Matrix coboundary_at(const Cochain& rho, std::span<const GroupElement> tuple) {
  if (!rho.group_valued()) {
    throw PreconditionError("coboundary: cochain must be group-valued");
  }
  const int n = rho.arity();
  if (int(tuple.size()) != n + 1) {
    throw PreconditionError("coboundary evaluated at wrong tuple arity");
  }
  const CompactGroup& g = *rho.group();
  const TargetGroup& t = *rho.target();
  const GAction& a = *rho.action();

  if (t.abelian()) {
    // Alternating sum with the action on the leading term.
    std::vector<GroupElement> args(tuple.begin() + 1, tuple.end());
    Matrix acc = act(a, tuple[0], rho(args));
    double sign = -1.0;
    for (int i = 1; i <= n; ++i) {
      std::vector<GroupElement> merged;
      merged.reserve(std::size_t(n));
      for (int k = 0; k < i - 1; ++k) merged.push_back(tuple[std::size_t(k)]);
      merged.push_back(group_mul(g, tuple[std::size_t(i) - 1], tuple[std::size_t(i)]));
      for (int k = i + 1; k <= n; ++k) merged.push_back(tuple[std::size_t(k)]);
      acc = mat_add(acc, mat_scale(rho(merged), sign));
      sign = -sign;
    }
    std::vector<GroupElement> front(tuple.begin(), tuple.end() - 1);
    acc = mat_add(acc, mat_scale(rho(front), sign));
    return acc;
  }

  if (n == 0) {
    const Matrix x = rho(std::span<const GroupElement>{});
    return mat_mul(act(a, tuple[0], x), t.invert(x));
  }
  if (n == 1) {
    const Matrix num = mat_mul(rho(tuple[0]), act(a, tuple[0], rho(tuple[1])));
    return mat_mul(num, t.invert(rho(group_mul(g, tuple[0], tuple[1]))));
  }
  throw PreconditionError(
      "coboundary: non-abelian targets support arity <= 1 only");
}

Cochain coboundary(const Cochain& rho) {
  if (!rho.group_valued()) {
    throw PreconditionError("coboundary: cochain must be group-valued");
  }
  if (rho.arity() >= 2 && !rho.target()->abelian()) {
    throw PreconditionError(
        "coboundary: non-abelian targets support arity <= 1 only");
  }
  Cochain copy = rho;
  return make_derived_cochain(
      rho.arity() + 1, rho.group(), rho.target(), rho.action(),
      ValueSpace::GroupValued,
      [copy](std::span<const GroupElement> tuple) {
        return coboundary_at(copy, tuple);
      },
      /*memoize=*/false);
}

DefectResult defect(const Cochain& rho, const EvaluationSet& eval) {
  if (!rho.group_valued()) {
    throw PreconditionError("defect: cochain must be group-valued");
  }
  if (eval.tuple_arity != rho.arity() + 1) {
    throw PreconditionError("defect: evaluation set has wrong tuple arity");
  }
  const TargetGroup& t = *rho.target();
  DefectResult result;
  for (const EvalTuple& tup : eval.tuples) {
    Matrix d = coboundary_at(rho, tup.elems);
    double v;
    if (t.abelian()) {
      v = alg_norm(t, d);
    } else {
      try {
        v = alg_norm(t, log_u(t, d));
      } catch (const BranchCutError&) {
        throw BranchCutError("defect >= chart radius at tuple " +
                             describe_tuple(tup));
      }
    }
    if (v > result.value || result.argmax.elems.empty()) {
      result.value = v;
      result.argmax = tup;
    }
  }
  return result;
}

Cochain beta_of(const Cochain& rho) {
  if (!rho.group_valued() || rho.arity() != 1) {
    throw PreconditionError("beta_of: expected a group-valued 1-cochain");
  }
  if (rho.target()->abelian()) {
    throw PreconditionError("beta_of: expected a matrix target");
  }
  Cochain copy = rho;
  const TargetGroupPtr t = rho.target();
  return make_derived_cochain(
      2, rho.group(), rho.target(), rho.action(), ValueSpace::AlgebraValued,
      [copy, t](std::span<const GroupElement> pair) {
        return log_u(*t, coboundary_at(copy, pair));
      },
      /*memoize=*/false);
}

Matrix almost_action(const Cochain& rho, const GroupElement& s,
                     const Matrix& x) {
  const TargetGroup& t = *rho.target();
  const Matrix twisted = act_alg(*rho.action(), s, x);
  if (t.abelian()) return twisted;
  const Matrix rs = rho(s);
  return mat_mul(rs, mat_mul(twisted, mat_inv(rs)));
}

Matrix twisted_delta_at(const Cochain& c, const Cochain& rho,
                        std::span<const GroupElement> tuple) {
  if (c.space() != ValueSpace::AlgebraValued) {
    throw PreconditionError("twisted_delta: cochain must be algebra-valued");
  }
  const int n = c.arity();
  if (int(tuple.size()) != n + 1) {
    throw PreconditionError("twisted_delta evaluated at wrong tuple arity");
  }
  const CompactGroup& g = *c.group();
  std::vector<GroupElement> rest(tuple.begin() + 1, tuple.end());
  Matrix acc = almost_action(rho, tuple[0], c(rest));
  double sign = -1.0;
  for (int i = 1; i <= n; ++i) {
    std::vector<GroupElement> merged;
    merged.reserve(std::size_t(n));
    for (int k = 0; k < i - 1; ++k) merged.push_back(tuple[std::size_t(k)]);
    merged.push_back(group_mul(g, tuple[std::size_t(i) - 1], tuple[std::size_t(i)]));
    for (int k = i + 1; k <= n; ++k) merged.push_back(tuple[std::size_t(k)]);
    acc = mat_add(acc, mat_scale(c(merged), sign));
    sign = -sign;
  }
  std::vector<GroupElement> front(tuple.begin(), tuple.end() - 1);
  acc = mat_add(acc, mat_scale(c(front), sign));
  return acc;
}

Cochain twisted_delta(const Cochain& c, const Cochain& rho) {
  Cochain cc = c, rr = rho;
  return make_derived_cochain(
      c.arity() + 1, c.group(), c.target(), c.action(),
      ValueSpace::AlgebraValued,
      [cc, rr](std::span<const GroupElement> tuple) {
        return twisted_delta_at(cc, rr, tuple);
      },
      /*memoize=*/false);
}

double twisted_cocycle_defect(const Cochain& beta, const Cochain& rho,
                              const EvaluationSet& eval) {
  if (beta.arity() != 2 || eval.tuple_arity != 3) {
    throw PreconditionError(
        "twisted_cocycle_defect: expected a 2-cochain and triple tuples");
  }
  double best = 0.0;
  for (const EvalTuple& tup : eval.tuples) {
    best = std::max(best,
                    alg_norm(*beta.target(), twisted_delta_at(beta, rho, tup.elems)));
  }
  return best;
}

Cochain homotopy_average(const Cochain& beta, const Cochain& rho,
                         const HaarScheme& scheme) {
  if (beta.arity() != 2 || beta.space() != ValueSpace::AlgebraValued) {
    throw PreconditionError(
        "homotopy_average: expected an algebra-valued 2-cochain");
  }
  // Precompute node inverses once.
  struct AvgNode {
    GroupElement s;
    GroupElement s_inv;
    double weight;
  };
  auto nodes = std::make_shared<std::vector<AvgNode>>();
  nodes->reserve(scheme.nodes.size());
  for (const auto& node : scheme.nodes) {
    nodes->push_back(
        {node.point, group_inv(*beta.group(), node.point), node.weight});
  }
  Cochain b = beta, r = rho;
  const TargetGroupPtr t = beta.target();
  return make_derived_cochain(
      1, beta.group(), beta.target(), beta.action(), ValueSpace::AlgebraValued,
      [b, r, t, nodes](std::span<const GroupElement> args) {
        Matrix acc(t->dim(), t->abelian() ? 1 : t->dim(),
                   t->abelian() ? Field::Real : t->field());
        for (const auto& node : *nodes) {
          const Matrix bv = b(node.s_inv, args[0]);
          acc = mat_add(acc, mat_scale(almost_action(r, node.s, bv), node.weight));
        }
        return mat_scale(acc, -1.0);
      },
      /*memoize=*/true);
}

Cochain homotopy_last_slot(const Cochain& gamma, const HaarScheme& scheme) {
  if (!gamma.target()->abelian()) {
    throw PreconditionError("homotopy_last_slot: requires an abelian target");
  }
  if (gamma.arity() < 2) {
    throw PreconditionError("homotopy_last_slot: requires arity >= 2");
  }
  const int out_arity = gamma.arity() - 1;
  const double sign = (gamma.arity() % 2 == 0) ? 1.0 : -1.0;  // (-1)^(n+1)
  auto nodes = std::make_shared<std::vector<HaarNode>>(scheme.nodes);
  Cochain gg = gamma;
  const TargetGroupPtr t = gamma.target();
  return make_derived_cochain(
      out_arity, gamma.group(), gamma.target(), gamma.action(), gamma.space(),
      [gg, t, nodes, sign](std::span<const GroupElement> args) {
        Matrix acc(t->dim(), 1, Field::Real);
        std::vector<GroupElement> full(args.begin(), args.end());
        full.push_back(identity_of(*gg.group()));
        for (const auto& node : *nodes) {
          full.back() = node.point;
          acc = mat_add(acc, mat_scale(gg(full), node.weight));
        }
        return mat_scale(acc, sign);
      },
      /*memoize=*/true);
}

}  // namespace corec
