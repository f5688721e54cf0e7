#include "corec/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "corec/rng.hpp"

namespace corec {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------
// Matrix <-> JSON: nested row arrays; a real entry is a plain number, a
// complex entry the pair [re, im].

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const cxd& z = m.at(i, j);
      if (m.is_real()) {
        row.push_back(z.real());
      } else {
        row.push_back(json::array({z.real(), z.imag()}));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw FormatError("matrix: expected a nested array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  bool complex_seen = false;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw FormatError("matrix: ragged rows");
    }
    for (const auto& e : row) {
      if (e.is_array()) complex_seen = true;
    }
  }
  Matrix m(rows, cols, complex_seen ? Field::Complex : Field::Real);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t jx = 0; jx < cols; ++jx) {
      const auto& e = j[i][jx];
      if (e.is_number()) {
        m.at(i, jx) = cxd(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
                 e[1].is_number()) {
        m.at(i, jx) = cxd(e[0].get<double>(), e[1].get<double>());
      } else {
        throw FormatError("matrix: entry must be a number or [re, im]");
      }
    }
  }
  m.check_finite("matrix from JSON");
  return m;
}

// ---------------------------------------------------------------------
// Group / target / action specs.

CompactGroupPtr group_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cyclic") return build_cyclic(j.at("n").get<int>());
  if (kind == "dihedral") return build_dihedral(j.at("n").get<int>());
  if (kind == "symmetric") return build_symmetric(j.at("n").get<int>());
  if (kind == "quaternion8") return build_quaternion8();
  if (kind == "cayley") {
    const int order = j.at("order").get<int>();
    const auto& rows = j.at("table");
    if (!rows.is_array() || int(rows.size()) != order) {
      throw FormatError("cayley: table must have 'order' rows");
    }
    std::vector<int> flat;
    for (const auto& row : rows) {
      if (!row.is_array() || int(row.size()) != order) {
        throw FormatError("cayley: table rows must have 'order' entries");
      }
      for (const auto& e : row) flat.push_back(e.get<int>());
    }
    return build_from_cayley(order, flat);
  }
  if (kind == "finite-product") {
    const auto& factors = j.at("factors");
    if (!factors.is_array() || factors.size() != 2) {
      throw FormatError("finite-product: expected two factors");
    }
    return build_finite_product(group_from_json(factors[0]),
                                group_from_json(factors[1]));
  }
  if (kind == "u1") return build_u1(j.at("nodes").get<int>());
  if (kind == "su2") {
    return build_su2(j.at("alpha_nodes").get<int>(),
                     j.at("beta_nodes").get<int>(),
                     j.at("gamma_nodes").get<int>());
  }
  if (kind == "product") {
    std::vector<CompactGroupPtr> fs;
    for (const auto& f : j.at("factors")) fs.push_back(group_from_json(f));
    return build_product(std::move(fs));
  }
  throw FormatError("unknown group kind '" + kind + "'");
}

json group_to_json(const CompactGroup& g) {
  json j;
  switch (g.kind) {
    case CompactGroup::Kind::Finite: {
      // Builders are named; generic tables serialize in full.
      const std::string& n = g.name;
      if (n.size() > 1 && n[0] == 'C' && n.find('x') == std::string::npos) {
        j = {{"kind", "cyclic"}, {"n", g.order}};
      } else if (n.size() > 1 && n[0] == 'D') {
        j = {{"kind", "dihedral"}, {"n", g.order / 2}};
      } else if (n.size() > 1 && n[0] == 'S' && n != "SU2") {
        int k = 1, fact = 1;
        while (fact < g.order) fact *= ++k;
        j = {{"kind", "symmetric"}, {"n", k}};
      } else if (n == "Q8") {
        j = {{"kind", "quaternion8"}};
      } else if (n == "C2xC2") {
        j = {{"kind", "finite-product"},
             {"factors", json::array({{{"kind", "cyclic"}, {"n", 2}},
                                      {{"kind", "cyclic"}, {"n", 2}}})}};
      } else {
        json rows = json::array();
        for (int i = 0; i < g.order; ++i) {
          json row = json::array();
          for (int k = 0; k < g.order; ++k) row.push_back(g.cayley_at(i, k));
          rows.push_back(std::move(row));
        }
        j = {{"kind", "cayley"}, {"order", g.order}, {"table", rows}};
      }
      return j;
    }
    case CompactGroup::Kind::U1:
      return {{"kind", "u1"}, {"nodes", g.u1_nodes}};
    case CompactGroup::Kind::SU2:
      return {{"kind", "su2"},
              {"alpha_nodes", g.su2_alpha_nodes},
              {"beta_nodes", g.su2_beta_nodes},
              {"gamma_nodes", g.su2_gamma_nodes}};
    case CompactGroup::Kind::Product: {
      json fs = json::array();
      for (const auto& f : g.factors) fs.push_back(group_to_json(*f));
      return {{"kind", "product"}, {"factors", fs}};
    }
  }
  throw FormatError("group_to_json: unknown kind");
}

TargetGroupPtr target_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "abelian") {
    return std::make_shared<const TargetGroup>(
        TargetGroup::abelian_vector(j.at("dim").get<std::size_t>()));
  }
  if (kind == "matrix") {
    const std::string field = j.value("field", "real");
    const std::string subtype = j.value("subtype", "general-linear");
    if (subtype != "general-linear" && subtype != "unitary") {
      throw FormatError("target: unknown subtype '" + subtype + "'");
    }
    if (field != "real" && field != "complex") {
      throw FormatError("target: unknown field '" + field + "'");
    }
    return std::make_shared<const TargetGroup>(TargetGroup::matrix_group(
        j.at("dim").get<std::size_t>(),
        field == "real" ? Field::Real : Field::Complex,
        subtype == "unitary" ? MatrixSubtype::Unitary
                             : MatrixSubtype::GeneralLinear));
  }
  throw FormatError("unknown target kind '" + kind + "'");
}

json target_to_json(const TargetGroup& t) {
  if (t.abelian()) return {{"kind", "abelian"}, {"dim", t.dim()}};
  return {{"kind", "matrix"},
          {"dim", t.dim()},
          {"field", t.field() == Field::Real ? "real" : "complex"},
          {"subtype", t.subtype() == MatrixSubtype::Unitary ? "unitary"
                                                            : "general-linear"}};
}

GActionPtr action_from_json(const json& j, const CompactGroupPtr& g,
                            const TargetGroupPtr& t) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "trivial") {
    return std::make_shared<const GAction>(GAction::trivial(g, t));
  }
  GAction::PiFn pi;
  if (j.contains("matrices")) {
    if (g->kind != CompactGroup::Kind::Finite) {
      throw FormatError("action: matrix tables require a finite group");
    }
    auto table = std::make_shared<std::vector<Matrix>>();
    for (const auto& mj : j.at("matrices")) {
      table->push_back(matrix_from_json(mj));
    }
    if (int(table->size()) != g->order) {
      throw FormatError("action: need one matrix per group element");
    }
    pi = [table](const GroupElement& s) {
      return (*table)[std::size_t(s.index)];
    };
  } else if (j.contains("name")) {
    const std::string name = j.at("name").get<std::string>();
    if (name == "u1-rotation") {
      if (g->kind != CompactGroup::Kind::U1 || t->dim() != 2) {
        throw FormatError("u1-rotation acts on 2-dim targets of U(1)");
      }
      pi = [](const GroupElement& s) {
        const double th = s.coords[0];
        return Matrix::from_rows({{std::cos(th), -std::sin(th)},
                                  {std::sin(th), std::cos(th)}});
      };
    } else {
      throw FormatError("unknown named action '" + name + "'");
    }
  } else {
    throw FormatError("action: expected 'matrices' or 'name'");
  }
  GActionPtr a;
  if (kind == "conjugation") {
    a = std::make_shared<const GAction>(GAction::conjugation(g, t, pi));
  } else if (kind == "linear") {
    a = std::make_shared<const GAction>(GAction::linear_on_vector(g, t, pi));
  } else {
    throw FormatError("unknown action kind '" + kind + "'");
  }
  a->validate();
  return a;
}

RectifySettings settings_from_json(const json& j) {
  RectifySettings s;
  if (j.is_null()) return s;
  s.tol = j.value("tol", s.tol);
  s.max_iter = j.value("max_iter", s.max_iter);
  s.input_defect_max = j.value("input_defect_max", s.input_defect_max);
  s.ad_bound_max = j.value("ad_bound_max", s.ad_bound_max);
  s.stagnation_window = j.value("stagnation_window", s.stagnation_window);
  s.eval_seed = j.value("eval_seed", s.eval_seed);
  s.lie_random_tuples = j.value("lie_random_tuples", s.lie_random_tuples);
  s.lie_node_tuple_cap = j.value("lie_node_tuple_cap", s.lie_node_tuple_cap);
  s.validate();
  return s;
}

json settings_to_json(const RectifySettings& s) {
  return {{"tol", s.tol},
          {"max_iter", s.max_iter},
          {"input_defect_max", s.input_defect_max},
          {"ad_bound_max", s.ad_bound_max},
          {"stagnation_window", s.stagnation_window},
          {"eval_seed", s.eval_seed},
          {"lie_random_tuples", s.lie_random_tuples},
          {"lie_node_tuple_cap", s.lie_node_tuple_cap}};
}

// ---------------------------------------------------------------------
// Named base cocycles.

Cochain named_base(const Scenario& sc) {
  const std::string& name = sc.base_name;
  const CompactGroupPtr& g = sc.group;
  const TargetGroupPtr& t = sc.target;
  const GActionPtr& a = sc.action;

  auto require_finite = [&](const char* what) {
    if (g->kind != CompactGroup::Kind::Finite) {
      throw FormatError(std::string(what) + " requires a finite group");
    }
  };

  if (name == "sign") {
    require_finite("sign");
    if (g->order % 2 != 0 || t->dim() != 1 || t->abelian()) {
      throw FormatError("sign: even cyclic group and 1-dim matrix target");
    }
    std::vector<Matrix> table;
    for (int i = 0; i < g->order; ++i) {
      table.push_back(Matrix::from_rows({{i % 2 == 0 ? 1.0 : -1.0}}));
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "cyclic-character") {
    require_finite("cyclic-character");
    if (t->dim() != 1 || t->field() != Field::Complex) {
      throw FormatError("cyclic-character: 1-dim complex target");
    }
    std::vector<Matrix> table;
    for (int i = 0; i < g->order; ++i) {
      const double th = kTwoPi * double(i) / double(g->order);
      table.push_back(Matrix::from_rows_complex({{std::exp(cxd(0.0, th))}}));
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "s3-standard") {
    require_finite("s3-standard");
    if (g->order != 6 || t->dim() != 2) {
      throw FormatError("s3-standard: order-6 group, 2-dim target");
    }
    const double r2 = std::sqrt(2.0), r6 = std::sqrt(6.0);
    const double b[3][2] = {{1 / r2, 1 / r6}, {-1 / r2, 1 / r6}, {0, -2 / r6}};
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<Matrix> table;
    for (int e = 0; e < 6; ++e) {
      Matrix rep(2, 2, Field::Real);
      for (int i = 0; i < 2; ++i) {
        for (int jx = 0; jx < 2; ++jx) {
          double acc = 0.0;
          for (int col = 0; col < 3; ++col) acc += b[perms[e][col]][i] * b[col][jx];
          rep.at(std::size_t(i), std::size_t(jx)) = acc;
        }
      }
      table.push_back(rep);
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "d4-standard") {
    require_finite("d4-standard");
    if (g->order != 8 || t->dim() != 2) {
      throw FormatError("d4-standard: order-8 dihedral group, 2-dim target");
    }
    const Matrix r = Matrix::from_rows({{0, -1}, {1, 0}});
    const Matrix f = Matrix::from_rows({{1, 0}, {0, -1}});
    std::vector<Matrix> table;
    for (int e = 0; e < 8; ++e) {
      Matrix m = (e >= 4) ? f : Matrix::identity(2);
      for (int k = 0; k < e % 4; ++k) m = mat_mul(m, r);
      table.push_back(m);
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "q8-spin") {
    require_finite("q8-spin");
    if (g->order != 8 || t->dim() != 2 || t->field() != Field::Complex) {
      throw FormatError("q8-spin: quaternion group, 2-dim complex target");
    }
    const cxd I(0, 1);
    const std::vector<Matrix> units = {
        Matrix::from_rows_complex({{1, 0}, {0, 1}}),
        Matrix::from_rows_complex({{I, 0}, {0, -I}}),
        Matrix::from_rows_complex({{0, 1}, {-1, 0}}),
        Matrix::from_rows_complex({{0, I}, {I, 0}})};
    std::vector<Matrix> table;
    for (int e = 0; e < 8; ++e) {
      const Matrix& u = units[std::size_t(e / 2)];
      table.push_back(e % 2 ? mat_scale(u, -1.0) : u);
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "regular") {
    require_finite("regular");
    if (g->order > 8 || t->dim() != std::size_t(g->order)) {
      throw FormatError("regular: order <= 8 and target dim = order");
    }
    std::vector<Matrix> table;
    for (int e = 0; e < g->order; ++e) {
      Matrix p(std::size_t(g->order), std::size_t(g->order), Field::Real);
      for (int j2 = 0; j2 < g->order; ++j2) {
        p.at(std::size_t(g->cayley_at(e, j2)), std::size_t(j2)) = 1.0;
      }
      table.push_back(p);
    }
    return Cochain::from_table(1, g, t, a, table, ValueSpace::GroupValued);
  }
  if (name == "u1-diag") {
    if (g->kind != CompactGroup::Kind::U1 || t->dim() != 2 ||
        t->field() != Field::Complex) {
      throw FormatError("u1-diag: U(1) group and 2-dim complex target");
    }
    return Cochain::from_evaluator(
        1, g, t, a,
        [](std::span<const GroupElement> args) {
          const double th = args[0].coords[0];
          return Matrix::from_rows_complex(
              {{std::exp(cxd(0.0, th)), 0.0}, {0.0, std::exp(cxd(0.0, -th))}});
        },
        ValueSpace::GroupValued);
  }
  if (name == "su2-defining") {
    if (g->kind != CompactGroup::Kind::SU2 || t->dim() != 2 ||
        t->field() != Field::Complex) {
      throw FormatError("su2-defining: SU(2) group and 2-dim complex target");
    }
    return Cochain::from_evaluator(
        1, g, t, a,
        [](std::span<const GroupElement> args) {
          const double w = args[0].coords[0], x = args[0].coords[1],
                       y = args[0].coords[2], z = args[0].coords[3];
          return Matrix::from_rows_complex(
              {{cxd(w, -z), cxd(-y, -x)}, {cxd(y, -x), cxd(w, z)}});
        },
        ValueSpace::GroupValued);
  }
  throw FormatError("unknown named base cocycle '" + name + "'");
}

void check_base_defect(const Cochain& rho) {
  const CompactGroupPtr& g = rho.group();
  EvaluationSet eval;
  if (g->kind == CompactGroup::Kind::Finite) {
    eval = exhaustive_eval_set(g, rho.arity() + 1);
  } else {
    eval = lie_eval_set(g, haar_scheme(*g), rho.arity() + 1, 1, 16, 16);
  }
  const double d = defect(rho, eval).value;
  if (d > 1e-13) {
    std::ostringstream os;
    os << "base cocycle has defect " << d << " > 1e-13";
    throw PreconditionError(os.str());
  }
}

// ---------------------------------------------------------------------
// Perturbation profiles.

// Normalized Poisson-type bump: analytic on the circle with spectrum
// ~ 0.7^|m|, sup-norm 1.
double circle_bump(double theta) {
  const double r = 0.7;
  const double p = (1 - r * r) / (1 - 2 * r * std::cos(theta) + r * r);
  return (p - 1.0) * (1 - r) / (2 * r);
}

// Basis directions of unit spectral norm for the analytic profile.
std::vector<Matrix> analytic_basis(const TargetGroup& t) {
  if (t.abelian()) {
    std::vector<Matrix> basis;
    for (std::size_t d = 0; d < t.dim(); ++d) {
      std::vector<double> v(t.dim(), 0.0);
      v[d] = 1.0;
      basis.push_back(Matrix::column(v));
    }
    return basis;
  }
  if (t.dim() == 1) {
    if (t.field() == Field::Complex) {
      return {Matrix::from_rows_complex({{cxd(0, 1)}})};
    }
    return {Matrix::from_rows({{1.0}})};
  }
  const bool unitary = t.subtype() == MatrixSubtype::Unitary;
  std::vector<Matrix> basis;
  if (unitary || t.field() == Field::Complex) {
    const cxd I(0, 1);
    basis.push_back(Matrix::from_rows_complex({{I, 0}, {0, -I}}));
    basis.push_back(Matrix::from_rows_complex({{0, 1}, {-1, 0}}));
    basis.push_back(Matrix::from_rows_complex({{0, I}, {I, 0}}));
  } else {
    basis.push_back(Matrix::from_rows({{1, 0}, {0, -1}}));
    basis.push_back(Matrix::from_rows({{0, 1}, {-1, 0}}));
    basis.push_back(Matrix::from_rows({{0, 1}, {1, 0}}));
  }
  if (t.dim() > 2) {
    // Embed the 2x2 directions in the leading block.
    for (auto& b : basis) {
      Matrix big(t.dim(), t.dim(), b.field());
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j2 = 0; j2 < 2; ++j2) big.at(i, j2) = b.at(i, j2);
      b = big;
    }
  }
  return basis;
}

Matrix analytic_eta(const TargetGroup& t, const GroupElement& e, double eps) {
  const std::vector<Matrix> basis = analytic_basis(t);
  const double coeff[3] = {0.5, 0.4, 0.3};
  const double phase[3] = {0.4, 1.3, 2.2};
  Matrix eta(t.dim(), t.abelian() ? 1 : t.dim(),
             t.abelian() ? Field::Real : basis[0].field());
  if (e.coords.size() == 1) {
    const double th = e.coords[0];
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double c = coeff[k % 3] * circle_bump(th - phase[k % 3] - 0.9 * double(k / 3));
      eta = mat_add(eta, mat_scale(basis[k], eps * c));
    }
    return eta;
  }
  if (e.coords.size() == 4) {
    const double w = e.coords[0], x = e.coords[1], y = e.coords[2],
                 z = e.coords[3];
    const double f[3] = {2 * w * z, x * x - y * y, w * y + x * z};
    for (std::size_t k = 0; k < basis.size() && k < 3; ++k) {
      eta = mat_add(eta, mat_scale(basis[k], eps * coeff[k] * f[k]));
    }
    return eta;
  }
  throw PreconditionError("analytic profile supports U(1) and SU(2) groups");
}

// Seeded Gaussian direction for one element stream.
Matrix gaussian_eta(const TargetGroup& t, std::uint64_t seed,
                    std::uint64_t stream, double eps) {
  Matrix eta(t.dim(), t.abelian() ? 1 : t.dim(),
             t.abelian() || t.field() == Field::Real ? Field::Real
                                                     : Field::Complex);
  const std::size_t n = t.dim();
  if (t.abelian()) {
    for (std::size_t d = 0; d < n; ++d) {
      eta.at(d, 0) = rng_gaussian(seed, stream, d);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        const double re = rng_gaussian(seed, stream, i * n + j2);
        const double im = (t.field() == Field::Complex)
                              ? rng_gaussian(seed, stream, n * n + i * n + j2)
                              : 0.0;
        eta.at(i, j2) = cxd(re, im);
      }
    }
    if (t.subtype() == MatrixSubtype::Unitary) {
      eta = mat_scale(mat_sub(eta, adjoint(eta)), 0.5);
    }
  }
  const double u_t = rng_uniform(seed, stream, std::uint64_t(1) << 20);
  const double norm = alg_norm(t, eta);
  if (norm == 0.0) return eta;
  return mat_scale(eta, eps * u_t / norm);
}

Matrix single_pair_direction(const TargetGroup& t) {
  if (t.abelian()) {
    std::vector<double> v(t.dim(), 0.0);
    v[0] = 1.0;
    return Matrix::column(v);
  }
  Matrix d(t.dim(), t.dim(),
           t.field() == Field::Complex ? Field::Complex : Field::Real);
  d.at(0, 0) = (t.subtype() == MatrixSubtype::Unitary) ? cxd(0, 1) : cxd(1, 0);
  return d;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("scenario: expected a JSON object");
  if (j.value("schema", 0) != 1) {
    throw FormatError("scenario: missing or unsupported schema version");
  }
  Scenario sc;
  sc.name = j.value("name", std::string("custom"));
  try {
    sc.group = group_from_json(j.at("group"));
    sc.target = target_from_json(j.at("target"));
    sc.action = action_from_json(j.at("action"), sc.group, sc.target);
    const json& base = j.at("base");
    sc.base_kind = base.at("kind").get<std::string>();
    if (sc.base_kind == "named") {
      sc.base_name = base.at("name").get<std::string>();
    } else if (sc.base_kind == "principal") {
      sc.principal_point = matrix_from_json(base.at("point"));
    } else if (sc.base_kind == "zero") {
      sc.base_arity = base.at("arity").get<int>();
      if (sc.base_arity < 1) throw FormatError("zero base: arity must be >= 1");
    } else if (sc.base_kind == "table") {
      sc.base_arity = base.at("arity").get<int>();
      for (const auto& mj : base.at("values")) {
        sc.base_table.push_back(matrix_from_json(mj));
      }
    } else {
      throw FormatError("unknown base kind '" + sc.base_kind + "'");
    }
    const json& p = j.at("perturbation");
    sc.perturbation.epsilon = p.at("epsilon").get<double>();
    sc.perturbation.seed = p.at("seed").get<std::uint64_t>();
    sc.perturbation.profile = p.value("profile", std::string("uniform-ball"));
    sc.settings = settings_from_json(j.value("settings", json()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["schema"] = 1;
  j["name"] = sc.name;
  j["group"] = group_to_json(*sc.group);
  j["target"] = target_to_json(*sc.target);
  switch (sc.action->kind()) {
    case GAction::Kind::Trivial:
      j["action"] = {{"kind", "trivial"}};
      break;
    case GAction::Kind::Conjugation:
    case GAction::Kind::LinearOnVector: {
      const char* kind =
          sc.action->kind() == GAction::Kind::Conjugation ? "conjugation"
                                                          : "linear";
      if (sc.group->kind == CompactGroup::Kind::Finite) {
        json mats = json::array();
        for (int i = 0; i < sc.group->order; ++i) {
          mats.push_back(matrix_to_json(sc.action->pi(GroupElement::finite(i))));
        }
        j["action"] = {{"kind", kind}, {"matrices", mats}};
      } else {
        j["action"] = {{"kind", kind}, {"name", "u1-rotation"}};
      }
      break;
    }
  }
  json base;
  base["kind"] = sc.base_kind;
  if (sc.base_kind == "named") base["name"] = sc.base_name;
  if (sc.base_kind == "principal") base["point"] = matrix_to_json(sc.principal_point);
  if (sc.base_kind == "zero") base["arity"] = sc.base_arity;
  if (sc.base_kind == "table") {
    base["arity"] = sc.base_arity;
    json vals = json::array();
    for (const auto& m : sc.base_table) vals.push_back(matrix_to_json(m));
    base["values"] = vals;
  }
  j["base"] = base;
  j["perturbation"] = {{"epsilon", sc.perturbation.epsilon},
                       {"seed", sc.perturbation.seed},
                       {"profile", sc.perturbation.profile}};
  j["settings"] = settings_to_json(sc.settings);
  return j;
}

Cochain base_cocycle(const Scenario& sc) {
  Cochain rho;
  if (sc.base_kind == "named") {
    rho = named_base(sc);
  } else if (sc.base_kind == "principal") {
    // rho(s) = u^-1 * (s^>u): an exact 1-cocycle for any action.
    sc.target->check_member(sc.principal_point, "principal point");
    const Matrix u = sc.principal_point;
    const Matrix ui = sc.target->invert(u);
    const GActionPtr a = sc.action;
    const TargetGroupPtr t = sc.target;
    rho = make_derived_cochain(
        1, sc.group, sc.target, sc.action, ValueSpace::GroupValued,
        [u, ui, a, t](std::span<const GroupElement> args) {
          return t->compose(ui, act(*a, args[0], u));
        },
        /*memoize=*/true);
  } else if (sc.base_kind == "zero") {
    if (!sc.target->abelian()) {
      throw FormatError("zero base requires an abelian target");
    }
    const TargetGroupPtr t = sc.target;
    rho = make_derived_cochain(
        sc.base_arity, sc.group, sc.target, sc.action, ValueSpace::GroupValued,
        [t](std::span<const GroupElement>) { return t->identity(); },
        /*memoize=*/false);
  } else if (sc.base_kind == "table") {
    // Explicit tables are the adversarial entry point: they may encode
    // any almost-cocycle, so no exactness check applies.
    return Cochain::from_table(sc.base_arity, sc.group, sc.target, sc.action,
                               sc.base_table, ValueSpace::GroupValued);
  } else {
    throw FormatError("unknown base kind '" + sc.base_kind + "'");
  }
  check_base_defect(rho);
  return rho;
}

Cochain perturb(const Cochain& rho, double epsilon, std::uint64_t seed,
                const std::string& profile) {
  if (epsilon < 0.0 || epsilon > 0.1) {
    throw PreconditionError("perturb: epsilon must lie in [0, 0.1]");
  }
  if (epsilon == 0.0) return rho;
  const TargetGroupPtr t = rho.target();
  const CompactGroupPtr g = rho.group();
  if (rho.arity() != 1 && profile != "uniform-ball") {
    throw PreconditionError("perturb: only uniform-ball supports arity != 1");
  }

  auto apply = [t](const Cochain& base, const Cochain::Evaluator& eta_fn,
                   bool memoize) {
    Cochain b = base;
    return make_derived_cochain(
        base.arity(), base.group(), base.target(), base.action(),
        ValueSpace::GroupValued,
        [b, t, eta_fn](std::span<const GroupElement> args) {
          return t->compose(exp_u(*t, eta_fn(args)), b(args));
        },
        memoize);
  };

  if (profile == "uniform-ball") {
    if (g->kind != CompactGroup::Kind::Finite) {
      throw PreconditionError(
          "perturb: uniform-ball sampling requires a finite group "
          "(use the analytic profile on Lie groups)");
    }
    Cochain b = rho;
    const std::uint64_t order = std::uint64_t(g->order);
    return apply(
        rho,
        [t, seed, epsilon, b, order](std::span<const GroupElement> args) {
          // Stream = flat row-major tuple index.
          std::uint64_t stream = 0;
          for (const auto& e : args) {
            stream = stream * order + std::uint64_t(e.index);
          }
          return gaussian_eta(*t, seed, stream, epsilon);
        },
        false);
  }
  if (profile == "single-pair") {
    if (g->kind != CompactGroup::Kind::Finite || rho.arity() != 1) {
      throw PreconditionError("perturb: single-pair requires a finite group");
    }
    const long designated = g->order - 1;
    if (designated == g->identity_index) {
      throw PreconditionError("perturb: no non-identity element to perturb");
    }
    const Matrix dir = mat_scale(single_pair_direction(*t), epsilon);
    const TargetGroupPtr tt = t;
    return apply(
        rho,
        [designated, dir, tt](std::span<const GroupElement> args) -> Matrix {
          if (args[0].index == designated) return dir;
          return mat_scale(tt->abelian() ? tt->identity() : Matrix(tt->dim(), tt->dim(), dir.field()),
                           0.0);
        },
        false);
  }
  if (profile == "analytic") {
    if (g->kind == CompactGroup::Kind::Finite) {
      throw PreconditionError("perturb: the analytic profile is for Lie groups");
    }
    const TargetGroupPtr tt = t;
    return apply(
        rho,
        [tt, epsilon](std::span<const GroupElement> args) {
          return analytic_eta(*tt, args[0], epsilon);
        },
        true);
  }
  throw PreconditionError("perturb: unknown profile '" + profile + "'");
}

Cochain scenario_input(const Scenario& sc) {
  Cochain base = base_cocycle(sc);
  return perturb(base, sc.perturbation.epsilon, sc.perturbation.seed,
                 sc.perturbation.profile);
}

RunResult run_scenario(const Scenario& sc) {
  RunResult r{scenario_input(sc), Cochain(), RectifyReport{}};
  const HaarScheme scheme = haar_scheme(*sc.group);
  if (sc.target->abelian()) {
    auto [out, rep] = rectify_abelian(r.input, sc.settings, scheme);
    r.output = std::move(out);
    r.report = std::move(rep);
  } else {
    auto [out, rep] = rectify(r.input, sc.settings, scheme);
    r.output = std::move(out);
    r.report = std::move(rep);
  }
  return r;
}

std::vector<std::string> template_names() {
  return {"s3-gl2", "q8-u2",  "c4-twisted-r2",
          "u1-u2",  "su2-u2", "c2c2-abelian-n2"};
}

Scenario template_scenario(const std::string& name) {
  json j;
  j["schema"] = 1;
  j["name"] = name;
  if (name == "s3-gl2") {
    j["group"] = {{"kind", "symmetric"}, {"n", 3}};
    j["target"] = {{"kind", "matrix"}, {"dim", 2}, {"field", "real"},
                   {"subtype", "general-linear"}};
    j["action"] = {{"kind", "trivial"}};
    j["base"] = {{"kind", "named"}, {"name", "s3-standard"}};
    j["perturbation"] = {{"epsilon", 1e-2}, {"seed", 42}, {"profile", "uniform-ball"}};
    j["settings"] = json();
  } else if (name == "q8-u2") {
    j["group"] = {{"kind", "quaternion8"}};
    j["target"] = {{"kind", "matrix"}, {"dim", 2}, {"field", "complex"},
                   {"subtype", "unitary"}};
    j["action"] = {{"kind", "trivial"}};
    j["base"] = {{"kind", "named"}, {"name", "q8-spin"}};
    j["perturbation"] = {{"epsilon", 1e-2}, {"seed", 42}, {"profile", "uniform-ball"}};
    j["settings"] = json();
  } else if (name == "c4-twisted-r2") {
    j["group"] = {{"kind", "cyclic"}, {"n", 4}};
    j["target"] = {{"kind", "abelian"}, {"dim", 2}};
    j["action"] = {{"kind", "linear"},
                   {"matrices", json::array({
                        json::array({json::array({1, 0}), json::array({0, 1})}),
                        json::array({json::array({0, -1}), json::array({1, 0})}),
                        json::array({json::array({-1, 0}), json::array({0, -1})}),
                        json::array({json::array({0, 1}), json::array({-1, 0})})})}};
    j["base"] = {{"kind", "zero"}, {"arity", 1}};
    j["perturbation"] = {{"epsilon", 1e-2}, {"seed", 42}, {"profile", "uniform-ball"}};
    j["settings"] = json();
  } else if (name == "u1-u2") {
    j["group"] = {{"kind", "u1"}, {"nodes", 16}};
    j["target"] = {{"kind", "matrix"}, {"dim", 2}, {"field", "complex"},
                   {"subtype", "unitary"}};
    j["action"] = {{"kind", "trivial"}};
    j["base"] = {{"kind", "named"}, {"name", "u1-diag"}};
    j["perturbation"] = {{"epsilon", 1e-2}, {"seed", 42}, {"profile", "analytic"}};
    j["settings"] = json();
  } else if (name == "su2-u2") {
    j["group"] = {{"kind", "su2"}, {"alpha_nodes", 4}, {"beta_nodes", 16},
                  {"gamma_nodes", 8}};
    j["target"] = {{"kind", "matrix"}, {"dim", 2}, {"field", "complex"},
                   {"subtype", "unitary"}};
    j["action"] = {{"kind", "trivial"}};
    j["base"] = {{"kind", "named"}, {"name", "su2-defining"}};
    j["perturbation"] = {{"epsilon", 1e-4}, {"seed", 42}, {"profile", "analytic"}};
    j["settings"] = {{"tol", 1e-6}, {"max_iter", 4}, {"lie_node_tuple_cap", 2048}};
  } else if (name == "c2c2-abelian-n2") {
    j["group"] = {{"kind", "finite-product"},
                  {"factors", json::array({{{"kind", "cyclic"}, {"n", 2}},
                                           {{"kind", "cyclic"}, {"n", 2}}})}};
    j["target"] = {{"kind", "abelian"}, {"dim", 2}};
    j["action"] = {{"kind", "linear"},
                   {"matrices", json::array({
                        json::array({json::array({1, 0}), json::array({0, 1})}),
                        json::array({json::array({1, 0}), json::array({0, 1})}),
                        json::array({json::array({0, 1}), json::array({1, 0})}),
                        json::array({json::array({0, 1}), json::array({1, 0})})})}};
    j["base"] = {{"kind", "zero"}, {"arity", 2}};
    j["perturbation"] = {{"epsilon", 1e-2}, {"seed", 7}, {"profile", "uniform-ball"}};
    j["settings"] = json();
  } else {
    throw FormatError("unknown template '" + name + "'");
  }
  return scenario_from_json(j);
}

SweepResult sweep(const Scenario& sc, const std::vector<double>& epsilons,
                  int jobs) {
  SweepResult result;
  result.rows.resize(epsilons.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= epsilons.size()) break;
      SweepRow& row = result.rows[i];
      row.epsilon = epsilons[i];
      try {
        Scenario si = sc;
        si.perturbation.epsilon = epsilons[i];
        si.perturbation.seed = sc.perturbation.seed + i;
        RunResult rr = run_scenario(si);
        row.final_defect = rr.report.final_defect;
        row.distance = rr.report.distance;
        row.fitted_order = rr.report.fitted_order;
        row.status = rr.report.status;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
    }
  };
  const int n_jobs = std::max(1, std::min<int>(jobs, int(epsilons.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n_jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Hyers-Ulam slope: log-log fit of distance vs epsilon over converged rows.
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : result.rows) {
    if (!row.failed && row.status == RectifyStatus::Converged &&
        row.epsilon > 0.0 && row.distance > 0.0) {
      pts.emplace_back(std::log(row.epsilon), std::log(row.distance));
      result.c_hu_max = std::max(result.c_hu_max, row.distance / row.epsilon);
    }
  }
  if (pts.size() >= 2) {
    double sx = 0, sy = 0;
    for (auto& [x, y] : pts) {
      sx += x;
      sy += y;
    }
    const double mx = sx / double(pts.size()), my = sy / double(pts.size());
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 1e-30) {
      result.slope = sxy / sxx;
      result.slope_valid = true;
    }
  }
  return result;
}

}  // namespace corec
