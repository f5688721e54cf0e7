#include "corec/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "corec/report_io.hpp"
#include "corec/rng.hpp"
#include "corec/scenarios.hpp"

namespace corec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Matrix rotation(double theta) {
  return Matrix::from_rows({{std::cos(theta), -std::sin(theta)},
                            {std::sin(theta), std::cos(theta)}});
}

TargetGroupPtr r2_target() {
  return std::make_shared<const TargetGroup>(TargetGroup::abelian_vector(2));
}

// Canonical 2-dim orthogonal twisted action per built-in group family.
GActionPtr twisted_action(const CompactGroupPtr& g, const TargetGroupPtr& t) {
  GAction::PiFn pi;
  const std::string& n = g->name;
  if (n == "Q8") {
    pi = [](const GroupElement& s) {
      const double chi = (s.index >= 4) ? -1.0 : 1.0;  // -1 on +-j, +-k
      return Matrix::from_rows({{1, 0}, {0, chi}});
    };
  } else if (n.size() > 1 && n[0] == 'D') {
    const int half = g->order / 2;
    pi = [half](const GroupElement& s) {
      const long a = s.index % half;
      Matrix m = rotation(kTwoPi * double(a) / double(half));
      if (s.index >= half) {
        m = mat_mul(Matrix::from_rows({{1, 0}, {0, -1}}), m);
      }
      return m;
    };
  } else if (g->name.find('x') != std::string::npos) {
    // Products of two cyclic factors: component sign characters.
    const int nb = g->order / 2;  // second factor order (first is C2 here)
    pi = [nb](const GroupElement& s) {
      const long a = s.index / nb;
      const long b = s.index % nb;
      return Matrix::from_rows({{a % 2 ? -1.0 : 1.0, 0},
                                {0, b % 2 ? -1.0 : 1.0}});
    };
  } else {
    const int order = g->order;
    pi = [order](const GroupElement& s) {
      return rotation(kTwoPi * double(s.index) / double(order));
    };
  }
  auto a = std::make_shared<const GAction>(GAction::linear_on_vector(g, t, pi));
  a->validate();
  return a;
}

Cochain random_r2_cochain(const CompactGroupPtr& g, const TargetGroupPtr& t,
                          const GActionPtr& a, int arity, std::uint64_t seed,
                          ValueSpace space) {
  std::size_t total = 1;
  for (int i = 0; i < arity; ++i) total *= std::size_t(g->order);
  std::vector<Matrix> table;
  for (std::size_t k = 0; k < total; ++k) {
    table.push_back(Matrix::column(
        {rng_gaussian(seed, k, 0), rng_gaussian(seed, k, 1)}));
  }
  return Cochain::from_table(arity, g, t, a, std::move(table), space);
}

Cochain zero_rho(const CompactGroupPtr& g, const TargetGroupPtr& t,
                 const GActionPtr& a) {
  std::vector<Matrix> table(std::size_t(g->order), Matrix(t->dim(), 1));
  return Cochain::from_table(1, g, t, a, std::move(table),
                             ValueSpace::GroupValued);
}

std::vector<CompactGroupPtr> oracle_groups_up_to_12() {
  return {build_cyclic(2),   build_cyclic(3),  build_cyclic(4),
          build_cyclic(5),   build_cyclic(6),  build_cyclic(8),
          build_cyclic(12),  build_dihedral(3), build_dihedral(4),
          build_dihedral(5), build_dihedral(6), build_quaternion8(),
          build_finite_product(build_cyclic(2), build_cyclic(2)),
          build_finite_product(build_cyclic(2), build_cyclic(4))};
}

// --- oracles -----------------------------------------------------------

bool oracle_delta_squared(std::string& detail) {
  double worst = 0.0;
  for (const auto& g : oracle_groups_up_to_12()) {
    auto t = r2_target();
    auto a = twisted_action(g, t);
    Cochain rho0 = zero_rho(g, t, a);
    for (int arity = 1; arity <= 3; ++arity) {
      Cochain c = random_r2_cochain(g, t, a, arity, 1000 + std::uint64_t(arity),
                                    ValueSpace::AlgebraValued);
      Cochain dd = twisted_delta(twisted_delta(c, rho0), rho0);
      for (const auto& tup : exhaustive_eval_set(g, arity + 2).tuples) {
        worst = std::max(worst, alg_norm(*t, dd(tup.elems)));
      }
    }
  }
  std::ostringstream os;
  os << "max |delta(delta c)| = " << worst;
  detail = os.str();
  return worst <= 1e-13;
}

bool oracle_homotopy_identity(std::string& detail) {
  double worst = 0.0;
  auto groups = {build_cyclic(4),  build_cyclic(5),    build_dihedral(3),
                 build_dihedral(4), build_quaternion8(),
                 build_finite_product(build_cyclic(2), build_cyclic(2))};
  for (const auto& g : groups) {
    auto t = r2_target();
    auto a = twisted_action(g, t);
    auto scheme = haar_scheme(*g);
    Cochain rho0 = zero_rho(g, t, a);
    for (int gamma_arity = 2; gamma_arity <= 4; ++gamma_arity) {
      if (gamma_arity == 4 && g->order > 6) continue;
      Cochain gamma = random_r2_cochain(g, t, a, gamma_arity,
                                        2000 + std::uint64_t(gamma_arity),
                                        ValueSpace::AlgebraValued);
      Cochain left = twisted_delta(homotopy_last_slot(gamma, scheme), rho0);
      Cochain right = homotopy_last_slot(twisted_delta(gamma, rho0), scheme);
      for (const auto& tup : exhaustive_eval_set(g, gamma_arity).tuples) {
        const Matrix sum = mat_add(left(tup.elems), right(tup.elems));
        worst = std::max(worst, alg_norm(*t, mat_sub(sum, gamma(tup.elems))));
      }
    }
  }
  std::ostringstream os;
  os << "max |delta h + h delta - id| = " << worst;
  detail = os.str();
  return worst <= 1e-12;
}

bool oracle_quadratic_almost_cocycle(std::string& detail) {
  double worst_ratio = 0.0;
  for (const char* name : {"s3-gl2", "q8-u2"}) {
    for (double eps : {1e-2, 1e-3}) {
      Scenario sc = template_scenario(name);
      sc.perturbation.epsilon = eps;
      Cochain rho = scenario_input(sc);
      auto eval2 = exhaustive_eval_set(sc.group, 2);
      auto eval3 = exhaustive_eval_set(sc.group, 3);
      const double measured = defect(rho, eval2).value;
      const double d3 = twisted_cocycle_defect(beta_of(rho), rho, eval3);
      worst_ratio = std::max(worst_ratio, d3 / (measured * measured));
    }
  }
  std::ostringstream os;
  os << "max defect3 / defect^2 = " << worst_ratio;
  detail = os.str();
  return worst_ratio <= 10.0;
}

bool oracle_chart_roundtrip(std::string& detail) {
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t dim = 1 + std::size_t(rep % 8);
    const bool cplx = rep % 2;
    Matrix x(dim, dim, cplx ? Field::Complex : Field::Real);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        x.at(i, j) = cxd(rng_gaussian(11, std::uint64_t(rep), i * dim + j),
                         cplx ? rng_gaussian(11, std::uint64_t(rep),
                                             dim * dim + i * dim + j)
                              : 0.0);
      }
    }
    const double norm = op_norm(x);
    if (norm > 0.0) x = mat_scale(x, 0.999 / norm);
    const Matrix back = logm(expm(x));
    worst = std::max(worst, max_abs_diff(back, x));
  }
  std::ostringstream os;
  os << "max |logm(expm x) - x| = " << worst << " over 1000 draws";
  detail = os.str();
  return worst <= 1e-12;
}

bool oracle_bch_order(std::string& detail) {
  double lo = 1e300, hi = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    Matrix a(3, 3, Field::Real), b(3, 3, Field::Real);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        a.at(i, j) = rng_gaussian(12, std::uint64_t(rep), i * 3 + j);
        b.at(i, j) = rng_gaussian(13, std::uint64_t(rep), i * 3 + j);
      }
    }
    a = mat_scale(a, 1.0 / op_norm(a));
    b = mat_scale(b, 1.0 / op_norm(b));
    auto err = [&](double s) {
      const Matrix as = mat_scale(a, s), bs = mat_scale(b, s);
      return op_norm(
          mat_sub(logm(mat_mul(expm(as), expm(bs))), bch4(as, bs)));
    };
    const double ratio = err(0.1) / err(0.05);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  std::ostringstream os;
  os << "halving ratios in [" << lo << ", " << hi << "], expect ~32";
  detail = os.str();
  return lo >= 8.0 && hi <= 128.0;
}

bool oracle_haar(std::string& detail) {
  // Weight normalization, inversion closure, and invariance.
  for (const auto& g : {build_u1(16), build_su2(4, 16, 8)}) {
    auto scheme = haar_scheme(*g);
    double sum = 0.0, comp = 0.0;
    for (const auto& node : scheme.nodes) {
      const double y = node.weight - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-14) {
      detail = "weights of " + g->name + " sum to " + std::to_string(sum);
      return false;
    }
    for (const auto& node : scheme.nodes) {
      const GroupElement inv = group_inv(*g, node.point);
      bool found = false;
      for (const auto& other : scheme.nodes) {
        if (same_element(*g, inv, other.point, 1e-12) &&
            other.weight == node.weight) {
          found = true;
          break;
        }
      }
      if (!found) {
        detail = g->name + " node set is not inversion-closed";
        return false;
      }
    }
  }
  // U(1): character integrals vanish exactly below the node count.
  {
    auto g = build_u1(16);
    auto scheme = haar_scheme(*g);
    for (int k = 1; k <= 4; ++k) {
      cxd acc(0, 0);
      for (const auto& node : scheme.nodes) {
        acc += node.weight * std::exp(cxd(0, k * node.point.coords[0]));
      }
      if (std::abs(acc) > 1e-13) {
        detail = "U(1) character integral " + std::to_string(k) +
                 " = " + std::to_string(std::abs(acc));
        return false;
      }
    }
  }
  // SU(2): defining-representation entries integrate to zero and are
  // invariant under left translation by nodes.
  {
    auto g = build_su2(4, 16, 8);
    auto scheme = haar_scheme(*g);
    auto su2m = [](const GroupElement& q) {
      const double w = q.coords[0], x = q.coords[1], y = q.coords[2],
                   z = q.coords[3];
      return Matrix::from_rows_complex(
          {{cxd(w, -z), cxd(-y, -x)}, {cxd(y, -x), cxd(w, z)}});
    };
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) {
        cxd base(0, 0);
        for (const auto& node : scheme.nodes) {
          base += node.weight * su2m(node.point).at(r, c);
        }
        if (std::abs(base) > 1e-12) {
          detail = "SU(2) defining coefficient integral is nonzero";
          return false;
        }
        for (std::size_t ti = 0; ti < scheme.nodes.size(); ti += 119) {
          cxd shifted(0, 0);
          for (const auto& node : scheme.nodes) {
            shifted += node.weight *
                       su2m(group_mul(*g, scheme.nodes[ti].point, node.point))
                           .at(r, c);
          }
          if (std::abs(shifted - base) > 1e-12) {
            detail = "SU(2) scheme is not left-invariant on the defining rep";
            return false;
          }
        }
      }
    }
  }
  detail = "normalization, closure, invariance";
  return true;
}

bool oracle_cayley_checker(std::string& detail) {
  // An order-5 loop: latin square with identity and two-sided inverses
  // that is not associative, so the checker must name a failing triple.
  const std::vector<int> t = {0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0,
                              1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
  try {
    build_from_cayley(5, t, "corrupted-fixture");
  } catch (const GroupAxiomError& e) {
    detail = std::string("rejected with: ") + e.what();
    return std::string(e.what()).find("associativity") != std::string::npos;
  }
  detail = "corrupted table was accepted";
  return false;
}

}  // namespace

bool run_selftest(std::ostream& out,
                  const std::optional<std::string>& cayley_path) {
  using Oracle = std::function<bool(std::string&)>;
  const std::vector<std::pair<std::string, Oracle>> oracles = {
      {"coboundary squares to zero (n <= 3, order <= 12, twisted)",
       oracle_delta_squared},
      {"last-slot homotopy identity (order <= 8, exhaustive)",
       oracle_homotopy_identity},
      {"defect of averaged correction is quadratic", oracle_quadratic_almost_cocycle},
      {"exp/log chart roundtrip (1000 seeded matrices)", oracle_chart_roundtrip},
      {"truncated BCH is fifth-order accurate", oracle_bch_order},
      {"Haar schemes: normalization, closure, invariance", oracle_haar},
      {"Cayley axiom checker rejects a corrupted fixture", oracle_cayley_checker},
  };
  bool all_ok = true;
  for (const auto& [name, oracle] : oracles) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = oracle(detail);
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    char line[512];
    std::snprintf(line, sizeof line, "[%s] %-55s %7.2fs  %s",
                  ok ? " ok " : "FAIL", name.c_str(), secs, detail.c_str());
    out << line << "\n";
    all_ok = all_ok && ok;
  }
  if (cayley_path) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail = "table satisfies the group axioms";
    bool ok = true;
    try {
      const nlohmann::json j = nlohmann::json::parse(read_text_file(*cayley_path));
      const int order = j.at("order").get<int>();
      std::vector<int> flat;
      for (const auto& row : j.at("table")) {
        for (const auto& e : row) flat.push_back(e.get<int>());
      }
      build_from_cayley(order, flat, "user-table");
    } catch (const GroupAxiomError& e) {
      ok = false;
      detail = e.what();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("malformed table file: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    char line[512];
    std::snprintf(line, sizeof line, "[%s] %-55s %7.2fs  %s",
                  ok ? " ok " : "FAIL", "user Cayley table", secs,
                  detail.c_str());
    out << line << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok;
}

}  // namespace corec
