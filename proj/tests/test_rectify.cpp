#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corec/rectify.hpp"
#include "fixtures.hpp"

using namespace corec;
using namespace fixtures;

namespace {

Cochain c2_sign_perturbed() {
  auto c2 = build_cyclic(2);
  auto t = gl(1);
  auto a = trivial_action(c2, t);
  std::vector<Matrix> table = {Matrix::from_rows({{1.0}}),
                               Matrix::from_rows({{-std::exp(0.1)}})};
  return Cochain::from_table(1, c2, t, a, table, ValueSpace::GroupValued);
}

Cochain c4_twisted_principal(double scale) {
  auto c4 = build_cyclic(4);
  auto t = gl(2);
  auto conj = std::make_shared<const GAction>(
      GAction::conjugation(c4, t, [](const GroupElement& s) {
        return rotation(M_PI_2 * double(s.index));
      }));
  conj->validate();
  // Principal cocycle rho(s) = u^-1 * (s^>u): exact for any action.
  const Matrix u = expm(mat_scale(Matrix::from_rows({{0.3, 0.1}, {-0.2, 0.1}}),
                                  scale));
  const Matrix ui = mat_inv(u);
  std::vector<Matrix> table;
  for (int i = 0; i < 4; ++i) {
    table.push_back(mat_mul(ui, act(*conj, GroupElement::finite(i), u)));
  }
  return Cochain::from_table(1, c4, t, conj, table, ValueSpace::GroupValued);
}

}  // namespace

TEST_CASE("gate_check: pass and both rejection reasons") {
  RectifySettings settings;
  auto q8 = build_quaternion8();
  auto t = un(2);
  Cochain spin = q8_spin(q8, t, trivial_action(q8, t));
  auto scheme = haar_scheme(*q8);
  CHECK(gate_check(spin, settings, scheme).pass);

  // Ad-norm violation: diag(1e4, 1e-4) has conjugation norm 1e8.
  auto c2 = build_cyclic(2);
  auto t2 = gl(2);
  std::vector<Matrix> table = {Matrix::identity(2),
                               Matrix::from_rows({{1e4, 0}, {0, 1e-4}})};
  Cochain wild = Cochain::from_table(1, c2, t2, trivial_action(c2, t2), table,
                                     ValueSpace::GroupValued);
  auto res = gate_check(wild, settings, haar_scheme(*c2));
  CHECK_FALSE(res.pass);
  CHECK(res.reason.find("Ad bound") != std::string::npos);

  // Defect 0.2 > 1/16.
  auto rej = gate_check(c2_sign_perturbed(), settings, haar_scheme(*c2));
  CHECK_FALSE(rej.pass);
  CHECK(rej.reason.find("defect bound") != std::string::npos);
}

TEST_CASE("rectify_step: exact cocycle is a bitwise fixed point") {
  auto d4 = build_dihedral(4);
  auto t = gl(2);
  Cochain rho = d4_standard(d4, t, trivial_action(d4, t));
  auto [next, diag] = rectify_step(rho, haar_scheme(*d4));
  CHECK(diag.alpha_sup == 0.0);
  CHECK(diag.post_defect == 0.0);
  for (std::size_t i = 0; i < rho.table().size(); ++i) {
    CHECK(max_abs_diff(next.table()[i], rho.table()[i]) == 0.0);
  }
}

TEST_CASE("rectify_step: C2 sign example recovers the representation") {
  Cochain rho = c2_sign_perturbed();
  auto scheme = haar_scheme(*rho.group());
  auto [next, diag] = rectify_step(rho, scheme);
  CHECK(diag.pre_defect == doctest::Approx(0.2).epsilon(1e-13));
  // alpha(g) = -0.1, rho'(g) = e^{-0.1} * (-e^{0.1}) = -1.
  CHECK(diag.alpha_sup == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(next(GroupElement::finite(1))(0, 0).real() ==
        doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(diag.post_defect <= 1e-14);
}

TEST_CASE("rectify_step contracts quadratically on seeded scenarios") {
  auto s3 = build_symmetric(3);
  auto t = gl(2);
  Cochain base = s3_standard(s3, t, trivial_action(s3, t));
  auto scheme = haar_scheme(*s3);
  auto eval2 = exhaustive_eval_set(s3, 2);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    testutil::Rng rng(seed);
    Cochain pert = perturb_table(rng, base, 1e-2);
    const double pre = defect(pert, eval2).value;
    REQUIRE(pre <= 3e-2);
    auto [next, diag] = rectify_step(pert, scheme);
    CHECK(diag.post_defect <= 10.0 * pre * pre);
  }
}

TEST_CASE("rectify: exact input converges with zero iterations") {
  auto d4 = build_dihedral(4);
  auto t = gl(2);
  Cochain rho = d4_standard(d4, t, trivial_action(d4, t));
  RectifySettings settings;
  auto [out, rep] = rectify(rho, settings, haar_scheme(*d4));
  CHECK(rep.status == RectifyStatus::Converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.defect_trace.size() == 1);
  CHECK(rep.distance == 0.0);
}

TEST_CASE("rectify: perturbed S3 standard representation") {
  auto s3 = build_symmetric(3);
  auto t = gl(2);
  Cochain base = s3_standard(s3, t, trivial_action(s3, t));
  testutil::Rng rng(42);
  Cochain pert = perturb_table(rng, base, 1e-2);
  RectifySettings settings;
  auto scheme = haar_scheme(*s3);
  auto [out, rep] = rectify(pert, settings, scheme);
  REQUIRE(rep.status == RectifyStatus::Converged);
  CHECK(rep.final_defect <= 1e-12);
  // Strictly decreasing, quadratically, until the floor.
  for (std::size_t k = 0; k + 1 < rep.defect_trace.size(); ++k) {
    CHECK(rep.defect_trace[k + 1] < rep.defect_trace[k]);
    if (rep.defect_trace[k + 1] > 1e-12) {
      CHECK(rep.defect_trace[k + 1] <=
            10.0 * rep.defect_trace[k] * rep.defect_trace[k]);
    }
  }
  // Output exactness on all pairs, exhaustively; trivial action makes the
  // result a homomorphism.
  auto eval2 = exhaustive_eval_set(s3, 2);
  CHECK(defect(out, eval2).value <= settings.tol);
  for (const auto& tup : eval2.tuples) {
    Matrix lhs = mat_mul(out(tup.elems[0]), out(tup.elems[1]));
    Matrix rhs = out(group_mul(*s3, tup.elems[0], tup.elems[1]));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
  }
  // Hyers-Ulam closeness and the near-coboundary diagnostic.
  const double eps0 = rep.defect_trace.front();
  CHECK(rep.distance <= 10.0 * eps0);
  REQUIRE(rep.near_coboundary_valid);
  CHECK(rep.near_coboundary_residual <= 10.0 * eps0 * eps0);
}

TEST_CASE("rectify: twisted C4 conjugation scenario converges") {
  Cochain base = c4_twisted_principal(1.0);
  auto eval2 = exhaustive_eval_set(base.group(), 2);
  REQUIRE(defect(base, eval2).value <= 1e-13);
  testutil::Rng rng(7);
  Cochain pert = perturb_table(rng, base, 1e-2);
  RectifySettings settings;
  auto [out, rep] = rectify(pert, settings, haar_scheme(*base.group()));
  REQUIRE(rep.status == RectifyStatus::Converged);
  CHECK(rep.final_defect <= 1e-12);
  // Exact twisted cocycle identity: rho(s) * s^>rho(t) = rho(st).
  for (const auto& tup : eval2.tuples) {
    Matrix lhs = mat_mul(out(tup.elems[0]),
                         act(*out.action(), tup.elems[0], out(tup.elems[1])));
    Matrix rhs = out(group_mul(*out.group(), tup.elems[0], tup.elems[1]));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("rectify: gate rejection reports the reason") {
  RectifySettings settings;
  auto [out, rep] = rectify(c2_sign_perturbed(), settings,
                            haar_scheme(*build_cyclic(2)));
  CHECK(rep.status == RectifyStatus::GateRejected);
  CHECK_FALSE(rep.gate_reason.empty());
}

TEST_CASE("rectify: max_iter 0 stops without converging") {
  auto s3 = build_symmetric(3);
  auto t = gl(2);
  Cochain base = s3_standard(s3, t, trivial_action(s3, t));
  testutil::Rng rng(11);
  Cochain pert = perturb_table(rng, base, 1e-2);
  RectifySettings settings;
  settings.max_iter = 0;
  auto [out, rep] = rectify(pert, settings, haar_scheme(*s3));
  CHECK(rep.status == RectifyStatus::QuadratureFloor);
  CHECK(rep.iterations == 0);
}

TEST_CASE("rectify is locally Lipschitz in the input") {
  auto s3 = build_symmetric(3);
  auto t = gl(2);
  Cochain base = s3_standard(s3, t, trivial_action(s3, t));
  testutil::Rng rng(13);
  Cochain input1 = perturb_table(rng, base, 1e-3);
  // Second input: same cochain nudged pointwise by eta <= 1e-5.
  const double gap = 1e-5;
  std::vector<Matrix> nudged;
  double actual_gap = 0.0;
  {
    testutil::Rng rng2(14);
    for (std::size_t i = 0; i < input1.table().size(); ++i) {
      Matrix eta = testutil::random_with_norm(rng2, 2, gap);
      nudged.push_back(mat_mul(expm(eta), input1.table()[i]));
      actual_gap = std::max(actual_gap,
                            max_abs_diff(nudged.back(), input1.table()[i]));
    }
  }
  Cochain input2 = Cochain::from_table(1, s3, t, input1.action(), nudged,
                                       ValueSpace::GroupValued);
  RectifySettings settings;
  auto scheme = haar_scheme(*s3);
  auto [out1, rep1] = rectify(input1, settings, scheme);
  auto [out2, rep2] = rectify(input2, settings, scheme);
  REQUIRE(rep1.status == RectifyStatus::Converged);
  REQUIRE(rep2.status == RectifyStatus::Converged);
  double out_gap = 0.0;
  for (int i = 0; i < s3->order; ++i) {
    out_gap = std::max(out_gap, max_abs_diff(out1.table()[std::size_t(i)],
                                             out2.table()[std::size_t(i)]));
  }
  CHECK(out_gap <= 100.0 * gap);
}

TEST_CASE("rectify_abelian: C2 hand example reaches the zero morphism") {
  auto c2 = build_cyclic(2);
  auto t = rd(1);
  auto a = trivial_action(c2, t);
  std::vector<Matrix> table = {Matrix::column({0.1}), Matrix::column({0.3})};
  Cochain rho = Cochain::from_table(1, c2, t, a, table, ValueSpace::GroupValued);
  RectifySettings settings;
  auto [out, rep] = rectify_abelian(rho, settings, haar_scheme(*c2));
  CHECK(rep.status == RectifyStatus::Converged);
  CHECK(rep.iterations == 1);
  CHECK(std::abs(out(GroupElement::finite(0))(0, 0).real()) <= 1e-14);
  CHECK(std::abs(out(GroupElement::finite(1))(0, 0).real()) <= 1e-14);
  CHECK(rep.final_defect <= 1e-14);
}

TEST_CASE("rectify_abelian: one-shot exactness with twisted actions, n = 1..3") {
  testutil::Rng rng(17);
  auto c2c2 = build_finite_product(build_cyclic(2), build_cyclic(2));
  auto t = rd(2);
  // Swap action through the first factor: pi(a,b) = swap^a.
  auto swap_action = std::make_shared<const GAction>(GAction::linear_on_vector(
      c2c2, t, [](const GroupElement& s) {
        return (s.index / 2 == 1) ? Matrix::from_rows({{0, 1}, {1, 0}})
                                  : Matrix::identity(2);
      }));
  swap_action->validate();
  auto scheme = haar_scheme(*c2c2);
  for (int n = 1; n <= 3; ++n) {
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= 4;
    std::vector<Matrix> table;
    for (std::size_t k = 0; k < total; ++k) {
      table.push_back(Matrix::column(
          {1e-3 * rng.gaussian(), 1e-3 * rng.gaussian()}));
    }
    Cochain rho = Cochain::from_table(n, c2c2, t, swap_action, table,
                                      ValueSpace::GroupValued);
    RectifySettings settings;
    auto [out, rep] = rectify_abelian(rho, settings, scheme);
    CHECK(rep.status == RectifyStatus::Converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.final_defect <= 1e-13);
    // Exhaustive check of the output coboundary.
    auto eval = exhaustive_eval_set(c2c2, n + 1);
    CHECK(defect(out, eval).value <= 1e-13);
  }
}

TEST_CASE("fit_contraction on synthetic traces") {
  auto fit = fit_contraction({1e-2, 1e-4, 1e-8}, 1e-12);
  REQUIRE(fit.valid);
  CHECK(fit.order == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.k == doctest::Approx(1.0).epsilon(1e-10));

  // Constant trace: flagged flat.
  fit = fit_contraction({1e-3, 1e-3, 1e-3}, 1e-12);
  REQUIRE(fit.valid);
  CHECK(fit.order == 0.0);
  CHECK(fit.k == doctest::Approx(1e-3).epsilon(1e-12));

  // Synthetic quadratic trace with K = 0.5: eps -> 0.5 eps^2.
  std::vector<double> trace = {1e-1};
  for (int i = 0; i < 2; ++i) {
    trace.push_back(0.5 * trace.back() * trace.back());
  }
  fit = fit_contraction(trace, 1e-12);
  REQUIRE(fit.valid);
  CHECK(fit.order == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.k == doctest::Approx(0.5).epsilon(1e-8));

  // Too little usable data.
  CHECK_FALSE(fit_contraction({1e-2, 1e-13, 1e-14}, 1e-12).valid);
}

TEST_CASE("settings validation") {
  RectifySettings s;
  s.input_defect_max = 0.3;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = RectifySettings{};
  s.tol = 0.0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
}
