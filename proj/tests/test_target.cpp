#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "corec/target.hpp"
#include "testutil.hpp"

using namespace corec;

namespace {

TargetGroupPtr gl(std::size_t n, Field f = Field::Real) {
  return std::make_shared<const TargetGroup>(
      TargetGroup::matrix_group(n, f, MatrixSubtype::GeneralLinear));
}

TargetGroupPtr un(std::size_t n) {
  return std::make_shared<const TargetGroup>(
      TargetGroup::matrix_group(n, Field::Complex, MatrixSubtype::Unitary));
}

TargetGroupPtr rd(std::size_t d) {
  return std::make_shared<const TargetGroup>(TargetGroup::abelian_vector(d));
}

Matrix rotation(double theta) {
  return Matrix::from_rows({{std::cos(theta), -std::sin(theta)},
                            {std::sin(theta), std::cos(theta)}});
}

}  // namespace

TEST_CASE("act: trivial and conjugation basics") {
  auto c2 = build_cyclic(2);
  auto t = gl(2);
  auto triv = GAction::trivial(c2, t);
  Matrix u = Matrix::from_rows({{0, 1}, {0, 2}});
  CHECK(max_abs_diff(act(triv, GroupElement::finite(1), u), u) == 0.0);

  auto conj_id = GAction::conjugation(
      c2, t, [](const GroupElement&) { return Matrix::identity(2); });
  conj_id.validate();
  CHECK(max_abs_diff(act(conj_id, GroupElement::finite(1), u), u) == 0.0);

  // pi(g) = diag(1,-1) conjugating the nilpotent flips its sign.
  auto conj = GAction::conjugation(c2, t, [](const GroupElement& s) {
    return s.index == 0 ? Matrix::identity(2)
                        : Matrix::from_rows({{1, 0}, {0, -1}});
  });
  conj.validate();
  Matrix nil = Matrix::from_rows({{0, 1}, {0, 0}});
  Matrix out = act(conj, GroupElement::finite(1), nil);
  CHECK(max_abs_diff(out, Matrix::from_rows({{0, -1}, {0, 0}})) <= 1e-15);
}

TEST_CASE("act_alg preserves brackets") {
  auto c4 = build_cyclic(4);
  auto t = gl(2);
  auto conj = GAction::conjugation(c4, t, [](const GroupElement& s) {
    return rotation(M_PI_2 * double(s.index));
  });
  conj.validate();
  testutil::Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x = testutil::random_matrix(rng, 2);
    Matrix y = testutil::random_matrix(rng, 2);
    GroupElement s = GroupElement::finite(rep % 4);
    Matrix lhs = act_alg(conj, s, commutator(x, y));
    Matrix rhs = commutator(act_alg(conj, s, x), act_alg(conj, s, y));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
    CHECK(op_norm(act_alg(conj, s, Matrix(2, 2))) == 0.0);
  }
}

TEST_CASE("exp_u and log_u charts") {
  auto t = gl(3);
  CHECK(max_abs_diff(exp_u(*t, Matrix(3, 3)), Matrix::identity(3)) == 0.0);
  CHECK(op_norm(log_u(*t, Matrix::identity(3))) == 0.0);

  auto v = rd(3);
  Matrix x = Matrix::column({1.0, -2.0, 0.5});
  CHECK(max_abs_diff(exp_u(*v, x), x) == 0.0);
  CHECK(max_abs_diff(log_u(*v, x), x) == 0.0);

  testutil::Rng rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix y = testutil::random_with_norm(rng, 3, 0.9);
    CHECK(max_abs_diff(log_u(*t, exp_u(*t, y)), y) <= 1e-12);
  }
}

TEST_CASE("skew-Hermitian exponentials are unitary") {
  auto t = un(2);
  testutil::Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix g = testutil::random_matrix(rng, 2, Field::Complex);
    Matrix skew = mat_scale(mat_sub(g, adjoint(g)), 0.5);
    Matrix u = exp_u(*t, skew);
    Matrix r = mat_sub(mat_mul(adjoint(u), u), Matrix::identity(2, Field::Complex));
    CHECK(op_norm(r) <= 1e-12);
    t->check_member(u, "test");
  }
}

TEST_CASE("ad_operator_norm") {
  auto t = gl(2);
  CHECK(ad_operator_norm(*t, Matrix::identity(2)) == doctest::Approx(1.0));
  CHECK(ad_operator_norm(*t, Matrix::from_rows({{10, 0}, {0, 0.1}})) ==
        doctest::Approx(100.0).epsilon(1e-10));
  CHECK(ad_operator_norm(*t, rotation(0.3)) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(ad_operator_norm(*rd(4), Matrix::column({1, 2, 3, 4})) == 1.0);
}

TEST_CASE("action validation rejects non-homomorphisms") {
  auto c4 = build_cyclic(4);
  auto t = gl(2);
  auto broken = GAction::conjugation(c4, t, [](const GroupElement& s) {
    // Not a homomorphism: rotation angles grow quadratically.
    return rotation(0.3 * double(s.index * s.index));
  });
  CHECK_THROWS_AS(broken.validate(), PreconditionError);

  auto off_identity = GAction::conjugation(c4, t, [](const GroupElement& s) {
    return rotation(0.1 + double(s.index));
  });
  CHECK_THROWS_AS(off_identity.validate(), PreconditionError);
}

TEST_CASE("action composition law and naturality of exp") {
  auto c4 = build_cyclic(4);
  auto t = gl(2);
  auto conj = GAction::conjugation(c4, t, [](const GroupElement& s) {
    return rotation(M_PI_2 * double(s.index));
  });
  conj.validate();
  testutil::Rng rng(33);
  for (int rep = 0; rep < 20; ++rep) {
    GroupElement s = GroupElement::finite(rep % 4);
    GroupElement u_el = GroupElement::finite((rep / 4) % 4);
    Matrix p = testutil::random_well_conditioned(rng, 2);
    Matrix lhs = act(conj, group_mul(*c4, s, u_el), p);
    Matrix rhs = act(conj, s, act(conj, u_el, p));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-10);

    Matrix q = testutil::random_well_conditioned(rng, 2);
    Matrix prod_act = act(conj, s, mat_mul(p, q));
    Matrix act_prod = mat_mul(act(conj, s, p), act(conj, s, q));
    CHECK(max_abs_diff(prod_act, act_prod) <= 1e-10);

    Matrix x = testutil::random_with_norm(rng, 2, 0.5);
    Matrix nat_l = exp_u(*t, act_alg(conj, s, x));
    Matrix nat_r = act(conj, s, exp_u(*t, x));
    CHECK(max_abs_diff(nat_l, nat_r) <= 1e-11);
  }
}

TEST_CASE("membership checks") {
  auto t = un(2);
  CHECK_THROWS_AS(t->check_member(Matrix::from_rows({{2, 0}, {0, 1}}), "test"),
                  KindMismatchError);
  auto g = gl(2);
  CHECK_THROWS_AS(g->check_member(Matrix::from_rows({{1, 1}, {1, 1}}), "test"),
                  SingularMatrixError);
  CHECK_THROWS_AS(g->check_member(Matrix::identity(3), "test"),
                  KindMismatchError);
  auto v = rd(2);
  CHECK_THROWS_AS(v->check_member(Matrix::identity(2), "test"),
                  KindMismatchError);
  v->check_member(Matrix::column({1, 2}), "test");
}
