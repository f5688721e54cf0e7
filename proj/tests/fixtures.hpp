#pragma once

// Shared scenario fixtures for the rectification test suites: exact
// representations built from first principles so they stay independent of
// the library's scenario factory.

#include <cmath>
#include <memory>
#include <vector>

#include "corec/cochain.hpp"
#include "testutil.hpp"

namespace fixtures {

using namespace corec;

inline TargetGroupPtr gl(std::size_t n, Field f = Field::Real) {
  return std::make_shared<const TargetGroup>(
      TargetGroup::matrix_group(n, f, MatrixSubtype::GeneralLinear));
}

inline TargetGroupPtr un(std::size_t n) {
  return std::make_shared<const TargetGroup>(
      TargetGroup::matrix_group(n, Field::Complex, MatrixSubtype::Unitary));
}

inline TargetGroupPtr rd(std::size_t d) {
  return std::make_shared<const TargetGroup>(TargetGroup::abelian_vector(d));
}

inline GActionPtr trivial_action(CompactGroupPtr g, TargetGroupPtr t) {
  return std::make_shared<const GAction>(
      GAction::trivial(std::move(g), std::move(t)));
}

inline Matrix rotation(double theta) {
  return Matrix::from_rows({{std::cos(theta), -std::sin(theta)},
                            {std::sin(theta), std::cos(theta)}});
}

// S3 standard 2-dim orthogonal representation: permutation matrices in an
// orthonormal basis of the sum-zero plane.
inline Cochain s3_standard(const CompactGroupPtr& s3, const TargetGroupPtr& t,
                           const GActionPtr& a) {
  const double r2 = std::sqrt(2.0), r6 = std::sqrt(6.0);
  const double b[3][2] = {{1 / r2, 1 / r6}, {-1 / r2, 1 / r6}, {0, -2 / r6}};
  const std::vector<std::vector<int>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                               {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<Matrix> table;
  for (int e = 0; e < 6; ++e) {
    const auto& p = perms[std::size_t(e)];
    Matrix rep(2, 2, Field::Real);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double acc = 0.0;
        for (int col = 0; col < 3; ++col) {
          acc += b[p[std::size_t(col)]][i] * b[col][j];
        }
        rep.at(std::size_t(i), std::size_t(j)) = acc;
      }
    }
    table.push_back(rep);
  }
  return Cochain::from_table(1, s3, t, a, table, ValueSpace::GroupValued);
}

// Q8 -> U(2): quaternion units as exact complex 2x2 matrices, ordering
// {1,-1,i,-i,j,-j,k,-k}.
inline Cochain q8_spin(const CompactGroupPtr& q8, const TargetGroupPtr& t,
                       const GActionPtr& a) {
  const cxd I(0, 1);
  std::vector<Matrix> units = {
      Matrix::from_rows_complex({{1, 0}, {0, 1}}),
      Matrix::from_rows_complex({{I, 0}, {0, -I}}),
      Matrix::from_rows_complex({{0, 1}, {-1, 0}}),
      Matrix::from_rows_complex({{0, I}, {I, 0}}),
  };
  std::vector<Matrix> table;
  for (int e = 0; e < 8; ++e) {
    const Matrix& u = units[std::size_t(e / 2)];
    table.push_back(e % 2 ? mat_scale(u, -1.0) : u);
  }
  return Cochain::from_table(1, q8, t, a, table, ValueSpace::GroupValued);
}

// D4 2-dim integer representation: exact zero defect.
inline Cochain d4_standard(const CompactGroupPtr& d4, const TargetGroupPtr& t,
                           const GActionPtr& a) {
  const Matrix r = Matrix::from_rows({{0, -1}, {1, 0}});
  const Matrix f = Matrix::from_rows({{1, 0}, {0, -1}});
  std::vector<Matrix> table;
  for (int e = 0; e < 8; ++e) {
    Matrix m = Matrix::identity(2);
    if (e >= 4) m = f;
    for (int k = 0; k < e % 4; ++k) m = mat_mul(m, r);
    table.push_back(m);
  }
  return Cochain::from_table(1, d4, t, a, table, ValueSpace::GroupValued);
}

// Multiplicative exponential perturbation of a tabulated cocycle with
// per-element norms eps * uniform; skew-Hermitian directions for unitary
// targets, plain Gaussians otherwise.
inline Cochain perturb_table(testutil::Rng& rng, const Cochain& rho,
                             double eps) {
  const TargetGroupPtr t = rho.target();
  const std::size_t n = t->dim();
  std::vector<Matrix> table;
  for (std::size_t e = 0; e < rho.table().size(); ++e) {
    Matrix eta = testutil::random_matrix(rng, n, t->field());
    if (t->subtype() == MatrixSubtype::Unitary) {
      eta = mat_scale(mat_sub(eta, adjoint(eta)), 0.5);
    }
    const double target_norm = eps * rng.uniform();
    const double norm = op_norm(eta);
    if (norm > 0.0) eta = mat_scale(eta, target_norm / norm);
    table.push_back(mat_mul(expm(eta), rho.table()[e]));
  }
  return Cochain::from_table(1, rho.group(), t, rho.action(), table,
                             ValueSpace::GroupValued);
}

}  // namespace fixtures
