#include "corec/target.hpp"

#include <cmath>
#include <sstream>

#include "corec/rng.hpp"

namespace corec {

namespace {

std::string element_key(const CompactGroup& g, const GroupElement& e) {
  std::vector<std::int64_t> key;
  append_quantized_key(g, e, key);
  return std::string(reinterpret_cast<const char*>(key.data()),
                     key.size() * sizeof(std::int64_t));
}

}  // namespace

TargetGroup TargetGroup::matrix_group(std::size_t dim, Field field,
                                      MatrixSubtype subtype) {
  if (dim < 1) throw PreconditionError("target dimension must be >= 1");
  TargetGroup t;
  t.kind_ = TargetKind::MatrixGroup;
  t.dim_ = dim;
  t.field_ = (subtype == MatrixSubtype::Unitary) ? Field::Complex : field;
  t.subtype_ = subtype;
  return t;
}

TargetGroup TargetGroup::abelian_vector(std::size_t dim) {
  if (dim < 1) throw PreconditionError("target dimension must be >= 1");
  TargetGroup t;
  t.kind_ = TargetKind::AbelianVector;
  t.dim_ = dim;
  t.field_ = Field::Real;
  t.subtype_ = MatrixSubtype::GeneralLinear;
  return t;
}

Matrix TargetGroup::identity() const {
  if (abelian()) return Matrix(dim_, 1, Field::Real);
  return Matrix::identity(dim_, field_);
}

Matrix TargetGroup::compose(const Matrix& u, const Matrix& v) const {
  return abelian() ? mat_add(u, v) : mat_mul(u, v);
}

Matrix TargetGroup::invert(const Matrix& u) const {
  return abelian() ? mat_scale(u, -1.0) : mat_inv(u);
}

void TargetGroup::check_member(const Matrix& u, const char* context) const {
  if (abelian()) {
    if (u.rows() != dim_ || u.cols() != 1 || !u.is_real()) {
      throw KindMismatchError(std::string(context) +
                              ": expected a real column of the target dimension");
    }
    return;
  }
  if (u.rows() != dim_ || u.cols() != dim_) {
    throw KindMismatchError(std::string(context) + ": wrong matrix dimension");
  }
  if (field_ == Field::Real && !u.is_real()) {
    throw KindMismatchError(std::string(context) +
                            ": complex value in a real matrix group");
  }
  mat_inv(u);  // raises SingularMatrixError when not invertible
  if (subtype_ == MatrixSubtype::Unitary) {
    const Matrix r =
        mat_sub(mat_mul(adjoint(u), u), Matrix::identity(dim_, field_));
    if (op_norm(r, NormKind::Spectral) > 1e-10) {
      throw KindMismatchError(std::string(context) +
                              ": value is not unitary within 1e-10");
    }
  }
}

void TargetGroup::check_algebra(const Matrix& x, const char* context) const {
  if (abelian()) {
    if (x.rows() != dim_ || x.cols() != 1 || !x.is_real()) {
      throw KindMismatchError(std::string(context) +
                              ": expected a real column of the target dimension");
    }
    return;
  }
  if (x.rows() != dim_ || x.cols() != dim_) {
    throw KindMismatchError(std::string(context) + ": wrong matrix dimension");
  }
  x.check_finite(context);
}

Matrix exp_u(const TargetGroup& t, const Matrix& x) {
  if (t.abelian()) return x;
  return expm(x);
}

Matrix log_u(const TargetGroup& t, const Matrix& u) {
  if (t.abelian()) return u;
  return logm(u);
}

double alg_norm(const TargetGroup& t, const Matrix& x) {
  (void)t;
  return op_norm(x, NormKind::Spectral);
}

double ad_operator_norm(const TargetGroup& t, const Matrix& u) {
  if (t.abelian()) return 1.0;
  return op_norm(u, NormKind::Spectral) *
         op_norm(mat_inv(u), NormKind::Spectral);
}

GAction GAction::trivial(CompactGroupPtr group, TargetGroupPtr target) {
  GAction a;
  a.kind_ = Kind::Trivial;
  a.group_ = std::move(group);
  a.target_ = std::move(target);
  return a;
}

GAction GAction::conjugation(CompactGroupPtr group, TargetGroupPtr target,
                             PiFn pi) {
  if (target->abelian()) {
    throw KindMismatchError("conjugation action requires a matrix target");
  }
  GAction a;
  a.kind_ = Kind::Conjugation;
  a.group_ = std::move(group);
  a.target_ = std::move(target);
  a.pi_ = std::move(pi);
  return a;
}

GAction GAction::linear_on_vector(CompactGroupPtr group, TargetGroupPtr target,
                                  PiFn pi) {
  if (!target->abelian()) {
    throw KindMismatchError("linear action requires an abelian vector target");
  }
  GAction a;
  a.kind_ = Kind::LinearOnVector;
  a.group_ = std::move(group);
  a.target_ = std::move(target);
  a.pi_ = std::move(pi);
  return a;
}

const std::pair<Matrix, Matrix>& GAction::cached(const GroupElement& s) const {
  const std::string key = element_key(*group_, s);
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->map.find(key);
  if (it == cache_->map.end()) {
    Matrix p = pi_(s);
    Matrix pinv = mat_inv(p);
    it = cache_->map
             .emplace(key, std::make_pair(std::move(p), std::move(pinv)))
             .first;
  }
  return it->second;
}

Matrix GAction::pi(const GroupElement& s) const {
  if (kind_ == Kind::Trivial) {
    return Matrix::identity(target_->dim(),
                            target_->abelian() ? Field::Real : target_->field());
  }
  return cached(s).first;
}

Matrix GAction::pi_inv(const GroupElement& s) const {
  if (kind_ == Kind::Trivial) {
    return Matrix::identity(target_->dim(),
                            target_->abelian() ? Field::Real : target_->field());
  }
  return cached(s).second;
}

void GAction::validate(std::uint64_t seed, int samples) const {
  if (kind_ == Kind::Trivial) return;
  const std::size_t n = target_->dim();
  {
    const Matrix pe = pi(identity_of(*group_));
    if (pe.rows() != n || pe.cols() != n) {
      throw PreconditionError("action: pi has the wrong dimension");
    }
    Matrix diff = mat_sub(pe, Matrix::identity(n, pe.field()));
    if (op_norm(diff, NormKind::Spectral) > 1e-12) {
      throw PreconditionError(
          "action: pi(identity) differs from I beyond 1e-12");
    }
  }
  // The action must be an exact homomorphism into automorphisms;
  // approximate input lives in the cochain, never here.
  auto check_pair = [&](const GroupElement& s, const GroupElement& t) {
    const Matrix lhs = pi(group_mul(*group_, s, t));
    const Matrix rhs = mat_mul(pi(s), pi(t));
    if (max_abs_diff(lhs, rhs) > 1e-10) {
      throw PreconditionError(
          "action: pi is not a homomorphism within 1e-10 on a sampled pair");
    }
    if (kind_ == Kind::LinearOnVector) {
      const Matrix ortho = mat_sub(mat_mul(transpose(pi(s)), pi(s)),
                                   Matrix::identity(n, Field::Real));
      if (op_norm(ortho, NormKind::Spectral) > 1e-10) {
        throw PreconditionError("action: linear pi is not orthogonal");
      }
    }
  };
  if (group_->kind == CompactGroup::Kind::Finite && group_->order <= 64) {
    for (int i = 0; i < group_->order; ++i) {
      for (int j = 0; j < group_->order; ++j) {
        check_pair(GroupElement::finite(i), GroupElement::finite(j));
      }
    }
  } else {
    for (int k = 0; k < samples; ++k) {
      check_pair(sample_element(*group_, seed, 2 * k),
                 sample_element(*group_, seed, 2 * k + 1));
    }
  }
}

Matrix act(const GAction& a, const GroupElement& s, const Matrix& u) {
  switch (a.kind()) {
    case GAction::Kind::Trivial:
      return u;
    case GAction::Kind::Conjugation:
      return mat_mul(a.pi(s), mat_mul(u, a.pi_inv(s)));
    case GAction::Kind::LinearOnVector:
      return mat_mul(a.pi(s), u);
  }
  throw KindMismatchError("act: unknown action kind");
}

Matrix act_alg(const GAction& a, const GroupElement& s, const Matrix& x) {
  // The induced algebra action is the same conjugation (resp. the same
  // linear map).
  return act(a, s, x);
}

GroupElement sample_element(const CompactGroup& g, std::uint64_t seed,
                            std::uint64_t counter) {
  switch (g.kind) {
    case CompactGroup::Kind::Finite:
      return GroupElement::finite(
          long(rng_word(seed, 0xE1E4, counter) % std::uint64_t(g.order)));
    case CompactGroup::Kind::U1:
      return GroupElement::angle(rng_uniform(seed, 0xE1E4, counter) *
                                 6.283185307179586476925286766559);
    case CompactGroup::Kind::SU2: {
      // Normalized Gaussians: uniform on the 3-sphere.
      const double w = rng_gaussian(seed, 0xE1E5, 4 * counter);
      const double x = rng_gaussian(seed, 0xE1E5, 4 * counter + 1);
      const double y = rng_gaussian(seed, 0xE1E5, 4 * counter + 2);
      const double z = rng_gaussian(seed, 0xE1E5, 4 * counter + 3);
      return GroupElement::quaternion(w, x, y, z);
    }
    case CompactGroup::Kind::Product: {
      std::vector<GroupElement> parts;
      for (std::size_t i = 0; i < g.factors.size(); ++i) {
        parts.push_back(
            sample_element(*g.factors[i], sm64_mix(seed + i + 1), counter));
      }
      return GroupElement::concat(parts);
    }
  }
  throw KindMismatchError("sample_element: unknown group kind");
}

}  // namespace corec
