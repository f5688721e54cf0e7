#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "corec/groups.hpp"
#include "corec/linalg.hpp"

namespace corec {

enum class TargetKind { MatrixGroup, AbelianVector };
enum class MatrixSubtype { GeneralLinear, Unitary };

// The deformation target: an invertible-matrix group GL_n / U(n), or an
// abelian vector group R^d. Points and Lie-algebra elements both ride as
// Matrix values (abelian ones as dim x 1 real columns), so one numeric
// carrier serves both; the TargetGroup supplies the group law.
class TargetGroup {
 public:
  static TargetGroup matrix_group(std::size_t dim, Field field,
                                  MatrixSubtype subtype);
  static TargetGroup abelian_vector(std::size_t dim);

  TargetKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  Field field() const { return field_; }
  MatrixSubtype subtype() const { return subtype_; }
  bool abelian() const { return kind_ == TargetKind::AbelianVector; }
  // Bracket constant C with ||[x,y]|| <= C ||x|| ||y||: 2 for matrix
  // kinds under the spectral norm, 0 for abelian.
  double bracket_constant() const { return abelian() ? 0.0 : 2.0; }

  Matrix identity() const;
  Matrix compose(const Matrix& u, const Matrix& v) const;  // product / sum
  Matrix invert(const Matrix& u) const;                    // inverse / negation

  // Membership check at ingestion: shape, invertibility, and for the
  // unitary subtype ||u*u - I|| <= 1e-10.
  void check_member(const Matrix& u, const char* context) const;
  void check_algebra(const Matrix& x, const char* context) const;

 private:
  TargetKind kind_ = TargetKind::MatrixGroup;
  std::size_t dim_ = 1;
  Field field_ = Field::Real;
  MatrixSubtype subtype_ = MatrixSubtype::GeneralLinear;
};

using TargetGroupPtr = std::shared_ptr<const TargetGroup>;

// Chart maps between the target group and its Lie algebra. For abelian
// vector targets the chart is the identity.
Matrix exp_u(const TargetGroup& t, const Matrix& x);
Matrix log_u(const TargetGroup& t, const Matrix& u);

// Norm on the Lie algebra: spectral for matrix targets; for dim x 1
// columns the spectral norm is the Euclidean norm, so the same call
// serves the abelian case.
double alg_norm(const TargetGroup& t, const Matrix& x);

// Operator norm of conjugation by u on the algebra, estimated from above
// as ||u|| ||u^-1||; 1 for abelian targets.
double ad_operator_norm(const TargetGroup& t, const Matrix& u);

// Action of the compact group on the target by automorphisms. The action
// itself is always an exact homomorphism into automorphisms (validated at
// ingestion); only the cochains fed to it are approximate.
class GAction {
 public:
  enum class Kind { Trivial, Conjugation, LinearOnVector };
  using PiFn = std::function<Matrix(const GroupElement&)>;

  static GAction trivial(CompactGroupPtr group, TargetGroupPtr target);
  static GAction conjugation(CompactGroupPtr group, TargetGroupPtr target,
                             PiFn pi);
  static GAction linear_on_vector(CompactGroupPtr group, TargetGroupPtr target,
                                  PiFn pi);

  Kind kind() const { return kind_; }
  const CompactGroupPtr& group() const { return group_; }
  const TargetGroupPtr& target() const { return target_; }
  bool is_trivial() const { return kind_ == Kind::Trivial; }

  // pi(s), memoized by quantized element key.
  Matrix pi(const GroupElement& s) const;
  Matrix pi_inv(const GroupElement& s) const;

  // Checks pi(identity) = I within 1e-12 and pi(st) = pi(s)pi(t) within
  // 1e-10 on sampled pairs; throws PreconditionError on failure.
  void validate(std::uint64_t seed = 2024, int samples = 64) const;

 private:
  Kind kind_ = Kind::Trivial;
  CompactGroupPtr group_;
  TargetGroupPtr target_;
  PiFn pi_;

  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, std::pair<Matrix, Matrix>> map;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
  const std::pair<Matrix, Matrix>& cached(const GroupElement& s) const;
};

using GActionPtr = std::shared_ptr<const GAction>;

// s acting on a target point / algebra element.
Matrix act(const GAction& a, const GroupElement& s, const Matrix& u);
Matrix act_alg(const GAction& a, const GroupElement& s, const Matrix& x);

// Samples group elements deterministically (uniform over finite groups /
// Haar-ish over Lie groups) for validation and evaluation sets.
GroupElement sample_element(const CompactGroup& g, std::uint64_t seed,
                            std::uint64_t counter);

}  // namespace corec
