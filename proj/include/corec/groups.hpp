#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "corec/errors.hpp"

namespace corec {

// Element of a compact group: an index into a Cayley table for finite
// groups, or real coordinates for Lie groups (U(1): one angle in [0,2pi);
// SU(2): unit quaternion w,x,y,z). Product-group elements concatenate the
// factor coordinates; finite factors contribute one integral slot.
struct GroupElement {
  bool is_finite = false;
  long index = -1;
  std::vector<double> coords;

  static GroupElement finite(long i);
  static GroupElement angle(double theta);  // reduced mod 2pi into [0,2pi)
  static GroupElement quaternion(double w, double x, double y, double z);
  static GroupElement concat(const std::vector<GroupElement>& parts);
};

class CompactGroup;
using CompactGroupPtr = std::shared_ptr<const CompactGroup>;

// A compact group: finite with a verified Cayley table, or U(1)/SU(2)
// with a quadrature resolution, or a finite product of such. Immutable
// after construction.
class CompactGroup {
 public:
  enum class Kind { Finite, U1, SU2, Product };

  Kind kind = Kind::Finite;
  std::string name;

  // Finite data.
  int order = 0;
  std::vector<int> cayley;   // row-major order x order
  std::vector<int> inverse;  // per element
  int identity_index = 0;

  // U(1): trapezoid node count.
  int u1_nodes = 0;

  // SU(2): Euler-angle node counts (alpha trapezoid on [0,2pi),
  // beta Gauss-Legendre on [0,pi], gamma trapezoid on [0,4pi)).
  int su2_alpha_nodes = 0;
  int su2_beta_nodes = 0;
  int su2_gamma_nodes = 0;

  // Product factors.
  std::vector<CompactGroupPtr> factors;

  int cayley_at(int i, int j) const { return cayley[std::size_t(i) * order + j]; }
  bool is_lie() const { return kind == Kind::U1 || kind == Kind::SU2; }
  // Number of coordinate slots an element of this group occupies.
  std::size_t coord_width() const;
};

struct HaarNode {
  GroupElement point;
  double weight = 0.0;
};

// Quadrature realization of the Haar probability measure: weights sum to
// 1 within 1e-14 and the node set is closed under group inversion.
struct HaarScheme {
  std::vector<HaarNode> nodes;
};

GroupElement group_mul(const CompactGroup& g, const GroupElement& s,
                       const GroupElement& t);
GroupElement group_inv(const CompactGroup& g, const GroupElement& s);
GroupElement identity_of(const CompactGroup& g);

HaarScheme haar_scheme(const CompactGroup& g);

// Builders. Canonical element orderings:
//   cyclic: residues 0..n-1;
//   dihedral: rotations r^0..r^(n-1), then reflections s r^0..s r^(n-1);
//   symmetric: permutations of {0..n-1} in lexicographic order, with
//     product (sigma tau)(x) = sigma(tau(x));
//   quaternion8: {1, -1, i, -i, j, -j, k, -k}.
CompactGroupPtr build_cyclic(int n);
CompactGroupPtr build_dihedral(int n);
CompactGroupPtr build_symmetric(int n);  // n <= 5
CompactGroupPtr build_quaternion8();
CompactGroupPtr build_from_cayley(int order, const std::vector<int>& table,
                                  const std::string& name = "cayley");
// Direct product of two finite groups as one finite group; element
// (a, b) gets index a * b_order + b.
CompactGroupPtr build_finite_product(const CompactGroupPtr& a,
                                     const CompactGroupPtr& b);

CompactGroupPtr build_u1(int nodes);
CompactGroupPtr build_su2(int alpha_nodes, int beta_nodes, int gamma_nodes);
CompactGroupPtr build_product(std::vector<CompactGroupPtr> factors);

// Memoization key: finite index, or coordinates quantized on a 1e-12 grid
// after canonical reduction (SU(2) keeps the quaternion sign).
void append_quantized_key(const CompactGroup& g, const GroupElement& e,
                          std::vector<std::int64_t>& out);

// Equality after quantization; used for node-closure checks.
bool same_element(const CompactGroup& g, const GroupElement& a,
                  const GroupElement& b, double tol = 1e-12);

}  // namespace corec
