#include "corec/groups.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace corec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double reduce_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

void check_finite_element(const CompactGroup& g, const GroupElement& e,
                          const char* op) {
  if (!e.is_finite || e.index < 0 || e.index >= g.order) {
    std::ostringstream os;
    os << op << ": element does not belong to finite group '" << g.name << "'";
    throw KindMismatchError(os.str());
  }
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// Legendre recurrence (deterministic).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double kahan_total(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double t : v) {
    const double y = t - c;
    const double u = s + y;
    c = (u - s) - y;
    s = u;
  }
  return s;
}

// Quaternion product, convention q = w + xi + yj + zk.
std::array<double, 4> quat_mul(const std::array<double, 4>& a,
                               const std::array<double, 4>& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

GroupElement quat_element(const std::array<double, 4>& q) {
  return GroupElement::quaternion(q[0], q[1], q[2], q[3]);
}

std::array<double, 4> quat_of(const GroupElement& e) {
  return {e.coords[0], e.coords[1], e.coords[2], e.coords[3]};
}

// Splits a product-group element into per-factor elements.
std::vector<GroupElement> split_product(const CompactGroup& g,
                                        const GroupElement& e) {
  if (e.is_finite || e.coords.size() != g.coord_width()) {
    throw KindMismatchError("element does not belong to product group '" +
                            g.name + "'");
  }
  std::vector<GroupElement> parts;
  std::size_t pos = 0;
  for (const auto& f : g.factors) {
    const std::size_t w = f->coord_width();
    if (f->kind == CompactGroup::Kind::Finite) {
      const double raw = e.coords[pos];
      const long idx = std::lround(raw);
      if (std::abs(raw - double(idx)) > 1e-9) {
        throw KindMismatchError("non-integral finite slot in product element");
      }
      parts.push_back(GroupElement::finite(idx));
    } else if (f->kind == CompactGroup::Kind::U1) {
      parts.push_back(GroupElement::angle(e.coords[pos]));
    } else if (f->kind == CompactGroup::Kind::SU2) {
      parts.push_back(GroupElement::quaternion(e.coords[pos], e.coords[pos + 1],
                                               e.coords[pos + 2],
                                               e.coords[pos + 3]));
    } else {
      GroupElement sub;
      sub.is_finite = false;
      sub.coords.assign(e.coords.begin() + pos, e.coords.begin() + pos + w);
      parts.push_back(std::move(sub));
    }
    pos += w;
  }
  return parts;
}

GroupElement join_product(const CompactGroup& g,
                          const std::vector<GroupElement>& parts) {
  GroupElement out;
  out.is_finite = false;
  out.coords.reserve(g.coord_width());
  for (const auto& p : parts) {
    if (p.is_finite) {
      out.coords.push_back(double(p.index));
    } else {
      out.coords.insert(out.coords.end(), p.coords.begin(), p.coords.end());
    }
  }
  return out;
}

void verify_cayley(const CompactGroup& g) {
  const int n = g.order;
  if (n <= 0 || int(g.cayley.size()) != n * n) {
    throw GroupAxiomError("Cayley table has wrong size for order " +
                          std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = g.cayley_at(i, j);
      if (v < 0 || v >= n) {
        std::ostringstream os;
        os << "closure violated at (" << i << "," << j << "): entry " << v;
        throw GroupAxiomError(os.str());
      }
    }
  }
  int e = -1;
  for (int c = 0; c < n; ++c) {
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (g.cayley_at(c, j) != j || g.cayley_at(j, c) != j) {
        ok = false;
        break;
      }
    }
    if (ok) {
      e = c;
      break;
    }
  }
  if (e < 0) throw GroupAxiomError("no identity element in Cayley table");
  if (e != g.identity_index) {
    throw GroupAxiomError("identity index mismatch in Cayley table");
  }
  for (int i = 0; i < n; ++i) {
    const int inv = g.inverse[i];
    if (inv < 0 || inv >= n || g.cayley_at(i, inv) != e ||
        g.cayley_at(inv, i) != e) {
      std::ostringstream os;
      os << "element " << i << " has no two-sided inverse";
      throw GroupAxiomError(os.str());
    }
  }
  // Associativity, exhaustive for desk-scale orders.
  if (n <= 256) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const int ab = g.cayley_at(a, b);
        for (int c = 0; c < n; ++c) {
          if (g.cayley_at(ab, c) != g.cayley_at(a, g.cayley_at(b, c))) {
            std::ostringstream os;
            os << "associativity fails at triple (" << a << "," << b << ","
               << c << ")";
            throw GroupAxiomError(os.str());
          }
        }
      }
    }
  }
}

CompactGroupPtr finish_finite(CompactGroup g) {
  const int n = g.order;
  int e = -1;
  for (int c = 0; c < n && e < 0; ++c) {
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (g.cayley_at(c, j) != j || g.cayley_at(j, c) != j) {
        ok = false;
        break;
      }
    }
    if (ok) e = c;
  }
  if (e < 0) throw GroupAxiomError("no identity element in Cayley table");
  g.identity_index = e;
  g.inverse.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.cayley_at(i, j) == e && g.cayley_at(j, i) == e) {
        g.inverse[i] = j;
        break;
      }
    }
    if (g.inverse[i] < 0) {
      throw GroupAxiomError("element " + std::to_string(i) +
                            " has no two-sided inverse");
    }
  }
  verify_cayley(g);
  return std::make_shared<const CompactGroup>(std::move(g));
}

}  // namespace

GroupElement GroupElement::finite(long i) {
  GroupElement e;
  e.is_finite = true;
  e.index = i;
  return e;
}

GroupElement GroupElement::angle(double theta) {
  GroupElement e;
  e.is_finite = false;
  e.coords = {reduce_angle(theta)};
  return e;
}

GroupElement GroupElement::quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-9)) {
    throw PreconditionError("quaternion norm too small to normalize");
  }
  GroupElement e;
  e.is_finite = false;
  e.coords = {w / n, x / n, y / n, z / n};
  return e;
}

GroupElement GroupElement::concat(const std::vector<GroupElement>& parts) {
  GroupElement out;
  out.is_finite = false;
  for (const auto& p : parts) {
    if (p.is_finite) {
      out.coords.push_back(double(p.index));
    } else {
      out.coords.insert(out.coords.end(), p.coords.begin(), p.coords.end());
    }
  }
  return out;
}

std::size_t CompactGroup::coord_width() const {
  switch (kind) {
    case Kind::Finite:
      return 1;
    case Kind::U1:
      return 1;
    case Kind::SU2:
      return 4;
    case Kind::Product: {
      std::size_t w = 0;
      for (const auto& f : factors) w += f->coord_width();
      return w;
    }
  }
  return 0;
}

GroupElement group_mul(const CompactGroup& g, const GroupElement& s,
                       const GroupElement& t) {
  switch (g.kind) {
    case CompactGroup::Kind::Finite:
      check_finite_element(g, s, "group_mul");
      check_finite_element(g, t, "group_mul");
      return GroupElement::finite(g.cayley_at(int(s.index), int(t.index)));
    case CompactGroup::Kind::U1:
      if (s.is_finite || t.is_finite || s.coords.size() != 1 ||
          t.coords.size() != 1) {
        throw KindMismatchError("group_mul: expected U(1) elements");
      }
      return GroupElement::angle(s.coords[0] + t.coords[0]);
    case CompactGroup::Kind::SU2:
      if (s.is_finite || t.is_finite || s.coords.size() != 4 ||
          t.coords.size() != 4) {
        throw KindMismatchError("group_mul: expected SU(2) elements");
      }
      return quat_element(quat_mul(quat_of(s), quat_of(t)));
    case CompactGroup::Kind::Product: {
      auto sp = split_product(g, s);
      auto tp = split_product(g, t);
      std::vector<GroupElement> out;
      out.reserve(sp.size());
      for (std::size_t i = 0; i < g.factors.size(); ++i) {
        out.push_back(group_mul(*g.factors[i], sp[i], tp[i]));
      }
      return join_product(g, out);
    }
  }
  throw KindMismatchError("group_mul: unknown group kind");
}

GroupElement group_inv(const CompactGroup& g, const GroupElement& s) {
  switch (g.kind) {
    case CompactGroup::Kind::Finite:
      check_finite_element(g, s, "group_inv");
      return GroupElement::finite(g.inverse[std::size_t(s.index)]);
    case CompactGroup::Kind::U1:
      if (s.is_finite || s.coords.size() != 1) {
        throw KindMismatchError("group_inv: expected U(1) element");
      }
      return GroupElement::angle(-s.coords[0]);
    case CompactGroup::Kind::SU2:
      if (s.is_finite || s.coords.size() != 4) {
        throw KindMismatchError("group_inv: expected SU(2) element");
      }
      return GroupElement::quaternion(s.coords[0], -s.coords[1], -s.coords[2],
                                      -s.coords[3]);
    case CompactGroup::Kind::Product: {
      auto sp = split_product(g, s);
      std::vector<GroupElement> out;
      out.reserve(sp.size());
      for (std::size_t i = 0; i < g.factors.size(); ++i) {
        out.push_back(group_inv(*g.factors[i], sp[i]));
      }
      return join_product(g, out);
    }
  }
  throw KindMismatchError("group_inv: unknown group kind");
}

GroupElement identity_of(const CompactGroup& g) {
  switch (g.kind) {
    case CompactGroup::Kind::Finite:
      return GroupElement::finite(g.identity_index);
    case CompactGroup::Kind::U1:
      return GroupElement::angle(0.0);
    case CompactGroup::Kind::SU2:
      return GroupElement::quaternion(1.0, 0.0, 0.0, 0.0);
    case CompactGroup::Kind::Product: {
      std::vector<GroupElement> out;
      for (const auto& f : g.factors) out.push_back(identity_of(*f));
      return join_product(g, out);
    }
  }
  throw KindMismatchError("identity_of: unknown group kind");
}

HaarScheme haar_scheme(const CompactGroup& g) {
  HaarScheme scheme;
  switch (g.kind) {
    case CompactGroup::Kind::Finite: {
      const double w = 1.0 / double(g.order);
      for (int i = 0; i < g.order; ++i) {
        scheme.nodes.push_back({GroupElement::finite(i), w});
      }
      return scheme;
    }
    case CompactGroup::Kind::U1: {
      const int n = g.u1_nodes;
      const double w = 1.0 / double(n);
      for (int k = 0; k < n; ++k) {
        scheme.nodes.push_back({GroupElement::angle(kTwoPi * k / n), w});
      }
      return scheme;
    }
    case CompactGroup::Kind::SU2: {
      // Euler-angle product scheme for the sin(beta) Haar density:
      // trapezoid in alpha over [0,2pi) and in gamma over [0,4pi) (the
      // double cover, so half-integer-spin coefficients integrate to
      // zero exactly), Gauss-Legendre in beta over [0,pi]. Weights
      // renormalized to sum exactly to 1. gamma_nodes = 2*alpha_nodes
      // with even alpha_nodes keeps the node set closed under inversion.
      const int na = g.su2_alpha_nodes;
      const int nb = g.su2_beta_nodes;
      const int ng = g.su2_gamma_nodes;
      std::vector<double> bx, bw;
      gauss_legendre(nb, bx, bw);
      std::vector<double> beta(nb), braw(nb);
      for (int j = 0; j < nb; ++j) {
        beta[j] = 0.5 * M_PI * (bx[j] + 1.0);
        braw[j] = bw[j] * std::sin(beta[j]);
      }
      const double bz = kahan_total(braw);
      for (int ia = 0; ia < na; ++ia) {
        const double alpha = kTwoPi * ia / na;
        const std::array<double, 4> qa = {std::cos(alpha / 2), 0.0, 0.0,
                                          std::sin(alpha / 2)};
        for (int j = 0; j < nb; ++j) {
          const std::array<double, 4> qb = {std::cos(beta[j] / 2), 0.0,
                                            std::sin(beta[j] / 2), 0.0};
          const std::array<double, 4> qab = quat_mul(qa, qb);
          const double wj = braw[j] / (bz * double(na) * double(ng));
          for (int ig = 0; ig < ng; ++ig) {
            const double gamma = 2.0 * kTwoPi * ig / ng;
            const std::array<double, 4> qg = {std::cos(gamma / 2), 0.0, 0.0,
                                              std::sin(gamma / 2)};
            scheme.nodes.push_back({quat_element(quat_mul(qab, qg)), wj});
          }
        }
      }
      return scheme;
    }
    case CompactGroup::Kind::Product: {
      std::vector<HaarScheme> parts;
      for (const auto& f : g.factors) parts.push_back(haar_scheme(*f));
      std::vector<std::size_t> idx(parts.size(), 0);
      while (true) {
        std::vector<GroupElement> elems;
        double w = 1.0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          elems.push_back(parts[i].nodes[idx[i]].point);
          w *= parts[i].nodes[idx[i]].weight;
        }
        scheme.nodes.push_back({join_product(g, elems), w});
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == parts[i].nodes.size()) {
          idx[i] = 0;
          ++i;
        }
        if (i == idx.size()) break;
      }
      return scheme;
    }
  }
  throw KindMismatchError("haar_scheme: unknown group kind");
}

CompactGroupPtr build_cyclic(int n) {
  if (n < 1) throw PreconditionError("build_cyclic: n must be positive");
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = "C" + std::to_string(n);
  g.order = n;
  g.cayley.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.cayley[std::size_t(i) * n + j] = (i + j) % n;
  return finish_finite(std::move(g));
}

CompactGroupPtr build_dihedral(int n) {
  if (n < 1) throw PreconditionError("build_dihedral: n must be positive");
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = "D" + std::to_string(n);
  g.order = 2 * n;
  g.cayley.resize(std::size_t(2 * n) * (2 * n));
  auto idx = [n](int flip, int rot) { return flip * n + ((rot % n + n) % n); };
  for (int f1 = 0; f1 < 2; ++f1) {
    for (int a = 0; a < n; ++a) {
      for (int f2 = 0; f2 < 2; ++f2) {
        for (int b = 0; b < n; ++b) {
          // (s^f1 r^a)(s^f2 r^b) = s^(f1 xor f2) r^(a(-1)^f2 + b)
          const int rot = (f2 ? -a : a) + b;
          g.cayley[std::size_t(idx(f1, a)) * (2 * n) + idx(f2, b)] =
              idx(f1 ^ f2, rot);
        }
      }
    }
  }
  return finish_finite(std::move(g));
}

CompactGroupPtr build_symmetric(int n) {
  if (n < 1 || n > 5) {
    throw PreconditionError("build_symmetric: n must be in 1..5");
  }
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  std::map<std::vector<int>, int> rank;
  for (std::size_t i = 0; i < perms.size(); ++i) rank[perms[i]] = int(i);
  const int ord = int(perms.size());
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = "S" + std::to_string(n);
  g.order = ord;
  g.cayley.resize(std::size_t(ord) * ord);
  for (int i = 0; i < ord; ++i) {
    for (int j = 0; j < ord; ++j) {
      // (sigma tau)(x) = sigma(tau(x))
      std::vector<int> comp(n);
      for (int x = 0; x < n; ++x) comp[x] = perms[i][perms[j][x]];
      g.cayley[std::size_t(i) * ord + j] = rank[comp];
    }
  }
  return finish_finite(std::move(g));
}

CompactGroupPtr build_quaternion8() {
  // Ordering {1, -1, i, -i, j, -j, k, -k}: index 2u + s with unit
  // u in {1,i,j,k} and sign bit s.
  auto mul_unit = [](int a, int b, int& sign) {
    static const int unit[4][4] = {
        {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const int sg[4][4] = {{+1, +1, +1, +1},
                                 {+1, -1, +1, -1},
                                 {+1, -1, -1, +1},
                                 {+1, +1, -1, -1}};
    sign = sg[a][b];
    return unit[a][b];
  };
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = "Q8";
  g.order = 8;
  g.cayley.resize(64);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const int ua = i / 2, sa = i % 2 ? -1 : 1;
      const int ub = j / 2, sb = j % 2 ? -1 : 1;
      int sign;
      const int uc = mul_unit(ua, ub, sign);
      const int sc = sa * sb * sign;
      g.cayley[std::size_t(i) * 8 + j] = 2 * uc + (sc < 0 ? 1 : 0);
    }
  }
  return finish_finite(std::move(g));
}

CompactGroupPtr build_from_cayley(int order, const std::vector<int>& table,
                                  const std::string& name) {
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = name;
  g.order = order;
  g.cayley = table;
  return finish_finite(std::move(g));
}

CompactGroupPtr build_finite_product(const CompactGroupPtr& a,
                                     const CompactGroupPtr& b) {
  if (a->kind != CompactGroup::Kind::Finite ||
      b->kind != CompactGroup::Kind::Finite) {
    throw PreconditionError("build_finite_product: both factors must be finite");
  }
  const int na = a->order, nb = b->order, n = na * nb;
  CompactGroup g;
  g.kind = CompactGroup::Kind::Finite;
  g.name = a->name + "x" + b->name;
  g.order = n;
  g.cayley.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    const int ia = i / nb, ib = i % nb;
    for (int j = 0; j < n; ++j) {
      const int ja = j / nb, jb = j % nb;
      g.cayley[std::size_t(i) * n + j] =
          a->cayley_at(ia, ja) * nb + b->cayley_at(ib, jb);
    }
  }
  return finish_finite(std::move(g));
}

CompactGroupPtr build_u1(int nodes) {
  if (nodes < 2) throw PreconditionError("build_u1: need at least 2 nodes");
  CompactGroup g;
  g.kind = CompactGroup::Kind::U1;
  g.name = "U1";
  g.u1_nodes = nodes;
  return std::make_shared<const CompactGroup>(std::move(g));
}

CompactGroupPtr build_su2(int alpha_nodes, int beta_nodes, int gamma_nodes) {
  if (alpha_nodes < 2 || beta_nodes < 2 || gamma_nodes < 2) {
    throw PreconditionError("build_su2: node counts must be >= 2");
  }
  if (alpha_nodes % 2 != 0 || gamma_nodes != 2 * alpha_nodes) {
    throw PreconditionError(
        "build_su2: need even alpha_nodes and gamma_nodes = 2*alpha_nodes "
        "for inversion-closed nodes");
  }
  CompactGroup g;
  g.kind = CompactGroup::Kind::SU2;
  g.name = "SU2";
  g.su2_alpha_nodes = alpha_nodes;
  g.su2_beta_nodes = beta_nodes;
  g.su2_gamma_nodes = gamma_nodes;
  return std::make_shared<const CompactGroup>(std::move(g));
}

CompactGroupPtr build_product(std::vector<CompactGroupPtr> factors) {
  if (factors.empty()) {
    throw PreconditionError("build_product: need at least one factor");
  }
  CompactGroup g;
  g.kind = CompactGroup::Kind::Product;
  g.name = "product";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    g.name += (i ? "x" : ":") + factors[i]->name;
  }
  g.factors = std::move(factors);
  return std::make_shared<const CompactGroup>(std::move(g));
}

void append_quantized_key(const CompactGroup& g, const GroupElement& e,
                          std::vector<std::int64_t>& out) {
  switch (g.kind) {
    case CompactGroup::Kind::Finite:
      check_finite_element(g, e, "append_quantized_key");
      out.push_back(e.index);
      return;
    case CompactGroup::Kind::U1:
    case CompactGroup::Kind::SU2:
      for (double c : e.coords) out.push_back(std::llround(c * 1e12));
      return;
    case CompactGroup::Kind::Product: {
      auto parts = split_product(g, e);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        append_quantized_key(*g.factors[i], parts[i], out);
      }
      return;
    }
  }
}

bool same_element(const CompactGroup& g, const GroupElement& a,
                  const GroupElement& b, double tol) {
  if (g.kind == CompactGroup::Kind::Finite) {
    return a.is_finite && b.is_finite && a.index == b.index;
  }
  if (a.is_finite != b.is_finite || a.coords.size() != b.coords.size()) {
    return false;
  }
  if (g.kind == CompactGroup::Kind::U1) {
    double d = std::abs(reduce_angle(a.coords[0]) - reduce_angle(b.coords[0]));
    d = std::min(d, kTwoPi - d);
    return d <= tol;
  }
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    if (std::abs(a.coords[i] - b.coords[i]) > tol) return false;
  }
  return true;
}

}  // namespace corec
