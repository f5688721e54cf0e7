#include "corec/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace corec {

namespace {

bool finite(const cxd& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

Field join(Field a, Field b) {
  return (a == Field::Real && b == Field::Real) ? Field::Real : Field::Complex;
}

void require_square(const Matrix& a, const char* op) {
  if (!a.square()) {
    std::ostringstream os;
    os << op << ": matrix must be square, got " << a.rows() << "x" << a.cols();
    throw DimensionError(os.str());
  }
}

constexpr double kPivotFloor = 1e-300;

// LU factorization with partial pivoting, in place. perm holds the row
// order; sign is unused here but kept implicit in the permutation.
struct Lu {
  Matrix f;
  std::vector<std::size_t> perm;
};

Lu lu_factor(const Matrix& a) {
  require_square(a, "lu_factor");
  const std::size_t n = a.rows();
  Lu lu{a, {}};
  lu.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) lu.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu.f.at(lu.perm[k], k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu.f.at(lu.perm[i], k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kPivotFloor) {
      std::ostringstream os;
      os << "singular matrix: pivot " << k << " has magnitude " << best;
      throw SingularMatrixError(os.str(), static_cast<int>(k));
    }
    std::swap(lu.perm[k], lu.perm[piv]);
    const std::size_t rk = lu.perm[k];
    const cxd pivot = lu.f.at(rk, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::size_t ri = lu.perm[i];
      const cxd m = lu.f.at(ri, k) / pivot;
      lu.f.at(ri, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) {
        lu.f.at(ri, j) -= m * lu.f.at(rk, j);
      }
    }
  }
  return lu;
}

Matrix lu_apply(const Lu& lu, const Matrix& b, Field field) {
  const std::size_t n = lu.f.rows();
  const std::size_t m = b.cols();
  Matrix x(n, m, field);
  for (std::size_t col = 0; col < m; ++col) {
    std::vector<cxd> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      cxd s = b.at(lu.perm[i], col);
      for (std::size_t j = 0; j < i; ++j) s -= lu.f.at(lu.perm[i], j) * y[j];
      y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      cxd s = y[ii];
      for (std::size_t j = ii + 1; j < n; ++j)
        s -= lu.f.at(lu.perm[ii], j) * x.at(j, col);
      x.at(ii, col) = s / lu.f.at(lu.perm[ii], ii);
    }
  }
  return x;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, Field field)
    : rows_(rows), cols_(cols), field_(field), entries_(rows * cols, cxd(0.0, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<cxd> entries,
               Field field)
    : rows_(rows), cols_(cols), field_(field), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("entry array length does not match rows*cols");
  }
  check_finite("Matrix construction");
}

void Matrix::check_finite(const char* context) const {
  for (const cxd& z : entries_) {
    if (!finite(z)) {
      throw PreconditionError(std::string(context) + ": non-finite entry");
    }
  }
}

Matrix Matrix::identity(std::size_t n, Field field) {
  Matrix m(n, n, field);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix m(r, c, Field::Real);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged row in matrix literal");
    std::size_t j = 0;
    for (double v : row) m.at(i, j++) = v;
    ++i;
  }
  m.check_finite("Matrix literal");
  return m;
}

Matrix Matrix::from_rows_complex(std::initializer_list<std::initializer_list<cxd>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix m(r, c, Field::Complex);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged row in matrix literal");
    std::size_t j = 0;
    for (const cxd& v : row) m.at(i, j++) = v;
    ++i;
  }
  m.check_finite("Matrix literal");
  return m;
}

Matrix Matrix::column(const std::vector<double>& values) {
  Matrix m(values.size(), 1, Field::Real);
  for (std::size_t i = 0; i < values.size(); ++i) m.at(i, 0) = values[i];
  m.check_finite("Matrix column");
  return m;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "mat_mul: inner dimensions differ (" << a.rows() << "x" << a.cols()
       << " times " << b.rows() << "x" << b.cols() << ")";
    throw DimensionError(os.str());
  }
  Matrix c(a.rows(), b.cols(), join(a.field(), b.field()));
  // Row-major, left-to-right summation: bit-stable for a given platform.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cxd s(0.0, 0.0);
      for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  }
  return c;
}

Matrix mat_add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("mat_add: shape mismatch");
  }
  Matrix c(a.rows(), a.cols(), join(a.field(), b.field()));
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
    c.at(i / a.cols(), i % a.cols()) =
        a.at(i / a.cols(), i % a.cols()) + b.at(i / a.cols(), i % a.cols());
  }
  return c;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("mat_sub: shape mismatch");
  }
  Matrix c(a.rows(), a.cols(), join(a.field(), b.field()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j) - b.at(i, j);
  return c;
}

Matrix mat_scale(const Matrix& a, cxd factor) {
  Field f = (a.is_real() && factor.imag() == 0.0) ? Field::Real : Field::Complex;
  Matrix c(a.rows(), a.cols(), f);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = factor * a.at(i, j);
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix c(a.cols(), a.rows(), a.field());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(j, i) = a.at(i, j);
  return c;
}

Matrix adjoint(const Matrix& a) {
  Matrix c(a.cols(), a.rows(), a.field());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(j, i) = std::conj(a.at(i, j));
  return c;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  return mat_sub(mat_mul(a, b), mat_mul(b, a));
}

Matrix lu_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("lu_solve: shape mismatch");
  Lu lu = lu_factor(a);
  return lu_apply(lu, b, join(a.field(), b.field()));
}

Matrix mat_inv(const Matrix& a) {
  require_square(a, "mat_inv");
  return lu_solve(a, Matrix::identity(a.rows(), a.field()));
}

double norm_one(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a.at(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      best = std::max(best, std::abs(a.at(i, j) - b.at(i, j)));
  return best;
}

namespace {

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a.at(i, j));
  return std::sqrt(s);
}

}  // namespace

double op_norm(const Matrix& a, NormKind kind) {
  if (kind == NormKind::Frobenius) return frobenius(a);
  const double scale = frobenius(a);
  if (scale == 0.0) return 0.0;
  const std::size_t n = a.cols();
  // Largest eigenvalue of the Hermitian PSD Gram matrix a*a via the QR
  // spectrum. Power iteration stalls badly on the near-degenerate
  // singular pairs that near-identity unitary deviations produce, so the
  // Gram spectrum is computed directly; scaling keeps it well
  // conditioned.
  Matrix b(n, n, Field::Complex);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cxd s(0, 0);
      for (std::size_t k = 0; k < a.rows(); ++k) {
        s += std::conj(a.at(k, i) / scale) * (a.at(k, j) / scale);
      }
      b.at(i, j) = s;
    }
  }
  double lam = 0.0;
  for (const cxd& ev : eigenvalues(b)) lam = std::max(lam, ev.real());
  return scale * std::sqrt(std::max(lam, 0.0));
}

Matrix expm(const Matrix& x) {
  require_square(x, "expm");
  const double n1 = norm_one(x);
  if (n1 > 1e3) {
    throw PreconditionError("expm: norm exceeds 1e3, outside supported range");
  }
  const std::size_t n = x.rows();
  const double theta = 0.5;
  int s = 0;
  if (n1 > theta) {
    s = static_cast<int>(std::ceil(std::log2(n1 / theta)));
    s = std::max(s, 0);
  }
  Matrix a = mat_scale(x, std::ldexp(1.0, -s));

  // Degree-13 diagonal Pade coefficients.
  static const std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};

  const Matrix id = Matrix::identity(n, a.field());
  const Matrix a2 = mat_mul(a, a);
  const Matrix a4 = mat_mul(a2, a2);
  const Matrix a6 = mat_mul(a2, a4);

  Matrix u_inner = mat_add(mat_add(mat_scale(a6, b[13]), mat_scale(a4, b[11])),
                           mat_scale(a2, b[9]));
  Matrix u = mat_mul(a6, u_inner);
  u = mat_add(u, mat_scale(a6, b[7]));
  u = mat_add(u, mat_scale(a4, b[5]));
  u = mat_add(u, mat_scale(a2, b[3]));
  u = mat_add(u, mat_scale(id, b[1]));
  u = mat_mul(a, u);

  Matrix v_inner = mat_add(mat_add(mat_scale(a6, b[12]), mat_scale(a4, b[10])),
                           mat_scale(a2, b[8]));
  Matrix v = mat_mul(a6, v_inner);
  v = mat_add(v, mat_scale(a6, b[6]));
  v = mat_add(v, mat_scale(a4, b[4]));
  v = mat_add(v, mat_scale(a2, b[2]));
  v = mat_add(v, mat_scale(id, b[0]));

  Matrix num = mat_add(v, u);
  Matrix den = mat_sub(v, u);
  Matrix r = lu_solve(den, num);
  for (int k = 0; k < s; ++k) r = mat_mul(r, r);
  r.check_finite("expm");
  return r;
}

Matrix sqrtm_db(const Matrix& a) {
  require_square(a, "sqrtm_db");
  Matrix y = a;
  Matrix z = Matrix::identity(a.rows(), a.field());
  for (int it = 0; it < 50; ++it) {
    Matrix zi = mat_inv(z);
    Matrix yi = mat_inv(y);
    Matrix yn = mat_scale(mat_add(y, zi), 0.5);
    Matrix zn = mat_scale(mat_add(z, yi), 0.5);
    const double step = frobenius(mat_sub(yn, y));
    y = std::move(yn);
    z = std::move(zn);
    if (step <= 1e-14 * frobenius(y)) break;
  }
  return y;
}

namespace {

// Gauss-Legendre order 7 on [0,1]; yields the degree-7 diagonal Pade
// approximant of log(1+z) via the partial-fraction form
//   r(z) = sum_i w_i z (I + x_i z)^(-1).
struct Gl7 {
  std::array<double, 7> x;
  std::array<double, 7> w;
};

Gl7 gl7_unit() {
  static const std::array<double, 7> xi = {
      -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
      0.0,
      0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
  static const std::array<double, 7> wi = {
      0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
      0.4179591836734694,
      0.3818300505051189, 0.2797053914892766, 0.1294849661688697};
  Gl7 g{};
  for (int i = 0; i < 7; ++i) {
    g.x[i] = 0.5 * (xi[i] + 1.0);
    g.w[i] = 0.5 * wi[i];
  }
  return g;
}

}  // namespace

std::vector<cxd> eigenvalues(const Matrix& a) {
  require_square(a, "eigenvalues");
  const std::size_t n = a.rows();
  std::vector<cxd> eig(n);
  if (n == 0) return eig;
  if (n == 1) {
    eig[0] = a.at(0, 0);
    return eig;
  }

  // Work on a complex copy h.
  Matrix h(n, n, Field::Complex);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h.at(i, j) = a.at(i, j);

  // Householder reduction to upper Hessenberg form.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    std::vector<cxd> v(n - k - 1);
    double xnorm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = h.at(k + 1 + i, k);
      xnorm += std::norm(v[i]);
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    cxd phase = (std::abs(v[0]) > 0.0) ? v[0] / std::abs(v[0]) : cxd(1.0, 0.0);
    v[0] += phase * xnorm;
    double vsq = 0.0;
    for (const cxd& z : v) vsq += std::norm(z);
    if (vsq == 0.0) continue;
    const double beta = 2.0 / vsq;
    // Left: rows k+1..n-1.
    for (std::size_t j = 0; j < n; ++j) {
      cxd t(0, 0);
      for (std::size_t i = 0; i < v.size(); ++i)
        t += std::conj(v[i]) * h.at(k + 1 + i, j);
      t *= beta;
      for (std::size_t i = 0; i < v.size(); ++i) h.at(k + 1 + i, j) -= v[i] * t;
    }
    // Right: columns k+1..n-1.
    for (std::size_t i = 0; i < n; ++i) {
      cxd t(0, 0);
      for (std::size_t j = 0; j < v.size(); ++j) t += h.at(i, k + 1 + j) * v[j];
      t *= beta;
      for (std::size_t j = 0; j < v.size(); ++j)
        h.at(i, k + 1 + j) -= t * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h.at(i, k) = cxd(0, 0);
  }

  // Shifted QR iteration with complex Givens rotations.
  auto givens = [](cxd f, cxd g, double& c, cxd& s) {
    if (g == cxd(0, 0)) {
      c = 1.0;
      s = cxd(0, 0);
      return;
    }
    if (f == cxd(0, 0)) {
      c = 0.0;
      s = std::conj(g) / std::abs(g);
      return;
    }
    const double d = std::sqrt(std::norm(f) + std::norm(g));
    c = std::abs(f) / d;
    s = (f / std::abs(f)) * std::conj(g) / d;
  };
  auto rot_left = [&](std::size_t k, double c, cxd s) {
    for (std::size_t j = 0; j < n; ++j) {
      const cxd t1 = h.at(k, j);
      const cxd t2 = h.at(k + 1, j);
      h.at(k, j) = c * t1 + s * t2;
      h.at(k + 1, j) = -std::conj(s) * t1 + c * t2;
    }
  };
  auto rot_right = [&](std::size_t k, double c, cxd s) {
    for (std::size_t i = 0; i < n; ++i) {
      const cxd t1 = h.at(i, k);
      const cxd t2 = h.at(i, k + 1);
      h.at(i, k) = c * t1 + std::conj(s) * t2;
      h.at(i, k + 1) = -s * t1 + c * t2;
    }
  };

  std::size_t hi = n - 1;
  int stall = 0;
  int total = 0;
  const int total_cap = 400 * static_cast<int>(n);
  while (true) {
    // Deflate converged subdiagonals.
    while (hi > 0) {
      const double sub = std::abs(h.at(hi, hi - 1));
      const double scale =
          std::abs(h.at(hi - 1, hi - 1)) + std::abs(h.at(hi, hi));
      if (sub <= 1e-15 * scale + kPivotFloor) {
        h.at(hi, hi - 1) = cxd(0, 0);
        --hi;
        stall = 0;
      } else {
        break;
      }
    }
    if (hi == 0) break;
    if (++total > total_cap) {
      std::ostringstream os;
      os << "eigenvalues: QR iteration failed to converge on";
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          os << " " << a.at(i, j).real() << (a.at(i, j).imag() < 0 ? "-" : "+")
             << std::abs(a.at(i, j).imag()) << "i";
      throw Error(os.str());
    }

    // Active block [lo..hi].
    std::size_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h.at(lo, lo - 1));
      const double scale =
          std::abs(h.at(lo - 1, lo - 1)) + std::abs(h.at(lo, lo));
      if (sub <= 1e-15 * scale + kPivotFloor) {
        h.at(lo, lo - 1) = cxd(0, 0);
        break;
      }
      --lo;
    }

    // Wilkinson shift: the trailing-2x2 eigenvalue closer to the corner
    // entry, in the cancellation-free form (the naive tr^2 - 4 det
    // discriminant loses the tiny splitting of near-scalar blocks and
    // stalls the iteration).
    const cxd aa = h.at(hi - 1, hi - 1);
    const cxd bb = h.at(hi - 1, hi);
    const cxd cc = h.at(hi, hi - 1);
    const cxd dd = h.at(hi, hi);
    cxd mu = dd;
    const cxd bc = bb * cc;
    if (bc != cxd(0, 0)) {
      const cxd x = 0.5 * (aa - dd);
      cxd y = std::sqrt(x * x + bc);
      if (x.real() * y.real() + x.imag() * y.imag() < 0.0) y = -y;
      mu = dd - bc / (x + y);
    }
    if (++stall > 12) {
      mu = dd + 0.75 * std::abs(h.at(hi, hi - 1));
      stall = 0;
    }

    cxd x = h.at(lo, lo) - mu;
    cxd y = h.at(lo + 1, lo);
    for (std::size_t k = lo; k < hi; ++k) {
      double c;
      cxd s;
      givens(x, y, c, s);
      rot_left(k, c, s);
      rot_right(k, c, s);
      if (k + 1 < hi) {
        x = h.at(k + 1, k);
        y = h.at(k + 2, k);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) eig[i] = h.at(i, i);
  std::sort(eig.begin(), eig.end(), [](const cxd& p, const cxd& q) {
    if (p.real() != q.real()) return p.real() < q.real();
    return p.imag() < q.imag();
  });
  return eig;
}

Matrix logm(const Matrix& u) {
  require_square(u, "logm");
  const std::size_t n = u.rows();
  const Matrix id = Matrix::identity(n, u.field());

  const double dist_to_id = op_norm(mat_sub(u, id), NormKind::Spectral);
  if (dist_to_id >= 1.0) {
    // ||u - I|| < 1 already forces the spectrum into the right half
    // plane; otherwise inspect the spectrum directly.
    const std::vector<cxd> eig = eigenvalues(u);
    for (const cxd& lam : eig) {
      if (std::abs(lam) <= 1e-12) {
        throw BranchCutError(
            "logm: matrix is singular within tolerance, no principal branch");
      }
      if (std::abs(lam.imag()) <= 1e-12 && lam.real() <= 1e-12) {
        std::ostringstream os;
        os << "logm: eigenvalue " << lam.real() << "+" << lam.imag()
           << "i lies on the closed negative real axis";
        throw BranchCutError(os.str());
      }
    }
  }

  Matrix y = u;
  int k = 0;
  while (op_norm(mat_sub(y, id), NormKind::Spectral) > 0.25) {
    if (++k > 60) throw Error("logm: square-root scaling failed to contract");
    y = sqrtm_db(y);
  }

  const Matrix z = mat_sub(y, id);
  const Gl7 g = gl7_unit();
  Matrix r(n, n, z.field());
  for (int i = 0; i < 7; ++i) {
    Matrix den = mat_add(id, mat_scale(z, g.x[i]));
    Matrix term = lu_solve(den, z);  // (I + x_i z)^(-1) z
    r = mat_add(r, mat_scale(term, g.w[i]));
  }
  Matrix out = mat_scale(r, std::ldexp(1.0, k));
  out.check_finite("logm");
  return out;
}

Matrix bch4(const Matrix& a, const Matrix& b) {
  require_square(a, "bch4");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("bch4: shape mismatch");
  }
  const double na = op_norm(a, NormKind::Spectral);
  const double nb = op_norm(b, NormKind::Spectral);
  if (na + nb > 0.5) {
    throw PreconditionError("bch4: ||a|| + ||b|| exceeds 0.5");
  }
  const Matrix ab = commutator(a, b);
  const Matrix a_ab = commutator(a, ab);
  const Matrix b_ba = commutator(b, mat_scale(ab, -1.0));
  const Matrix b_a_ab = commutator(b, a_ab);
  Matrix r = mat_add(a, b);
  r = mat_add(r, mat_scale(ab, 0.5));
  r = mat_add(r, mat_scale(mat_add(a_ab, b_ba), 1.0 / 12.0));
  r = mat_add(r, mat_scale(b_a_ab, -1.0 / 24.0));
  return r;
}

}  // namespace corec
