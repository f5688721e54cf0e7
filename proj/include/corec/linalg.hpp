#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "corec/errors.hpp"

namespace corec {

using cxd = std::complex<double>;

enum class Field { Real, Complex };
enum class NormKind { Spectral, Frobenius };

// Dense row-major matrix of double-precision complex scalars. A matrix
// tagged Real keeps exactly-zero imaginary parts through all arithmetic
// (IEEE products of zero-imaginary operands stay zero-imaginary), so the
// tag is preserved rather than re-detected. All entries must be finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Field field = Field::Real);
  Matrix(std::size_t rows, std::size_t cols, std::vector<cxd> entries,
         Field field);

  static Matrix identity(std::size_t n, Field field = Field::Real);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows_complex(std::initializer_list<std::initializer_list<cxd>> rows);
  static Matrix column(const std::vector<double>& values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Field field() const { return field_; }
  bool is_real() const { return field_ == Field::Real; }
  bool square() const { return rows_ == cols_; }

  cxd& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const cxd& at(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }
  cxd& operator()(std::size_t i, std::size_t j) { return at(i, j); }
  const cxd& operator()(std::size_t i, std::size_t j) const { return at(i, j); }

  const std::vector<cxd>& entries() const { return entries_; }

  // Re-validates finiteness; throws PreconditionError on NaN/Inf.
  void check_finite(const char* context) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Field field_ = Field::Real;
  std::vector<cxd> entries_;
};

Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_scale(const Matrix& a, cxd factor);
Matrix transpose(const Matrix& a);
Matrix adjoint(const Matrix& a);
Matrix commutator(const Matrix& a, const Matrix& b);  // [a,b] = ab - ba

inline Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }
inline Matrix operator+(const Matrix& a, const Matrix& b) { return mat_add(a, b); }
inline Matrix operator-(const Matrix& a, const Matrix& b) { return mat_sub(a, b); }

// Inverse via LU with partial pivoting. Pivots below 1e-300 raise
// SingularMatrixError naming the failing pivot index.
Matrix mat_inv(const Matrix& a);

// Solves a x = b for square a (same pivoting policy as mat_inv).
Matrix lu_solve(const Matrix& a, const Matrix& b);

// Frobenius: root-sum-square of entry moduli. Spectral: largest singular
// value, computed as the square root of the top eigenvalue of the scaled
// Gram matrix a*a (QR spectrum; deterministic, accurate to ~1e-14 even
// for the near-degenerate singular pairs where power iteration stalls).
double op_norm(const Matrix& a, NormKind kind = NormKind::Spectral);

// Maximum column absolute sum; drives expm scaling.
double norm_one(const Matrix& a);

// Largest entry modulus of a - b; convenience for residual checks.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Matrix exponential: scaling and squaring with the degree-13 diagonal
// Pade approximant, theta = 0.5. Rejects ||x||_1 > 1e3.
Matrix expm(const Matrix& x);

// Principal matrix logarithm: inverse scaling and squaring. Repeated
// principal square roots (Denman-Beavers, tol 1e-14, max 50 steps) until
// ||u^(1/2^k) - I|| <= 0.25, then the degree-7 diagonal Pade approximant
// of log(I+z), then scale by 2^k. Eigenvalues on the closed negative real
// axis (within 1e-12, checked via the Schur/QR spectrum when
// ||u - I|| >= 1) raise BranchCutError.
Matrix logm(const Matrix& u);

// Principal square root by Denman-Beavers iteration.
Matrix sqrtm_db(const Matrix& a);

// Spectrum via Householder Hessenberg reduction and shifted QR iteration.
// Returned in deterministic order (sorted by real part, then imaginary).
std::vector<cxd> eigenvalues(const Matrix& a);

// Truncated Baker-Campbell-Hausdorff combination of log(e^a e^b) through
// order-4 brackets. Requires ||a|| + ||b|| <= 0.5 (spectral).
Matrix bch4(const Matrix& a, const Matrix& b);

}  // namespace corec
