#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tred {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Every numerical object in the library
/// (generators, projectors, superoperators, states) is carried by this type.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols);
  static ComplexMatrix diagonal(std::span<const cplx> values);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix column(std::span<const cplx> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;
  cplx trace() const;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  /// Copy of the nrows x ncols sub-block starting at (row0, col0).
  ComplexMatrix block(std::size_t row0, std::size_t col0, std::size_t nrows,
                      std::size_t ncols) const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx s) noexcept;
  /// this += s * other, without a temporary.
  ComplexMatrix& add_scaled(const ComplexMatrix& other, cplx s);

  std::string shape_string() const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

/// Matrix product; throws DimensionError reporting both shapes on mismatch.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Matrix exponential by scaling and squaring with a degree-13 Pade kernel.
ComplexMatrix expm(const ComplexMatrix& a);

/// Largest singular value.
double op_norm(const ComplexMatrix& a);
/// Frobenius norm.
double hs_norm(const ComplexMatrix& a);
/// Maximum absolute column sum.
double one_norm(const ComplexMatrix& a);
/// Sum of singular values.
double trace_norm(const ComplexMatrix& a);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix. Inputs further than
/// `hermiticity_tol` (relative) from Hermitian are rejected; the rest are
/// symmetrized before factorization.
HermitianEigen herm_eig(const ComplexMatrix& a, double hermiticity_tol = 1e-10);

/// Eigenvalues of a general square matrix (no ordering guarantee).
std::vector<cplx> eigenvalues(const ComplexMatrix& a);

/// Kronecker product, (a ⊗ b)[i*p + k, j*q + l] = a[i,j] * b[k,l].
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct LinearSolve {
  ComplexMatrix x;
  double rcond = 0.0;  // reciprocal 1-norm condition estimate of the system matrix
};

/// Solves a x = b by LU with partial pivoting.
LinearSolve lu_solve(const ComplexMatrix& a, const ComplexMatrix& b);

using MatrixFunction = std::function<ComplexMatrix(double)>;

/// Composite 5-point Gauss-Legendre rule for the entrywise integral of f on
/// [a, b] split into `panels` equal panels.
ComplexMatrix quad_fixed(const MatrixFunction& f, double a, double b, std::size_t panels);

/// Relative Hermiticity defect ||a - a^dag||_HS / max(||a||_HS, 1e-300).
double hermiticity_defect(const ComplexMatrix& a);

}  // namespace tred
