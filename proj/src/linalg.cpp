#include "tred/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "tred/errors.hpp"
#include "tred/kernels.hpp"

namespace tred {
namespace {

using EigenRowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstEigenMap = Eigen::Map<const EigenRowMatrix>;

ConstEigenMap as_eigen(const ComplexMatrix& m) {
  return ConstEigenMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                       static_cast<Eigen::Index>(m.cols()));
}

template <class Derived>
ComplexMatrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
  ComplexMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return out;
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

void require_square(const ComplexMatrix& a, const char* op) {
  if (!a.is_square()) {
    throw DimensionError(std::string(op) + ": expected a square matrix, got " + a.shape_string());
  }
}

// Gauss-Legendre 5-point rule on [-1, 1].
struct GaussLegendre5 {
  std::array<double, 5> nodes;
  std::array<double, 5> weights;
};

const GaussLegendre5& gauss_legendre5() {
  static const GaussLegendre5 rule = [] {
    const double r = 2.0 * std::sqrt(10.0 / 7.0);
    const double x1 = std::sqrt(5.0 - r) / 3.0;
    const double x2 = std::sqrt(5.0 + r) / 3.0;
    const double w0 = 128.0 / 225.0;
    const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return GaussLegendre5{{-x2, -x1, 0.0, x1, x2}, {w2, w1, w0, w1, w2}};
  }();
  return rule;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("ComplexMatrix: " + std::to_string(data_.size()) +
                         " entries do not fill " + shape_string());
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::zeros(std::size_t rows, std::size_t cols) {
  return ComplexMatrix(rows, cols);
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::column(std::span<const cplx> values) {
  return ComplexMatrix(values.size(), 1, std::vector<cplx>(values.begin(), values.end()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

ComplexMatrix ComplexMatrix::conj() const {
  ComplexMatrix out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

cplx ComplexMatrix::trace() const {
  require_square(*this, "trace");
  cplx t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

ComplexMatrix ComplexMatrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                                   std::size_t ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_) {
    throw DimensionError("block: " + std::to_string(nrows) + "x" + std::to_string(ncols) +
                         " at (" + std::to_string(row0) + "," + std::to_string(col0) +
                         ") exceeds " + shape_string());
  }
  ComplexMatrix out(nrows, ncols);
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j < ncols; ++j) out(i, j) = (*this)(row0 + i, col0 + j);
  return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) noexcept {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexMatrix& ComplexMatrix::add_scaled(const ComplexMatrix& other, cplx s) {
  require_same_shape(*this, other, "add_scaled");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
  return *this;
}

std::string ComplexMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + a.shape_string() + " * " +
                         b.shape_string());
  }
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t work = a.rows() * a.cols() * b.cols();
  if (work >= kernels::kParallelGemmWork && a.rows() > 1) {
    kernels::gemm_parallel(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  } else {
    kernels::gemm_serial(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  }
  return c;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  if (out.size() >= (std::size_t{1} << 14)) {
    kernels::kron_parallel(a.data(), a.rows(), a.cols(), b.data(), b.rows(), b.cols(), out.data());
  } else {
    kernels::kron_serial(a.data(), a.rows(), a.cols(), b.data(), b.rows(), b.cols(), out.data());
  }
  return out;
}

double hs_norm(const ComplexMatrix& a) {
  // Scaled accumulation; avoids overflow for the large-N generator norms.
  double scale = 0.0, ssq = 1.0;
  for (const auto& v : a.data()) {
    for (double x : {v.real(), v.imag()}) {
      if (x == 0.0) continue;
      const double ax = std::abs(x);
      if (scale < ax) {
        ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
        scale = ax;
      } else {
        ssq += (ax / scale) * (ax / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

double one_norm(const ComplexMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double op_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  Eigen::JacobiSVD<EigenRowMatrix> svd(as_eigen(a));
  return svd.singularValues()(0);
}

double trace_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  Eigen::JacobiSVD<EigenRowMatrix> svd(as_eigen(a));
  return svd.singularValues().sum();
}

double hermiticity_defect(const ComplexMatrix& a) {
  require_square(a, "hermiticity_defect");
  const double scale = std::max(hs_norm(a), 1e-300);
  return hs_norm(a - a.adjoint()) / scale;
}

HermitianEigen herm_eig(const ComplexMatrix& a, double hermiticity_tol) {
  require_square(a, "herm_eig");
  const double defect = hermiticity_defect(a);
  if (defect > hermiticity_tol) {
    std::ostringstream os;
    os << "herm_eig: matrix is not Hermitian (relative defect " << defect << " > "
       << hermiticity_tol << ")";
    throw PreconditionError(os.str());
  }
  const EigenRowMatrix sym = 0.5 * (as_eigen(a) + as_eigen(a).adjoint());
  Eigen::SelfAdjointEigenSolver<EigenRowMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalBreakdown("herm_eig: eigensolver did not converge", 0.0);
  }
  HermitianEigen out;
  out.values.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = from_eigen(solver.eigenvectors());
  return out;
}

std::vector<cplx> eigenvalues(const ComplexMatrix& a) {
  require_square(a, "eigenvalues");
  Eigen::ComplexEigenSolver<EigenRowMatrix> solver(as_eigen(a), false);
  if (solver.info() != Eigen::Success) {
    throw NumericalBreakdown("eigenvalues: eigensolver did not converge", 0.0);
  }
  const auto& ev = solver.eigenvalues();
  return std::vector<cplx>(ev.data(), ev.data() + ev.size());
}

LinearSolve lu_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "lu_solve");
  if (a.rows() != b.rows()) {
    throw DimensionError("lu_solve: system " + a.shape_string() + " with right-hand side " +
                         b.shape_string());
  }
  Eigen::PartialPivLU<EigenRowMatrix> lu(as_eigen(a));
  LinearSolve out;
  out.rcond = lu.rcond();
  // Eigen's estimate is meaningless once a pivot is exactly zero.
  const auto pivots = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < pivots.size(); ++i) {
    if (pivots(i) == std::complex<double>(0.0) || !std::isfinite(std::abs(pivots(i)))) out.rcond = 0.0;
  }
  if (!std::isfinite(out.rcond)) out.rcond = 0.0;
  const EigenRowMatrix x = lu.solve(as_eigen(b));
  out.x = from_eigen(x);
  return out;
}

ComplexMatrix expm(const ComplexMatrix& a) {
  require_square(a, "expm");
  const std::size_t n = a.rows();
  const auto id = ComplexMatrix::identity(n);
  if (a.max_abs() == 0.0) return id;

  // Higham (2005) degree-13 diagonal Pade approximant.
  static constexpr double b[] = {64764752532480000.0,
                                 32382376266240000.0,
                                 7771770303897600.0,
                                 1187353796428800.0,
                                 129060195264000.0,
                                 10559470521600.0,
                                 670442572800.0,
                                 33522128640.0,
                                 1323241920.0,
                                 40840800.0,
                                 960960.0,
                                 16380.0,
                                 182.0,
                                 1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm = one_norm(a);
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  ComplexMatrix as = a;
  if (squarings > 0) as *= std::ldexp(1.0, -squarings);

  const ComplexMatrix a2 = as * as;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;

  ComplexMatrix inner_u = b[13] * a6;
  inner_u.add_scaled(a4, b[11]).add_scaled(a2, b[9]);
  ComplexMatrix u_poly = a6 * inner_u;
  u_poly.add_scaled(a6, b[7]).add_scaled(a4, b[5]).add_scaled(a2, b[3]).add_scaled(id, b[1]);
  const ComplexMatrix u = as * u_poly;

  ComplexMatrix inner_v = b[12] * a6;
  inner_v.add_scaled(a4, b[10]).add_scaled(a2, b[8]);
  ComplexMatrix v = a6 * inner_v;
  v.add_scaled(a6, b[6]).add_scaled(a4, b[4]).add_scaled(a2, b[2]).add_scaled(id, b[0]);

  ComplexMatrix r = lu_solve(v - u, v + u).x;
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

ComplexMatrix quad_fixed(const MatrixFunction& f, double a, double b, std::size_t panels) {
  if (panels == 0) throw PreconditionError("quad_fixed: panels must be >= 1");
  if (a > b) throw PreconditionError("quad_fixed: requires a <= b");
  const auto& rule = gauss_legendre5();
  const double h = (b - a) / static_cast<double>(panels);
  ComplexMatrix total;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const ComplexMatrix v = f(mid + 0.5 * h * rule.nodes[q]);
      if (total.empty()) total = ComplexMatrix(v.rows(), v.cols());
      total.add_scaled(v, 0.5 * h * rule.weights[q]);
    }
  }
  return total;
}

}  // namespace tred
