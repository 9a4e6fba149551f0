#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tred/linalg.hpp"

namespace tred {

/// Factorization P = J R of a (possibly oblique) projector onto the subspace
/// of interest, with R J = I_m. R is the m x n reduction, J the n x m
/// injection.
class ProjectorFactorization {
 public:
  /// Validates R J = I_m and P^2 = P to `tol` (relative to the entry scale).
  ProjectorFactorization(ComplexMatrix reduction, ComplexMatrix injection, double tol = 1e-12);

  const ComplexMatrix& reduction() const noexcept { return reduction_; }
  const ComplexMatrix& injection() const noexcept { return injection_; }
  std::size_t reduced_dim() const noexcept { return reduction_.rows(); }
  std::size_t full_dim() const noexcept { return reduction_.cols(); }

  /// P = J R.
  ComplexMatrix projector() const;
  /// Q = I - P.
  ComplexMatrix complement() const;

 private:
  ComplexMatrix reduction_;
  ComplexMatrix injection_;
};

/// Polynomial time-dependent generator F_{t,N} = sum_{k=0}^{N} t^k F_(k+1).
class PolyGenerator {
 public:
  explicit PolyGenerator(std::vector<ComplexMatrix> coeffs);

  /// Polynomial degree N in t; there are N + 1 coefficients.
  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::size_t dim() const noexcept { return coeffs_.front().rows(); }

  /// F_(k), 1-based; coefficients beyond N + 1 are zero by convention and
  /// requesting them throws std::out_of_range.
  const ComplexMatrix& term(std::size_t k) const;
  std::span<const ComplexMatrix> coeffs() const noexcept { return coeffs_; }

  /// F_{t,N} evaluated by Horner's rule.
  ComplexMatrix at(double t) const;

 private:
  std::vector<ComplexMatrix> coeffs_;
};

/// The reduced moments R L^k J for k = 1..count, computed by propagating the
/// n x m block J through L without forming L^k.
std::vector<ComplexMatrix> reduced_moments(const ComplexMatrix& L,
                                           const ProjectorFactorization& proj,
                                           std::size_t count);

/// Coefficients F_(1)..F_(N+1) of the polynomial generator from the
/// recursion F_(k) = k R L^k J / k! - sum_{h=1}^{k-1} F_(k-h) R L^h J / h!.
PolyGenerator build_F_terms(const ComplexMatrix& L, const ProjectorFactorization& proj,
                            std::size_t order);

struct FirstTerms {
  ComplexMatrix f1;
  ComplexMatrix f2;
  ComplexMatrix f3;
};

/// Closed forms of the first three coefficients. Test oracle for build_F_terms.
FirstTerms first_terms_closed_form(const ComplexMatrix& L, const ProjectorFactorization& proj);

/// Exact time-local generator F_t = R L M_t^{-1} J with
/// M_t = I - int_0^t e^{QLQ s} Q L P e^{-L s} ds. Throws NumericalBreakdown
/// when M_t is numerically singular (condition estimate above `max_condition`).
ComplexMatrix exact_tcl_oracle(const ComplexMatrix& L, const ProjectorFactorization& proj,
                               double t, std::size_t panels, double max_condition = 1e12);

namespace detail {
/// Same as exact_tcl_oracle but also defined for t < 0 (the integral is
/// taken with orientation). Used for central finite differences around 0.
ComplexMatrix tcl_generator_signed(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                   double t, std::size_t panels, double max_condition = 1e12);
}  // namespace detail

struct NormRow {
  std::size_t k;
  double hs;        // ||F_(k)||_HS
  double op;        // ||F_(k)||_op
  double hs_bound;  // ||L||_HS^k / k!
  double op_bound;  // ||L||_op^k / k!
};

std::vector<NormRow> norm_study(const PolyGenerator& gen, const ComplexMatrix& L);

}  // namespace tred
