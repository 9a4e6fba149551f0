#include "tred/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tred/errors.hpp"

namespace tred {
namespace {

double entry_scale(const ComplexMatrix& m) { return std::max(1.0, m.max_abs()); }

void require_compatible(const ComplexMatrix& L, const ProjectorFactorization& proj,
                        const char* op) {
  if (!L.is_square() || L.rows() != proj.full_dim()) {
    throw DimensionError(std::string(op) + ": generator " + L.shape_string() +
                         " does not act on the projector space of dimension " +
                         std::to_string(proj.full_dim()));
  }
}

}  // namespace

ProjectorFactorization::ProjectorFactorization(ComplexMatrix reduction, ComplexMatrix injection,
                                               double tol)
    : reduction_(std::move(reduction)), injection_(std::move(injection)) {
  const std::size_t m = reduction_.rows();
  const std::size_t n = reduction_.cols();
  if (injection_.rows() != n || injection_.cols() != m) {
    throw DimensionError("ProjectorFactorization: R is " + reduction_.shape_string() +
                         " but J is " + injection_.shape_string());
  }
  if (m == 0 || m > n) {
    throw DimensionError("ProjectorFactorization: need 1 <= m <= n, got R " +
                         reduction_.shape_string());
  }
  const double rj_defect = (reduction_ * injection_ - ComplexMatrix::identity(m)).max_abs();
  if (rj_defect > tol * entry_scale(reduction_) * entry_scale(injection_)) {
    std::ostringstream os;
    os << "ProjectorFactorization: R J differs from I_" << m << " by " << rj_defect;
    throw PreconditionError(os.str());
  }
  const ComplexMatrix p = projector();
  const double idem_defect = (p * p - p).max_abs();
  if (idem_defect > tol * entry_scale(p) * entry_scale(p)) {
    std::ostringstream os;
    os << "ProjectorFactorization: P = J R is not idempotent (defect " << idem_defect << ")";
    throw PreconditionError(os.str());
  }
}

ComplexMatrix ProjectorFactorization::projector() const { return injection_ * reduction_; }

ComplexMatrix ProjectorFactorization::complement() const {
  return ComplexMatrix::identity(full_dim()) - projector();
}

PolyGenerator::PolyGenerator(std::vector<ComplexMatrix> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw PreconditionError("PolyGenerator: needs at least F_(1)");
  const auto& first = coeffs_.front();
  if (!first.is_square()) {
    throw DimensionError("PolyGenerator: coefficients must be square, got " +
                         first.shape_string());
  }
  for (const auto& c : coeffs_) {
    if (c.rows() != first.rows() || c.cols() != first.cols()) {
      throw DimensionError("PolyGenerator: mixed coefficient shapes " + first.shape_string() +
                           " and " + c.shape_string());
    }
  }
}

const ComplexMatrix& PolyGenerator::term(std::size_t k) const {
  if (k == 0 || k > coeffs_.size()) {
    throw std::out_of_range("PolyGenerator::term: index " + std::to_string(k) +
                            " outside 1.." + std::to_string(coeffs_.size()));
  }
  return coeffs_[k - 1];
}

ComplexMatrix PolyGenerator::at(double t) const {
  ComplexMatrix acc = coeffs_.back();
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
    acc *= t;
    acc += coeffs_[i];
  }
  return acc;
}

std::vector<ComplexMatrix> reduced_moments(const ComplexMatrix& L,
                                           const ProjectorFactorization& proj,
                                           std::size_t count) {
  require_compatible(L, proj, "reduced_moments");
  std::vector<ComplexMatrix> moments;
  moments.reserve(count);
  ComplexMatrix w = proj.injection();
  for (std::size_t k = 1; k <= count; ++k) {
    w = L * w;
    moments.push_back(proj.reduction() * w);
  }
  return moments;
}

PolyGenerator build_F_terms(const ComplexMatrix& L, const ProjectorFactorization& proj,
                            std::size_t order) {
  const std::size_t count = order + 1;
  // scaled[h-1] = R L^h J / h!
  std::vector<ComplexMatrix> scaled = reduced_moments(L, proj, count);
  double factorial = 1.0;
  for (std::size_t h = 1; h <= count; ++h) {
    factorial *= static_cast<double>(h);
    scaled[h - 1] *= 1.0 / factorial;
  }

  std::vector<ComplexMatrix> f;
  f.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    ComplexMatrix fk = static_cast<double>(k) * scaled[k - 1];
    for (std::size_t h = 1; h < k; ++h) fk -= f[k - h - 1] * scaled[h - 1];
    f.push_back(std::move(fk));
  }
  return PolyGenerator(std::move(f));
}

FirstTerms first_terms_closed_form(const ComplexMatrix& L, const ProjectorFactorization& proj) {
  require_compatible(L, proj, "first_terms_closed_form");
  const auto& R = proj.reduction();
  const auto& J = proj.injection();
  const ComplexMatrix L2 = L * L;
  const ComplexMatrix rlj = R * L * J;
  const ComplexMatrix rl2j = R * L2 * J;
  const ComplexMatrix rl3j = R * (L2 * L) * J;
  FirstTerms out;
  out.f1 = rlj;
  out.f2 = rl2j - rlj * rlj;
  out.f3 = 0.5 * rl3j - out.f2 * rlj - 0.5 * (out.f1 * rl2j);
  return out;
}

namespace detail {

ComplexMatrix tcl_generator_signed(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                   double t, std::size_t panels, double max_condition) {
  require_compatible(L, proj, "exact_tcl_oracle");
  const std::size_t n = proj.full_dim();
  const ComplexMatrix P = proj.projector();
  const ComplexMatrix Q = proj.complement();
  const ComplexMatrix QLQ = Q * L * Q;
  const ComplexMatrix QLP = Q * L * P;

  ComplexMatrix M = ComplexMatrix::identity(n);
  if (t != 0.0 && QLP.max_abs() != 0.0) {
    auto integrand = [&](double s) { return expm(s * QLQ) * QLP * expm(-s * L); };
    const ComplexMatrix integral = t > 0.0 ? quad_fixed(integrand, 0.0, t, panels)
                                           : -quad_fixed(integrand, t, 0.0, panels);
    M -= integral;
  }
  LinearSolve solved = lu_solve(M, proj.injection());
  if (!(solved.rcond * max_condition >= 1.0) || !solved.x.all_finite()) {
    std::ostringstream os;
    os << "exact_tcl_oracle: M_t is not invertible at t = " << t << " (condition estimate "
       << (solved.rcond > 0.0 ? 1.0 / solved.rcond : INFINITY) << ")";
    throw NumericalBreakdown(os.str(), t);
  }
  return proj.reduction() * L * solved.x;
}

}  // namespace detail

ComplexMatrix exact_tcl_oracle(const ComplexMatrix& L, const ProjectorFactorization& proj,
                               double t, std::size_t panels, double max_condition) {
  if (t < 0.0) throw PreconditionError("exact_tcl_oracle: requires t >= 0");
  return detail::tcl_generator_signed(L, proj, t, panels, max_condition);
}

std::vector<NormRow> norm_study(const PolyGenerator& gen, const ComplexMatrix& L) {
  const double l_hs = hs_norm(L);
  const double l_op = op_norm(L);
  std::vector<NormRow> rows;
  double hs_bound = 1.0, op_bound = 1.0;
  for (std::size_t k = 1; k <= gen.coeffs().size(); ++k) {
    hs_bound *= l_hs / static_cast<double>(k);
    op_bound *= l_op / static_cast<double>(k);
    const auto& f = gen.term(k);
    rows.push_back({k, hs_norm(f), op_norm(f), hs_bound, op_bound});
  }
  return rows;
}

}  // namespace tred
