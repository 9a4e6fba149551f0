#include "tred/quantum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tred/errors.hpp"

namespace tred {
namespace {

constexpr cplx kI{0.0, 1.0};

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

ComplexMatrix as_square_state(const ComplexMatrix& s) {
  if (s.is_square()) return s;
  return unvec(s);
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  ComplexMatrix h = a;
  h += a.adjoint();
  h *= 0.5;
  return h;
}

void require_square(const ComplexMatrix& a, const char* op) {
  if (!a.is_square()) throw DimensionError(std::string(op) + ": needs a square matrix, got " +
                                           a.shape_string());
}

std::size_t superop_side(const ComplexMatrix& s, const char* op) {
  require_square(s, op);
  const std::size_t d = exact_sqrt(s.rows());
  if (d == 0) {
    throw DimensionError(std::string(op) + ": superoperator dimension " +
                         std::to_string(s.rows()) + " is not a perfect square");
  }
  return d;
}

// Orthonormal Hermitian basis of d x d matrices under tr(A B).
std::vector<ComplexMatrix> hermitian_basis(std::size_t d) {
  std::vector<ComplexMatrix> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t a = 0; a < d; ++a) {
    ComplexMatrix g(d, d);
    g(a, a) = 1.0;
    basis.push_back(std::move(g));
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      ComplexMatrix sym(d, d), asym(d, d);
      sym(a, b) = sym(b, a) = r;
      asym(a, b) = -kI * r;
      asym(b, a) = kI * r;
      basis.push_back(std::move(sym));
      basis.push_back(std::move(asym));
    }
  }
  return basis;
}

}  // namespace

ComplexMatrix vec(const ComplexMatrix& x) {
  ComplexMatrix v(x.size(), 1);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t i = 0; i < x.rows(); ++i) v(j * x.rows() + i, 0) = x(i, j);
  }
  return v;
}

ComplexMatrix unvec(const ComplexMatrix& v) {
  if (v.rows() != 1 && v.cols() != 1) {
    throw DimensionError("unvec: expected a vector, got " + v.shape_string());
  }
  const std::size_t d = exact_sqrt(v.size());
  if (d == 0) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) +
                         " is not a perfect square");
  }
  ComplexMatrix x(d, d);
  const auto data = v.data();
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) x(i, j) = data[j * d + i];
  }
  return x;
}

ComplexMatrix apply_superop(const ComplexMatrix& s, const ComplexMatrix& x) {
  return unvec(s * vec(x));
}

ComplexMatrix left_mul_superop(const ComplexMatrix& a) {
  return kron(ComplexMatrix::identity(a.rows()), a);
}

ComplexMatrix right_mul_superop(const ComplexMatrix& b) {
  return kron(b.transpose(), ComplexMatrix::identity(b.rows()));
}

ComplexMatrix hamiltonian_superop(const ComplexMatrix& h) {
  require_square(h, "hamiltonian_superop");
  ComplexMatrix s = left_mul_superop(h);
  s -= right_mul_superop(h);
  s *= -kI;
  return s;
}

ComplexMatrix dissipator_superop(const ComplexMatrix& l) {
  require_square(l, "dissipator_superop");
  const ComplexMatrix ldl = l.adjoint() * l;
  ComplexMatrix s = kron(l.conj(), l);
  s.add_scaled(left_mul_superop(ldl), -0.5);
  s.add_scaled(right_mul_superop(ldl), -0.5);
  return s;
}

namespace pauli {
ComplexMatrix id() { return ComplexMatrix::identity(2); }
ComplexMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix y() { return {{0.0, -kI}, {kI, 0.0}}; }
ComplexMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
ComplexMatrix lower() { return {{0.0, 1.0}, {0.0, 0.0}}; }
}  // namespace pauli

void LindbladSpec::validate() const {
  require_square(hamiltonian, "LindbladSpec");
  if (hermiticity_defect(hamiltonian) > 1e-10) {
    throw PreconditionError("LindbladSpec: Hamiltonian is not Hermitian");
  }
  for (const auto& l : noise_ops) {
    if (l.rows() != dim() || l.cols() != dim()) {
      throw DimensionError("LindbladSpec: noise operator " + l.shape_string() +
                           " does not match Hamiltonian " + hamiltonian.shape_string());
    }
  }
}

ComplexMatrix liouvillian(const LindbladSpec& spec) {
  spec.validate();
  ComplexMatrix s = hamiltonian_superop(spec.hamiltonian);
  for (const auto& l : spec.noise_ops) s += dissipator_superop(l);
  return s;
}

DensityMatrix::DensityMatrix(ComplexMatrix m, double tol) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (hermiticity_defect(m_) > tol) throw PreconditionError("DensityMatrix: not Hermitian");
  const cplx tr = m_.trace();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace is " << tr.real() << " + " << tr.imag() << "i";
    throw PreconditionError(os.str());
  }
  min_eig_ = herm_eig(m_, tol).values.front();
  if (min_eig_ < -tol) {
    std::ostringstream os;
    os << "DensityMatrix: negative eigenvalue " << min_eig_;
    throw PreconditionError(os.str());
  }
}

DensityMatrix thermal_state(const ComplexMatrix& h, double beta) {
  if (beta < 0.0) throw PreconditionError("thermal_state: requires beta >= 0");
  const HermitianEigen eig = herm_eig(h);
  const std::size_t d = h.rows();
  const double e0 = eig.values.front();
  std::vector<double> w(d);
  double z = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    w[i] = std::exp(-beta * (eig.values[i] - e0));
    z += w[i];
  }
  for (double& x : w) x /= z;
  const ComplexMatrix& v = eig.vectors;
  ComplexMatrix rho(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += v(i, k) * w[k] * std::conj(v(j, k));
      rho(i, j) = acc;
    }
  }
  return DensityMatrix(hermitian_part(rho));
}

ComplexMatrix partial_trace_bath(const ComplexMatrix& x, std::size_t d_s, std::size_t d_b) {
  if (x.rows() != d_s * d_b || !x.is_square()) {
    throw DimensionError("partial_trace_bath: " + x.shape_string() + " is not " +
                         std::to_string(d_s * d_b) + " square");
  }
  ComplexMatrix out(d_s, d_s);
  for (std::size_t s = 0; s < d_s; ++s) {
    for (std::size_t s2 = 0; s2 < d_s; ++s2) {
      cplx acc = 0.0;
      for (std::size_t b = 0; b < d_b; ++b) acc += x(s * d_b + b, s2 * d_b + b);
      out(s, s2) = acc;
    }
  }
  return out;
}

ProjectorFactorization bipartite_factors(std::size_t d_s, std::size_t d_b,
                                         const DensityMatrix& tau, double min_eig) {
  if (d_s == 0 || tau.dim() != d_b) {
    throw DimensionError("bipartite_factors: bath state is " + tau.matrix().shape_string() +
                         ", expected " + std::to_string(d_b) + " square");
  }
  if (min_eig > 0.0 && tau.min_eigenvalue() <= min_eig) {
    std::ostringstream os;
    os << "bipartite_factors: reference state is singular (min eigenvalue "
       << tau.min_eigenvalue() << ")";
    throw PreconditionError(os.str());
  }
  const std::size_t d = d_s * d_b;
  const ComplexMatrix& t = tau.matrix();
  ComplexMatrix r(d_s * d_s, d * d);
  ComplexMatrix j(d * d, d_s * d_s);
  for (std::size_t s = 0; s < d_s; ++s) {
    for (std::size_t s2 = 0; s2 < d_s; ++s2) {
      const std::size_t red = s2 * d_s + s;
      for (std::size_t b = 0; b < d_b; ++b) {
        r(red, (s2 * d_b + b) * d + (s * d_b + b)) = 1.0;
        for (std::size_t b2 = 0; b2 < d_b; ++b2) {
          j((s2 * d_b + b2) * d + (s * d_b + b), red) = t(b, b2);
        }
      }
    }
  }
  return ProjectorFactorization(std::move(r), std::move(j));
}

ProjectorFactorization diagonal_factors(std::size_t d) {
  if (d == 0) throw PreconditionError("diagonal_factors: requires d >= 1");
  ComplexMatrix r(d, d * d);
  ComplexMatrix j(d * d, d);
  for (std::size_t k = 0; k < d; ++k) {
    r(k, k * d + k) = 1.0;
    j(k * d + k, k) = 1.0;
  }
  return ProjectorFactorization(std::move(r), std::move(j));
}

ComplexMatrix reduced_hamiltonian(const ComplexMatrix& h, const DensityMatrix& tau,
                                  std::size_t d_s) {
  const std::size_t d_b = tau.dim();
  if (!h.is_square() || h.rows() != d_s * d_b) {
    throw DimensionError("reduced_hamiltonian: H is " + h.shape_string() + " but d_S * d_B = " +
                         std::to_string(d_s * d_b));
  }
  const ComplexMatrix& t = tau.matrix();
  ComplexMatrix out(d_s, d_s);
  for (std::size_t s = 0; s < d_s; ++s) {
    for (std::size_t s2 = 0; s2 < d_s; ++s2) {
      cplx acc = 0.0;
      for (std::size_t b = 0; b < d_b; ++b) {
        for (std::size_t b2 = 0; b2 < d_b; ++b2) acc += t(b, b2) * h(s * d_b + b2, s2 * d_b + b);
      }
      out(s, s2) = acc;
    }
  }
  return out;
}

BipartiteDecomposition operator_schmidt(const ComplexMatrix& h, std::size_t d_s,
                                        double rel_tol) {
  require_square(h, "operator_schmidt");
  if (d_s == 0 || h.rows() % d_s != 0) {
    throw DimensionError("operator_schmidt: " + h.shape_string() + " is not divisible by d_S = " +
                         std::to_string(d_s));
  }
  if (hermiticity_defect(h) > 1e-10) throw PreconditionError("operator_schmidt: H not Hermitian");
  const std::size_t d_b = h.rows() / d_s;
  const auto basis = hermitian_basis(d_s);
  const std::size_t nb = basis.size();

  // E_a = tr_S[(G_a ⊗ I) H]; then H = sum_a G_a ⊗ E_a.
  std::vector<ComplexMatrix> e(nb, ComplexMatrix(d_b, d_b));
  for (std::size_t a = 0; a < nb; ++a) {
    const ComplexMatrix& g = basis[a];
    for (std::size_t b = 0; b < d_b; ++b) {
      for (std::size_t b2 = 0; b2 < d_b; ++b2) {
        cplx acc = 0.0;
        for (std::size_t s = 0; s < d_s; ++s) {
          for (std::size_t s2 = 0; s2 < d_s; ++s2) {
            if (g(s, s2) != 0.0) acc += g(s, s2) * h(s2 * d_b + b, s * d_b + b2);
          }
        }
        e[a](b, b2) = acc;
      }
    }
    e[a] = hermitian_part(e[a]);
  }

  // Rotate so the bath factors are HS-orthogonal: the Gram matrix is real
  // symmetric, and an orthogonal rotation keeps both factor families Hermitian.
  Eigen::MatrixXd gram(nb, nb);
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a; b < nb; ++b) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < d_b; ++i)
        for (std::size_t k = 0; k < d_b; ++k) acc += e[a](i, k) * e[b](k, i);
      gram(a, b) = gram(b, a) = acc.real();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const Eigen::VectorXd& w = solver.eigenvalues();
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const double top = std::max(w.maxCoeff(), 0.0);

  BipartiteDecomposition out;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(nb) - 1; k >= 0; --k) {
    if (!(w(k) > rel_tol * rel_tol * top)) continue;
    ComplexMatrix sk(d_s, d_s), ek(d_b, d_b);
    for (std::size_t a = 0; a < nb; ++a) {
      const double c = u(static_cast<std::ptrdiff_t>(a), k);
      if (c == 0.0) continue;
      sk.add_scaled(basis[a], c);
      ek.add_scaled(e[a], c);
    }
    out.system_ops.push_back(std::move(sk));
    out.bath_ops.push_back(std::move(ek));
  }
  return out;
}

CovarianceStructure second_order_structure(const BipartiteDecomposition& dec,
                                           const DensityMatrix& tau) {
  const std::size_t n = dec.system_ops.size();
  if (n == 0 || dec.bath_ops.size() != n) {
    throw DimensionError("second_order_structure: need matching, nonempty factor lists");
  }
  const std::size_t d_s = dec.system_ops.front().rows();
  for (std::size_t k = 0; k < n; ++k) {
    if (dec.system_ops[k].rows() != d_s || !dec.system_ops[k].is_square() ||
        dec.bath_ops[k].rows() != tau.dim() || !dec.bath_ops[k].is_square()) {
      throw DimensionError("second_order_structure: factor " + std::to_string(k) +
                           " has the wrong shape");
    }
  }
  const ComplexMatrix& t = tau.matrix();
  CovarianceStructure cs;
  cs.system_ops = dec.system_ops;
  cs.means.resize(n);
  std::vector<ComplexMatrix> te(n);  // τ E_k
  for (std::size_t k = 0; k < n; ++k) {
    te[k] = t * dec.bath_ops[k];
    cs.means[k] = te[k].trace().real();
  }
  cs.chi = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      // c_jk = tr[E_j τ E_k] = tr[(τ E_k) E_j]
      cplx c = 0.0;
      const ComplexMatrix& a = te[k];
      const ComplexMatrix& b = dec.bath_ops[j];
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) c += a(i, l) * b(l, i);
      cs.chi(j, k) = c - cs.means[j] * cs.means[k];
    }
  }
  cs.chi = hermitian_part(cs.chi);

  cs.reduced_hamiltonian = ComplexMatrix(d_s, d_s);
  for (std::size_t k = 0; k < n; ++k) cs.reduced_hamiltonian.add_scaled(cs.system_ops[k], cs.means[k]);

  const HermitianEigen eig = herm_eig(cs.chi);
  cs.rates = eig.values;
  cs.min_chi_eigenvalue = eig.values.front();
  const double scale = std::max(1.0, std::abs(eig.values.back()));
  cs.psd_violation = cs.min_chi_eigenvalue < -1e-8 * scale;
  for (std::size_t h = 0; h < n; ++h) {
    ComplexMatrix l(d_s, d_s);
    for (std::size_t j = 0; j < n; ++j) l.add_scaled(cs.system_ops[j], eig.vectors(j, h));
    cs.lindblad_ops.push_back(std::move(l));
  }
  return cs;
}

CovarianceStructure second_order_structure(const ComplexMatrix& h, const DensityMatrix& tau,
                                           std::size_t d_s) {
  return second_order_structure(operator_schmidt(h, d_s), tau);
}

ComplexMatrix CovarianceStructure::f2_superop() const {
  const std::size_t d = system_ops.front().rows();
  ComplexMatrix s(d * d, d * d);
  for (std::size_t j = 0; j < system_ops.size(); ++j) {
    for (std::size_t k = 0; k < system_ops.size(); ++k) {
      const cplx c = chi(j, k);
      if (c == 0.0) continue;
      const ComplexMatrix kj = system_ops[k] * system_ops[j];
      s.add_scaled(kron(system_ops[k].transpose(), system_ops[j]), 2.0 * c);
      s.add_scaled(left_mul_superop(kj), -c);
      s.add_scaled(right_mul_superop(kj), -c);
    }
  }
  return s;
}

ComplexMatrix CovarianceStructure::f2_from_rates() const {
  const std::size_t d = system_ops.front().rows();
  ComplexMatrix s(d * d, d * d);
  for (std::size_t h = 0; h < rates.size(); ++h) {
    s.add_scaled(dissipator_superop(std::sqrt(2.0) * lindblad_ops[h]), rates[h]);
  }
  return s;
}

double structural_vs_recursive_F2(const ComplexMatrix& h, const DensityMatrix& tau,
                                  std::size_t d_s) {
  const ComplexMatrix l = liouvillian({h, {}});
  const ProjectorFactorization proj = bipartite_factors(d_s, tau.dim(), tau, 0.0);
  const PolyGenerator gen = build_F_terms(l, proj, 1);
  const CovarianceStructure cs = second_order_structure(h, tau, d_s);
  return hs_norm(gen.term(2) - cs.f2_superop());
}

ComplexMatrix choi(const ComplexMatrix& phi) {
  const std::size_t d = superop_side(phi, "choi");
  ComplexMatrix c(d * d, d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t cc = 0; cc < d; ++cc)
        for (std::size_t e = 0; e < d; ++e) c(cc * d + a, e * d + b) = phi(a + d * b, cc + d * e);
  return c;
}

CptpVerdict is_cptp_map(const ComplexMatrix& phi, double tol) {
  const std::size_t d = superop_side(phi, "is_cptp_map");
  CptpVerdict v;
  // vec(I)^dag Φ = vec(I)^dag, i.e. tr Φ(X) = tr X.
  double tp = 0.0;
  for (std::size_t col = 0; col < d * d; ++col) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += phi(i * d + i, col);
    const std::size_t r = col / d, c = col % d;
    tp = std::max(tp, std::abs(acc - (r == c ? 1.0 : 0.0)));
  }
  v.tp_residual = tp;
  v.trace_preserving = tp <= tol;
  const ComplexMatrix c = choi(phi);
  const double herm = hermiticity_defect(c);
  v.min_choi_eigenvalue = herm_eig(hermitian_part(c)).values.front();
  v.completely_positive = herm <= tol && v.min_choi_eigenvalue >= -tol;
  return v;
}

LindbladVerdict is_lindblad_type(const ComplexMatrix& g, double tol) {
  const std::size_t d = superop_side(g, "is_lindblad_type");
  LindbladVerdict v;
  const ComplexMatrix c = choi(g);
  const double scale = std::max(1.0, c.max_abs());
  v.hermiticity_residual = (c - c.adjoint()).max_abs() / scale;
  v.hermiticity_preserving = v.hermiticity_residual <= tol;

  double tr = 0.0;
  for (std::size_t col = 0; col < d * d; ++col) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += g(i * d + i, col);
    tr = std::max(tr, std::abs(acc));
  }
  v.trace_residual = tr / scale;
  v.trace_annihilating = v.trace_residual <= tol;

  // Π = I - |Ω><Ω|/d with Ω = sum_i |ii>.
  ComplexMatrix pi = ComplexMatrix::identity(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) pi(i * d + i, j * d + j) -= 1.0 / static_cast<double>(d);
  const ComplexMatrix projected = hermitian_part(pi * c * pi);
  v.min_projected_choi_eigenvalue = herm_eig(projected).values.front();
  v.conditionally_cp = v.min_projected_choi_eigenvalue >= -tol * scale;
  return v;
}

ClassicalVerdict classical_generator_checks(const ComplexMatrix& f, double tol) {
  require_square(f, "classical_generator_checks");
  ClassicalVerdict v;
  const std::size_t d = f.rows();
  v.min_off_diagonal = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      v.max_imag = std::max(v.max_imag, std::abs(f(i, j).imag()));
      if (i != j) v.min_off_diagonal = std::min(v.min_off_diagonal, f(i, j).real());
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) sum += f(i, j).real();
    v.max_column_sum = std::max(v.max_column_sum, std::abs(sum));
  }
  if (d == 1) v.min_off_diagonal = 0.0;
  v.real = v.max_imag <= tol;
  v.metzler = v.min_off_diagonal >= -tol;
  v.zero_column_sums = v.max_column_sum <= tol;
  return v;
}

ComplexMatrix classical_embedding(const ComplexMatrix& f) {
  require_square(f, "classical_embedding");
  const std::size_t d = f.rows();
  ComplexMatrix g(d * d, d * d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      if (j == k || f(j, k) == 0.0) continue;
      ComplexMatrix jump(d, d);
      jump(j, k) = 1.0;
      g.add_scaled(dissipator_superop(jump), f(j, k));
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    cplx col = 0.0;
    for (std::size_t i = 0; i < d; ++i) col += f(i, k);
    g(k * d + k, k * d + k) += col;
  }
  return g;
}

double min_state_eigenvalue(const ComplexMatrix& state) {
  const ComplexMatrix m = as_square_state(state);
  return herm_eig(hermitian_part(m)).values.front();
}

std::optional<std::size_t> positivity_exit_index(const Trajectory& traj, StateKind kind,
                                                 double tol) {
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ComplexMatrix& s = traj.states[i];
    double lowest;
    if (kind == StateKind::kDensityMatrix) {
      lowest = min_state_eigenvalue(s);
    } else {
      lowest = std::numeric_limits<double>::infinity();
      for (const cplx& x : s.data()) lowest = std::min(lowest, x.real());
    }
    if (lowest < -tol) return i;
  }
  return std::nullopt;
}

std::optional<double> positivity_exit_time(const Trajectory& traj, StateKind kind, double tol) {
  const auto idx = positivity_exit_index(traj, kind, tol);
  if (!idx) return std::nullopt;
  return traj.times[*idx];
}

std::array<double, 3> bloch_vector(const ComplexMatrix& state) {
  const ComplexMatrix m = as_square_state(state);
  if (m.rows() != 2) throw DimensionError("bloch_vector: not a qubit state " + m.shape_string());
  return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

}  // namespace tred
