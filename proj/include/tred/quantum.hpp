#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "tred/linalg.hpp"
#include "tred/propagation.hpp"
#include "tred/reduction.hpp"

namespace tred {

// Superoperators act on column-stacked vectorizations: vec stacks the columns
// of a d x d matrix top to bottom, so entry (i, j) lands at index j*d + i and
// vec(A X B) = (B^T ⊗ A) vec(X).

ComplexMatrix vec(const ComplexMatrix& x);
/// Inverse of vec. `v` must be a column (or row) whose length is a perfect square.
ComplexMatrix unvec(const ComplexMatrix& v);

/// unvec(S vec(X)).
ComplexMatrix apply_superop(const ComplexMatrix& s, const ComplexMatrix& x);

/// X -> A X
ComplexMatrix left_mul_superop(const ComplexMatrix& a);
/// X -> X B
ComplexMatrix right_mul_superop(const ComplexMatrix& b);
/// X -> -i [H, X]
ComplexMatrix hamiltonian_superop(const ComplexMatrix& h);
/// X -> L X L^dag - {L^dag L, X}/2
ComplexMatrix dissipator_superop(const ComplexMatrix& l);

namespace pauli {
ComplexMatrix id();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
/// (σx - iσy)/2 = |0><1| in the basis where σz = diag(1, -1).
ComplexMatrix lower();
}  // namespace pauli

/// Hamiltonian plus noise operators of a GKLS generator.
struct LindbladSpec {
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> noise_ops;

  std::size_t dim() const noexcept { return hamiltonian.rows(); }
  /// Throws if H is not Hermitian to 1e-10 or the noise shapes disagree.
  void validate() const;
};

/// Superoperator of -i[H, .] + sum_k D_{L_k}.
ComplexMatrix liouvillian(const LindbladSpec& spec);

/// Hermitian, unit-trace, positive semidefinite matrix (checked to `tol`).
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m, double tol = 1e-10);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.rows(); }
  double min_eigenvalue() const noexcept { return min_eig_; }

 private:
  ComplexMatrix m_;
  double min_eig_ = 0.0;
};

/// Gibbs state e^{-βH}/tr e^{-βH}; eigenvalues are shifted by the ground
/// energy before exponentiation.
DensityMatrix thermal_state(const ComplexMatrix& h, double beta);

/// tr_B of an operator on C^{d_S} ⊗ C^{d_B} (system is the left factor).
ComplexMatrix partial_trace_bath(const ComplexMatrix& x, std::size_t d_s, std::size_t d_b);

/// R = tr_B and J(μ) = μ ⊗ τ in vectorized form. τ must have every eigenvalue
/// above `min_eig`; pass 0 to accept a rank-deficient reference state.
ProjectorFactorization bipartite_factors(std::size_t d_s, std::size_t d_b,
                                         const DensityMatrix& tau, double min_eig = 1e-12);

/// R extracts the diagonal, J places a vector on the diagonal.
ProjectorFactorization diagonal_factors(std::size_t d);

/// tr_B[(I_S ⊗ τ) H].
ComplexMatrix reduced_hamiltonian(const ComplexMatrix& h, const DensityMatrix& tau,
                                  std::size_t d_s);

/// H = sum_k S_k ⊗ E_k with Hermitian factors.
struct BipartiteDecomposition {
  std::vector<ComplexMatrix> system_ops;
  std::vector<ComplexMatrix> bath_ops;
};

/// Operator-Schmidt split of a Hermitian H across the system|bath cut. The
/// system factors are combinations of an orthonormal Hermitian basis chosen
/// so the bath factors are HS-orthogonal; terms below `rel_tol` of the
/// largest are dropped.
BipartiteDecomposition operator_schmidt(const ComplexMatrix& h, std::size_t d_s,
                                        double rel_tol = 1e-14);

struct CovarianceStructure {
  std::vector<ComplexMatrix> system_ops;
  std::vector<double> means;    // a_k = tr[τ E_k]
  ComplexMatrix chi;            // c_jk - a_j a_k
  std::vector<double> rates;    // eigenvalues of chi, ascending
  std::vector<ComplexMatrix> lindblad_ops;  // L_h = sum_j V_jh S_j
  ComplexMatrix reduced_hamiltonian;        // sum_k a_k S_k
  double min_chi_eigenvalue = 0.0;
  bool psd_violation = false;  // min eigenvalue below -1e-8 (relative)

  /// Superoperator of μ -> sum_jk χ_jk [2 S_j μ S_k - {S_k S_j, μ}].
  ComplexMatrix f2_superop() const;
  /// Same map rebuilt as sum_h γ_h D_{sqrt(2) L_h}.
  ComplexMatrix f2_from_rates() const;
};

CovarianceStructure second_order_structure(const ComplexMatrix& h, const DensityMatrix& tau,
                                           std::size_t d_s);
/// Variant for a caller-supplied decomposition (factors need not be orthogonal).
CovarianceStructure second_order_structure(const BipartiteDecomposition& decomposition,
                                           const DensityMatrix& tau);

/// ||F_(2) from the recursion - F_(2) from the covariance structure||_HS for
/// the purely Hamiltonian generator of `h`.
double structural_vs_recursive_F2(const ComplexMatrix& h, const DensityMatrix& tau,
                                  std::size_t d_s);

/// Choi matrix sum_{ce} |c><e| ⊗ Φ(|c><e|), built by index reshuffle.
ComplexMatrix choi(const ComplexMatrix& phi);

struct CptpVerdict {
  bool trace_preserving = false;
  bool completely_positive = false;
  double tp_residual = 0.0;
  double min_choi_eigenvalue = 0.0;
  bool ok() const noexcept { return trace_preserving && completely_positive; }
};

CptpVerdict is_cptp_map(const ComplexMatrix& phi, double tol);

struct LindbladVerdict {
  bool hermiticity_preserving = false;
  bool trace_annihilating = false;
  bool conditionally_cp = false;
  double hermiticity_residual = 0.0;
  double trace_residual = 0.0;
  double min_projected_choi_eigenvalue = 0.0;
  bool ok() const noexcept {
    return hermiticity_preserving && trace_annihilating && conditionally_cp;
  }
};

LindbladVerdict is_lindblad_type(const ComplexMatrix& g, double tol);

struct ClassicalVerdict {
  bool real = false;
  bool metzler = false;
  bool zero_column_sums = false;
  double max_imag = 0.0;
  double min_off_diagonal = 0.0;
  double max_column_sum = 0.0;
  bool ok() const noexcept { return real && metzler && zero_column_sums; }
};

ClassicalVerdict classical_generator_checks(const ComplexMatrix& f, double tol);

/// Lifts a d x d classical generator to a d^2 x d^2 superoperator that is
/// Lindblad-type exactly when F is Metzler with zero column sums, and whose
/// diagonal reduction is F again:
///   G = sum_{j != k} F_jk D_{|j><k|} + sum_k c_k (X -> |k><k| X |k><k|),
/// with c_k the k-th column sum.
ComplexMatrix classical_embedding(const ComplexMatrix& f);

enum class StateKind { kDensityMatrix, kProbabilityVector };

/// Index of the first state that leaves the state space: min eigenvalue below
/// -tol for density matrices (given as d x d or vectorized), min entry below
/// -tol for probability vectors.
std::optional<std::size_t> positivity_exit_index(const Trajectory& traj, StateKind kind,
                                                 double tol);
std::optional<double> positivity_exit_time(const Trajectory& traj, StateKind kind, double tol);

/// Smallest eigenvalue of the Hermitian part of a (possibly vectorized) state.
double min_state_eigenvalue(const ComplexMatrix& state);

/// (<σx>, <σy>, <σz>) of a qubit state (2 x 2 or vectorized).
std::array<double, 3> bloch_vector(const ComplexMatrix& state);

}  // namespace tred
