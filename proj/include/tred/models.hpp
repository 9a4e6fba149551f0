#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <random>
#include <vector>

#include "tred/linalg.hpp"
#include "tred/propagation.hpp"
#include "tred/quantum.hpp"
#include "tred/reduction.hpp"

namespace tred {

/// Uniform double in [0, 1) from the top 53 bits, so streams are identical
/// across standard libraries (std::uniform_real_distribution is not).
double uniform01(std::mt19937_64& rng);

/// Matrix with independent U[0,1) real entries.
ComplexMatrix random_uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// op acting on `site` of `n_sites` qubits, identity elsewhere (site 0 is the
/// leftmost tensor factor).
ComplexMatrix site_operator(const ComplexMatrix& op, std::size_t site, std::size_t n_sites);

// ---------------------------------------------------------------- linear testbed

struct LinearTestbed {
  ComplexMatrix generator;
  ProjectorFactorization proj;
};

/// B = A - |λ_max(A)| I for A with U[0,1] entries, L = B / (2 ||B||_op),
/// R = [I_m | 0], J = R^T.
LinearTestbed linear_testbed(std::size_t n, std::size_t m, std::uint64_t seed);

// ---------------------------------------------------------------- spin-boson

struct SpinBosonParams {
  double g = 1.8;
  double omega_c = 0.2;
  double Lambda = 0.5;
  double s = 1.0;
  double beta = 10.0;
  std::size_t n_modes = 100;
  double tau_cg = 160.0;  // 32 / omega_c

  void validate() const;
};

/// Which constant multiplies t in the second-order dephasing rate.
enum class SecondOrderRate {
  kRecursion,   // 2 χ_11 = sum 2|λ|^2 coth(βω/2) = ξ'(0)
  kClosedForm,  // sum 2|λ|^2 / (e^{βω} - 1)
};

struct SpinBosonCoefficients {
  std::vector<double> omega;   // k / N_B, k = 1..N_B
  std::vector<double> lambda;  // sqrt(J(ω_k))
  std::vector<double> alpha;   // 2 λ^2/ω^2 coth(βω/2)
  double phi_closed_form = 0.0;
  double phi_recursion = 0.0;

  double xi(double t) const;
  /// γ(t) = sum α_k (1 - cos ω_k t) / t, with γ(0) = 0.
  double gamma(double t) const;
};

SpinBosonCoefficients spin_boson_coefficients(const SpinBosonParams& p);

/// Spectral density Λ ω_c^{1-s} ω^s e^{-ω/ω_c}.
double spectral_density(const SpinBosonParams& p, double omega);

struct SpinBosonRhs {
  TimeDependentRhs exact;           // ξ(t) D_σz
  TimeDependentRhs second_order;    // φ t D_σz
  TimeDependentRhs coarse_grained;  // γ(τ) D_σz
  double phi = 0.0;                 // the φ actually used
};

/// Right-hand sides μ' = -i[g σz / 2, μ] + rate(t) D_σz(μ) on 2 x 2 states.
SpinBosonRhs spin_boson_rhs(const SpinBosonParams& p,
                            SecondOrderRate rate = SecondOrderRate::kRecursion);

/// Fock-truncated bath (at most two modes) with the explicit split
/// H = I ⊗ H_B + σz ⊗ (g/2 I + sum λ_k (b_k + b_k^dag)).
struct FockOracle {
  ComplexMatrix bath_hamiltonian;
  ComplexMatrix hamiltonian;  // on C^2 ⊗ bath
  DensityMatrix tau;
  BipartiteDecomposition decomposition;
  std::vector<ComplexMatrix> number_ops;
};

FockOracle spin_boson_fock_oracle(const SpinBosonParams& p, std::size_t cutoff);

/// The three spin-boson dynamics from |+><+| on a common RK4 grid.
struct SpinBosonRun {
  std::vector<double> times;
  std::vector<double> sx_exact, sx_second, sx_coarse;
  std::vector<double> err_second, err_coarse;  // trace-norm distance to the exact state
  double phi = 0.0;
  double gamma_tau = 0.0;
};

SpinBosonRun simulate_spin_boson(const SpinBosonParams& p, double t_max, std::size_t steps,
                                 SecondOrderRate rate = SecondOrderRate::kRecursion);

// ---------------------------------------------------------------- central spin

struct CentralSpinParams {
  std::size_t n_bath = 3;
  double delta = 0.3;
  double lambda = 0.1;
  double gamma = 1.0;
  double a_x = 1.2;
  double a_y = 1.5;
  double a_z = 1.3;
  double beta = 50.0;
  double Lambda_diss = 0.0;

  void validate() const;
};

struct CentralSpinModel {
  LindbladSpec spec;
  ComplexMatrix generator;  // liouvillian(spec)
  DensityMatrix bath_state;
  ProjectorFactorization proj;
  ComplexMatrix mu0;  // |+><+| on the central spin
};

CentralSpinModel central_spin_model(const CentralSpinParams& p);

// ---------------------------------------------------------------- Ising chain

struct IsingParams {
  std::size_t n_spins = 4;
  double h = 0.36;
  double A = 0.3;

  void validate() const;
};

struct IsingModel {
  LindbladSpec spec;
  ComplexMatrix generator;
  ProjectorFactorization proj;
  ComplexMatrix p0;  // e_0
};

IsingModel ising_chain_model(const IsingParams& p);

/// Exact reduced trajectory and one polynomial-generator trajectory per
/// order on the uniform grid k t_max/steps. Approximate trajectories that
/// overflow stop early (`approx[i].diverged`).
struct ReducedRun {
  Trajectory exact;
  std::vector<std::size_t> orders;
  std::vector<Trajectory> approx;
  std::vector<std::vector<double>> error;  // per order, per grid point; NaN after divergence
  std::vector<std::optional<double>> exit_time;
};

/// Central spin: errors in trace norm, exits from the density matrices.
ReducedRun simulate_central_spin(const CentralSpinParams& p, std::span<const std::size_t> orders,
                                 double t_max, std::size_t steps, double exit_tol = 1e-9);
/// Ising chain: errors in the 2-norm, exits from the probability simplex.
ReducedRun simulate_ising(const IsingParams& p, std::span<const std::size_t> orders,
                          double t_max, std::size_t steps, double exit_tol = 1e-9);

}  // namespace tred
