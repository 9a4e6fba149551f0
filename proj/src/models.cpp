#include "tred/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tred/errors.hpp"
#include "tred/kernels.hpp"

namespace tred {
namespace {

constexpr cplx kI{0.0, 1.0};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw PreconditionError(std::string(what) + " must be positive and finite");
  }
}

// -i[H, μ] + rate D_σz(μ) for a 2 x 2 μ, with H = (g/2) σz. Written out
// entrywise: diagonals are constant, coherences rotate and decay.
ComplexMatrix dephasing_rhs(double g, double rate, const ComplexMatrix& mu) {
  ComplexMatrix d(2, 2);
  d(0, 1) = (-kI * g - 2.0 * rate) * mu(0, 1);
  d(1, 0) = (kI * g - 2.0 * rate) * mu(1, 0);
  return d;
}

using ErrorFn = double (*)(const ComplexMatrix&, const ComplexMatrix&);

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return trace_norm(unvec(a - b));
}

double euclidean_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return hs_norm(a - b);
}

ReducedRun simulate_reduced(const ComplexMatrix& generator, const ProjectorFactorization& proj,
                            const ComplexMatrix& z0, std::span<const std::size_t> orders,
                            double t_max, std::size_t steps, ErrorFn distance, StateKind kind,
                            double exit_tol) {
  ReducedRun run;
  run.exact = exact_reduced_trajectory(generator, proj, z0, t_max, steps);
  run.orders.assign(orders.begin(), orders.end());
  const std::size_t count = orders.size();
  run.approx.resize(count);
  run.error.resize(count);
  run.exit_time.resize(count);
  // One order per iteration; every output slot is owned by one iteration.
#pragma omp parallel for schedule(dynamic) num_threads(kernels::team_size())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const PolyGenerator gen = build_F_terms(generator, proj, orders[k]);
    Trajectory traj = integrate_ltv(gen, z0, t_max, steps);
    std::vector<double> err(run.exact.times.size(), std::nan(""));
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      err[j] = distance(run.exact.states[j], traj.states[j]);
    }
    run.exit_time[k] = positivity_exit_time(traj, kind, exit_tol);
    run.error[k] = std::move(err);
    run.approx[k] = std::move(traj);
  }
  return run;
}

ComplexMatrix annihilation(std::size_t cutoff) {
  ComplexMatrix b(cutoff, cutoff);
  for (std::size_t n = 1; n < cutoff; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

}  // namespace

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ComplexMatrix random_uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  ComplexMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = uniform01(rng);
  return a;
}

ComplexMatrix site_operator(const ComplexMatrix& op, std::size_t site, std::size_t n_sites) {
  if (site >= n_sites) throw DimensionError("site_operator: site out of range");
  ComplexMatrix out = site == 0 ? op : ComplexMatrix::identity(op.rows());
  for (std::size_t k = 1; k < n_sites; ++k) {
    out = kron(out, k == site ? op : ComplexMatrix::identity(op.rows()));
  }
  return out;
}

LinearTestbed linear_testbed(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0 || m >= n) throw PreconditionError("linear_testbed: need 1 <= m < n");
  std::mt19937_64 rng(seed);
  ComplexMatrix b = random_uniform_matrix(n, n, rng);
  double lmax = 0.0;
  for (const cplx& ev : eigenvalues(b)) lmax = std::max(lmax, std::abs(ev));
  b -= lmax * ComplexMatrix::identity(n);
  b *= 0.5 / op_norm(b);
  ComplexMatrix r(m, n);
  for (std::size_t i = 0; i < m; ++i) r(i, i) = 1.0;
  ComplexMatrix j = r.transpose();
  return {std::move(b), ProjectorFactorization(std::move(r), std::move(j))};
}

void SpinBosonParams::validate() const {
  require_positive(g, "g");
  require_positive(omega_c, "omega_c");
  require_positive(Lambda, "Lambda");
  require_positive(s, "s");
  require_positive(beta, "beta");
  require_positive(tau_cg, "tau_cg");
  if (n_modes == 0) throw PreconditionError("n_modes must be >= 1");
}

double spectral_density(const SpinBosonParams& p, double omega) {
  return p.Lambda * std::pow(p.omega_c, 1.0 - p.s) * std::pow(omega, p.s) *
         std::exp(-omega / p.omega_c);
}

SpinBosonCoefficients spin_boson_coefficients(const SpinBosonParams& p) {
  p.validate();
  SpinBosonCoefficients c;
  for (std::size_t k = 1; k <= p.n_modes; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(p.n_modes);
    const double lam = std::sqrt(spectral_density(p, w));
    const double coth = 1.0 / std::tanh(0.5 * p.beta * w);
    c.omega.push_back(w);
    c.lambda.push_back(lam);
    c.alpha.push_back(2.0 * lam * lam / (w * w) * coth);
    c.phi_closed_form += 2.0 * lam * lam / std::expm1(p.beta * w);
    c.phi_recursion += 2.0 * lam * lam * coth;
  }
  return c;
}

double SpinBosonCoefficients::xi(double t) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) acc += alpha[k] * omega[k] * std::sin(omega[k] * t);
  return acc;
}

double SpinBosonCoefficients::gamma(double t) const {
  if (t == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    // 1 - cos x = 2 sin^2(x/2), stable for small x
    const double h = std::sin(0.5 * omega[k] * t);
    acc += alpha[k] * 2.0 * h * h;
  }
  return acc / t;
}

SpinBosonRhs spin_boson_rhs(const SpinBosonParams& p, SecondOrderRate rate) {
  const auto coeffs = std::make_shared<const SpinBosonCoefficients>(spin_boson_coefficients(p));
  const double g = p.g;
  const double phi =
      rate == SecondOrderRate::kRecursion ? coeffs->phi_recursion : coeffs->phi_closed_form;
  const double gamma_tau = coeffs->gamma(p.tau_cg);
  SpinBosonRhs out;
  out.phi = phi;
  out.exact = [coeffs, g](double t, const ComplexMatrix& mu) {
    return dephasing_rhs(g, coeffs->xi(t), mu);
  };
  out.second_order = [g, phi](double t, const ComplexMatrix& mu) {
    return dephasing_rhs(g, phi * t, mu);
  };
  out.coarse_grained = [g, gamma_tau](double, const ComplexMatrix& mu) {
    return dephasing_rhs(g, gamma_tau, mu);
  };
  return out;
}

FockOracle spin_boson_fock_oracle(const SpinBosonParams& p, std::size_t cutoff) {
  if (p.n_modes == 0 || p.n_modes > 2) {
    throw PreconditionError("spin_boson_fock_oracle: supports one or two modes");
  }
  if (cutoff < 5) throw PreconditionError("spin_boson_fock_oracle: cutoff must be >= 5");
  const SpinBosonCoefficients c = spin_boson_coefficients(p);
  const ComplexMatrix b1 = annihilation(cutoff);
  const ComplexMatrix id = ComplexMatrix::identity(cutoff);
  std::vector<ComplexMatrix> modes;
  if (p.n_modes == 1) {
    modes.push_back(b1);
  } else {
    modes.push_back(kron(b1, id));
    modes.push_back(kron(id, b1));
  }
  const std::size_t d_b = modes.front().rows();
  ComplexMatrix h_b(d_b, d_b);
  ComplexMatrix coupling = (0.5 * p.g) * ComplexMatrix::identity(d_b);
  std::vector<ComplexMatrix> numbers;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    ComplexMatrix n_k = modes[k].adjoint() * modes[k];
    h_b.add_scaled(n_k + 0.5 * ComplexMatrix::identity(d_b), c.omega[k]);
    coupling.add_scaled(modes[k] + modes[k].adjoint(), c.lambda[k]);
    numbers.push_back(std::move(n_k));
  }
  ComplexMatrix h = kron(pauli::id(), h_b) + kron(pauli::z(), coupling);
  DensityMatrix tau = thermal_state(h_b, p.beta);
  BipartiteDecomposition dec{{pauli::id(), pauli::z()}, {h_b, coupling}};
  return {std::move(h_b), std::move(h), std::move(tau), std::move(dec), std::move(numbers)};
}

SpinBosonRun simulate_spin_boson(const SpinBosonParams& p, double t_max, std::size_t steps,
                                 SecondOrderRate rate) {
  const SpinBosonRhs rhs = spin_boson_rhs(p, rate);
  const ComplexMatrix plus = 0.5 * ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}};
  const Trajectory exact = integrate_rk4(rhs.exact, plus, t_max, steps);
  const Trajectory second = integrate_rk4(rhs.second_order, plus, t_max, steps);
  const Trajectory coarse = integrate_rk4(rhs.coarse_grained, plus, t_max, steps);
  SpinBosonRun out;
  out.phi = rhs.phi;
  out.gamma_tau = spin_boson_coefficients(p).gamma(p.tau_cg);
  out.times = exact.times;
  for (std::size_t i = 0; i < exact.times.size(); ++i) {
    out.sx_exact.push_back(bloch_vector(exact.states[i])[0]);
    out.sx_second.push_back(bloch_vector(second.states[i])[0]);
    out.sx_coarse.push_back(bloch_vector(coarse.states[i])[0]);
    out.err_second.push_back(trace_norm(exact.states[i] - second.states[i]));
    out.err_coarse.push_back(trace_norm(exact.states[i] - coarse.states[i]));
  }
  return out;
}

void CentralSpinParams::validate() const {
  if (n_bath == 0) throw PreconditionError("n_bath must be >= 1");
  for (double v : {delta, lambda, gamma, a_x, a_y, a_z, beta, Lambda_diss}) {
    if (!std::isfinite(v)) throw PreconditionError("central spin couplings must be finite");
  }
  if (beta < 0.0) throw PreconditionError("beta must be >= 0");
}

CentralSpinModel central_spin_model(const CentralSpinParams& p) {
  p.validate();
  const std::size_t nb = p.n_bath;
  const std::size_t d_b = std::size_t{1} << nb;

  ComplexMatrix jx(d_b, d_b), jy(d_b, d_b), jz(d_b, d_b);
  for (std::size_t k = 0; k < nb; ++k) {
    jx.add_scaled(site_operator(pauli::x(), k, nb), 0.5);
    jy.add_scaled(site_operator(pauli::y(), k, nb), 0.5);
    jz.add_scaled(site_operator(pauli::z(), k, nb), 0.5);
  }
  ComplexMatrix h_b = 2.0 * (jx * jx);
  h_b.add_scaled(ComplexMatrix::identity(d_b), -0.5 * static_cast<double>(nb));
  h_b *= 0.25 * p.gamma;

  const ComplexMatrix h_s = p.delta * (pauli::x() + pauli::z());
  ComplexMatrix h = kron(h_s, ComplexMatrix::identity(d_b)) + kron(pauli::id(), h_b);
  h.add_scaled(kron(pauli::x(), jx), 0.5 * p.lambda * p.a_x);
  h.add_scaled(kron(pauli::y(), jy), 0.5 * p.lambda * p.a_y);
  h.add_scaled(kron(pauli::z(), jz), 0.5 * p.lambda * p.a_z);

  LindbladSpec spec{std::move(h), {}};
  if (p.Lambda_diss != 0.0) {
    for (std::size_t k = 1; k <= nb; ++k) {
      spec.noise_ops.push_back(p.Lambda_diss * site_operator(pauli::lower(), k, nb + 1));
    }
  }
  ComplexMatrix generator = liouvillian(spec);
  // At β = 50 the excited bath levels carry weights near e^{-50}; the
  // reference state is a valid but numerically rank-deficient density matrix.
  DensityMatrix tau = thermal_state(h_b, p.beta);
  ProjectorFactorization proj = bipartite_factors(2, d_b, tau, 0.0);
  ComplexMatrix mu0 = 0.5 * ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}};
  return {std::move(spec), std::move(generator), std::move(tau), std::move(proj),
          std::move(mu0)};
}

void IsingParams::validate() const {
  if (n_spins < 2) throw PreconditionError("n_spins must be >= 2");
  if (!std::isfinite(h) || !std::isfinite(A)) throw PreconditionError("h and A must be finite");
}

IsingModel ising_chain_model(const IsingParams& p) {
  p.validate();
  const std::size_t n = p.n_spins;
  const std::size_t d = std::size_t{1} << n;
  ComplexMatrix h(d, d);
  for (std::size_t j = 0; j < n; ++j) h.add_scaled(site_operator(pauli::z(), j, n), p.h);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    h.add_scaled(site_operator(pauli::x(), j, n) * site_operator(pauli::x(), j + 1, n), p.A);
  }
  LindbladSpec spec{std::move(h), {}};
  ComplexMatrix generator = liouvillian(spec);
  ComplexMatrix p0(d, 1);
  p0(0, 0) = 1.0;
  return {std::move(spec), std::move(generator), diagonal_factors(d), std::move(p0)};
}

ReducedRun simulate_central_spin(const CentralSpinParams& p, std::span<const std::size_t> orders,
                                 double t_max, std::size_t steps, double exit_tol) {
  const CentralSpinModel model = central_spin_model(p);
  return simulate_reduced(model.generator, model.proj, vec(model.mu0), orders, t_max, steps,
                          trace_distance, StateKind::kDensityMatrix, exit_tol);
}

ReducedRun simulate_ising(const IsingParams& p, std::span<const std::size_t> orders,
                          double t_max, std::size_t steps, double exit_tol) {
  const IsingModel model = ising_chain_model(p);
  return simulate_reduced(model.generator, model.proj, model.p0, orders, t_max, steps,
                          euclidean_distance, StateKind::kProbabilityVector, exit_tol);
}

}  // namespace tred
