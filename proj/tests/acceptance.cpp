// Acceptance checks. Prints one PASS/FAIL line per criterion; each check is
// timed and fails if it exceeds its runtime limit. Exit status is nonzero if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "tred/harness.hpp"
#include "tred/kernels.hpp"
#include "tred/models.hpp"
#include "tred/propagation.hpp"
#include "tred/quantum.hpp"
#include "tred/reduction.hpp"

using namespace tred;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> check;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double rel_diff(const ComplexMatrix& a, const ComplexMatrix& ref) {
  return oracle::frob(oracle::add(a, ref, -1.0)) / std::max(oracle::frob(ref), 1e-300);
}

// ---------------------------------------------------------------- 1

Outcome series_collapse() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const std::size_t n = 5 + seed % 6;
    const std::size_t m = 1 + seed % 4;
    const std::size_t N = seed % 7;
    auto sys = oracle::random_system(n, m, rng);
    const ProjectorFactorization proj =
        seed % 2 == 0 ? sys.proj : oracle::oblique_factors(n, m, rng);
    const PropagatorSeries s = build_E_terms(build_F_terms(sys.L, proj, N), N + 1);
    for (std::size_t k = 1; k <= N + 1; ++k)
      worst = std::max(worst, rel_diff(s.terms[k], oracle::scaled_moment(sys.L, proj, k)));
  }
  return {worst <= 1e-10, "max rel err " + sci(worst) + " over 20 systems"};
}

// ---------------------------------------------------------------- 2

Outcome third_coefficient() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const ComplexMatrix f1 = oracle::random_complex(3, 3, rng);
    const ComplexMatrix f2 = oracle::random_complex(3, 3, rng);
    const ComplexMatrix f3 = oracle::random_complex(3, 3, rng);
    const PropagatorSeries s = build_E_terms(PolyGenerator({f1, f2, f3}), 3);
    using oracle::add, oracle::mul, oracle::scale;
    ComplexMatrix ref = scale(f3, 1.0 / 3);
    ref = add(ref, mul(f2, f1), 1.0 / 3);
    ref = add(ref, mul(f1, f2), 1.0 / 6);
    ref = add(ref, mul(mul(f1, f1), f1), 1.0 / 6);
    worst = std::max(worst, oracle::max_abs_diff(s.terms[3], ref));
  }
  return {worst <= 1e-12, "max abs err " + sci(worst) + " over 200 triples"};
}

// ---------------------------------------------------------------- 3

Outcome order_of_accuracy() {
  const LinearTestbed tb = linear_testbed(20, 4, 1);
  const double scale = 1.0 / op_norm(tb.generator);
  const double t_lo = 1e-3 * scale, t_hi = 1e-1 * scale;
  std::vector<double> grid;
  for (int i = 0; i <= 240; ++i) grid.push_back(t_lo * std::pow(t_hi / t_lo, i / 240.0));
  bool pass = true;
  std::string detail;
  for (std::size_t N : {1u, 2u, 5u}) {
    const PolyGenerator gen = build_F_terms(tb.generator, tb.proj, N);
    const auto rows = error_curve(tb.generator, tb.proj, gen, 100, grid);
    std::vector<double> t, e;
    for (const auto& r : rows) {
      t.push_back(r.t);
      e.push_back(r.error);
    }
    const SlopeFit f = fit_log_slope(t, e, t_lo, t_hi);
    const bool ok = f.fitted && f.slope >= static_cast<double>(N) + 1.0 - 0.3;
    pass = pass && ok;
    detail += "N=" + std::to_string(N) + ": " +
              (f.fitted ? "p=" + sci(f.slope) + " (" + std::to_string(f.points) + " pts)"
                        : "no fit, " + f.reason) +
              "; ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 4

Outcome oracle_taylor() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(4000 + seed);
    const std::size_t n = 4 + seed;
    const std::size_t m = 1 + seed % 3;
    const auto sys = oracle::random_system(n, m, rng);
    const PolyGenerator gen = build_F_terms(sys.L, sys.proj, 3);
    const auto fd = oracle::fd_taylor(
        [&](double t) { return detail::tcl_generator_signed(sys.L, sys.proj, t, 4); }, 1e-2);
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, rel_diff(fd[k], gen.term(k + 1)));
  }
  return {worst <= 1e-5, "max rel err " + sci(worst) + " over F_(1)..F_(4), 5 systems"};
}

// ---------------------------------------------------------------- 5

Outcome commuting_case() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    const std::size_t d = 2 + seed % 4;
    std::vector<ComplexMatrix> c;
    if (seed % 2 == 0) {
      // Polynomials in one matrix.
      const ComplexMatrix A = oracle::random_complex(d, d, rng);
      ComplexMatrix pw = ComplexMatrix::identity(d);
      for (std::size_t k = 0; k <= seed % 4 + 1; ++k) {
        pw = oracle::mul(pw, A);
        c.push_back(oracle::add(pw, ComplexMatrix::identity(d), 0.3 * static_cast<double>(k)));
      }
    } else {
      // Simultaneously diagonalizable: V diag(random) V^-1 with a shared V.
      const ComplexMatrix V = oracle::add(ComplexMatrix::identity(d), oracle::random_complex(d, d, rng), 0.2);
      const ComplexMatrix Vinv = lu_solve(V, ComplexMatrix::identity(d)).x;
      for (std::size_t k = 0; k <= seed % 4 + 1; ++k) {
        const ComplexMatrix D = oracle::random_complex(d, 1, rng);
        ComplexMatrix diag(d, d);
        for (std::size_t i = 0; i < d; ++i) diag(i, i) = D(i, 0);
        c.push_back(oracle::mul(oracle::mul(V, diag), Vinv));
      }
    }
    double fmax = 0.0;
    for (const auto& f : c) fmax = std::max(fmax, op_norm(f));
    const PropagatorSeries s = build_E_terms(PolyGenerator(c), 100);
    for (double frac : {0.1, 0.5, 1.0}) {
      const double t = frac / fmax;
      ComplexMatrix exponent(d, d);
      for (std::size_t k = 0; k < c.size(); ++k)
        exponent = oracle::add(exponent, c[k], std::pow(t, k + 1) / static_cast<double>(k + 1));
      const ComplexMatrix ref = oracle::taylor_expm(exponent);
      worst = std::max(worst, oracle::max_abs_diff(eval_series(s, t), ref) /
                                  std::max(1.0, oracle::frob(ref)));
    }
  }
  return {worst <= 1e-8, "max err " + sci(worst) + " over 6 families"};
}

// ---------------------------------------------------------------- 6, 7 helpers

struct QuantumCase {
  std::string label;
  ComplexMatrix hamiltonian;  // full system+bath
  DensityMatrix tau;
  ComplexMatrix generator;
  ProjectorFactorization proj;
};

std::vector<QuantumCase> quantum_cases(std::size_t random_count, bool vary_bath) {
  std::vector<QuantumCase> cases;
  const CentralSpinModel cs = central_spin_model(CentralSpinParams{});
  cases.push_back({"central-spin", cs.spec.hamiltonian, cs.bath_state, cs.generator, cs.proj});
  std::mt19937_64 rng(6000);
  for (std::size_t i = 0; i < random_count; ++i) {
    const std::size_t d_b = vary_bath ? 2 + i : 2;
    const ComplexMatrix h = oracle::random_hermitian(2 * d_b, rng);
    DensityMatrix tau(oracle::random_density(d_b, rng));
    const ProjectorFactorization proj = bipartite_factors(2, d_b, tau);
    cases.push_back({"random-" + std::to_string(i), h, tau, hamiltonian_superop(h), proj});
  }
  return cases;
}

Outcome quantum_cptp() {
  bool pass = true;
  double worst_lind = 0.0, worst_choi = 0.0, worst_tp = 0.0;
  std::string failures;
  for (const QuantumCase& qc : quantum_cases(3, false)) {
    const PolyGenerator gen = build_F_terms(qc.generator, qc.proj, 1);
    for (std::size_t k : {1u, 2u}) {
      const LindbladVerdict v = is_lindblad_type(gen.term(k), 1e-9);
      worst_lind = std::min(worst_lind, v.min_projected_choi_eigenvalue);
      if (!v.ok()) {
        pass = false;
        failures += qc.label + " F_(" + std::to_string(k) + ") not Lindblad-type; ";
      }
    }
    const double f1 = op_norm(gen.term(1));
    for (double frac : {0.1, 0.5, 1.0}) {
      const double t = frac / f1;
      const Trajectory traj = integrate_ltv(gen, ComplexMatrix::identity(4), t, 2000);
      const CptpVerdict v = is_cptp_map(traj.states.back(), 1e-8);
      worst_choi = std::min(worst_choi, v.min_choi_eigenvalue);
      worst_tp = std::max(worst_tp, v.tp_residual);
      if (!v.ok()) {
        pass = false;
        failures += qc.label + " map at t=" + sci(t) + " not CPTP; ";
      }
    }
  }
  return {pass, failures + "min projected Choi eig " + sci(worst_lind) + ", min Choi eig " +
                    sci(worst_choi) + ", TP residual " + sci(worst_tp)};
}

Outcome structural_f2() {
  double worst = 0.0;
  for (const QuantumCase& qc : quantum_cases(3, true))
    worst = std::max(worst, structural_vs_recursive_F2(qc.hamiltonian, qc.tau, 2));
  return {worst <= 1e-10, "max residual " + sci(worst) + " over 4 models"};
}

// ---------------------------------------------------------------- 8

Outcome fock_coefficients() {
  SpinBosonParams p;
  p.n_modes = 2;
  const FockOracle fo = spin_boson_fock_oracle(p, 20);
  const CovarianceStructure cs = second_order_structure(fo.decomposition, fo.tau);
  const SpinBosonCoefficients c = spin_boson_coefficients(p);
  const double chi10 = std::abs(cs.chi(1, 0));
  const double chi11 = cs.chi(1, 1).real();
  const double phi = c.phi_closed_form;
  const bool pass = chi10 <= 1e-8 && std::abs(chi11 - phi) <= 1e-6 * std::abs(phi);
  return {pass, "chi10 " + sci(chi10) + ", chi11 " + sci(chi11) + ", phi " + sci(phi) +
                    ", 2*chi11/recursion rate " + sci(2 * chi11 / c.phi_recursion)};
}

// ---------------------------------------------------------------- 9

Outcome spin_boson_windows() {
  bool pass = true;
  std::string detail;
  for (double s : {0.5, 1.0, 1.5}) {
    SpinBosonParams p;
    p.s = s;
    const ExperimentConfig dflt = default_config("spin-boson");
    const SpinBosonRun run = simulate_spin_boson(p, dflt.t_max, dflt.steps);
    const std::size_t n = run.times.size();
    const std::size_t edge = n / 10;
    std::size_t bad = 0;
    for (std::size_t i = 1; i <= edge; ++i) bad += !(run.err_second[i] < run.err_coarse[i]);
    for (std::size_t i = n - edge; i < n; ++i) bad += !(run.err_second[i] < run.err_coarse[i]);
    pass = pass && bad == 0;
    detail += "s=" + sci(s) + ": " + std::to_string(bad) + " violations; ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 10

Outcome ising_structure() {
  const IsingModel m = ising_chain_model(IsingParams{});
  const PolyGenerator gen = build_F_terms(m.generator, m.proj, 2);
  const double f1 = hs_norm(gen.term(1));
  const double f3 = hs_norm(gen.term(3));
  const ClassicalVerdict v = classical_generator_checks(gen.term(2), 1e-10);
  const std::vector<std::size_t> orders{2, 4, 10, 20};
  const ExperimentConfig dflt = default_config("ising-chain");
  const ReducedRun r = simulate_ising(IsingParams{}, orders, dflt.t_max, dflt.steps, 1e-9);
  const bool n2_stays = !r.exit_time[0].has_value();
  bool some_exit = false;
  std::string exits;
  for (std::size_t i = 1; i < orders.size(); ++i) {
    some_exit = some_exit || r.exit_time[i].has_value();
    exits += "N=" + std::to_string(orders[i]) + " exit " +
             (r.exit_time[i] ? sci(*r.exit_time[i]) : std::string("none")) + "; ";
  }
  const bool pass = f1 <= 1e-10 && f3 <= 1e-10 && v.metzler && v.zero_column_sums && v.real &&
                    n2_stays && some_exit;
  return {pass, "|F1| " + sci(f1) + ", |F3| " + sci(f3) + ", F2 Metzler " +
                    (v.metzler ? "yes" : "no") + ", col sums " + sci(v.max_column_sum) +
                    ", N=2 exit " + (n2_stays ? "none" : sci(*r.exit_time[0])) + "; " + exits};
}

// ---------------------------------------------------------------- 11

Outcome central_spin_monotone() {
  bool pass = true;
  std::string detail;
  const std::vector<std::size_t> orders{1, 2, 3, 4};
  for (double lam : {0.0, 0.8}) {
    CentralSpinParams p;
    p.Lambda_diss = lam;
    const ReducedRun r = simulate_central_spin(p, orders, 0.5, 100);
    detail += "Lambda=" + sci(lam) + ":";
    for (std::size_t i = 0; i < orders.size(); ++i) {
      const double e = r.error[i].back();
      detail += " " + sci(e);
      if (i > 0 && !(e <= r.error[i - 1].back())) pass = false;
    }
    detail += "; ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 12

std::vector<std::pair<std::string, std::string>> run_suite(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  const fs::path model = root / "model.json";
  fs::create_directories(root);
  std::ofstream(model) << R"({"n": 3, "m": 1, "L": [[0, -1, 0.5], [1, -0.2, 0], [0.3, 0, -1]],)"
                       << R"( "R": [[1, 0, 0]], "J": [[1], [0], [0]]})";
  for (const std::string& name : experiment_names()) {
    ExperimentConfig c = default_config(name);
    if (name == "reduce") c.params["model"] = model.string();
    c.output_dir = root / name;
    run(c);
  }
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files.emplace_back(fs::relative(entry.path(), root).string(),
                       std::string(std::istreambuf_iterator<char>(in), {}));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "tred_acceptance_determinism";
  fs::remove_all(base);
  // Second pass on one thread: output must not depend on the team size either.
  const auto a = run_suite(base / "a");
  kernels::set_thread_cap(1);
  const auto b = run_suite(base / "b");
  kernels::set_thread_cap(0);
  std::size_t differing = 0;
  if (a.size() != b.size()) return {false, "different file sets"};
  for (std::size_t i = 0; i < a.size(); ++i)
    differing += a[i].first != b[i].first || a[i].second != b[i].second;
  std::size_t bytes = 0;
  for (const auto& f : a) bytes += f.second.size();
  fs::remove_all(base);
  return {differing == 0 && !a.empty(), std::to_string(a.size()) + " CSV files, " +
                                            std::to_string(bytes) + " bytes, " +
                                            std::to_string(differing) + " differ"};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "series coefficients equal R L^k J / k!", 5, series_collapse},
      {2, "third coefficient explicit form", 1, third_coefficient},
      {3, "order of accuracy", 30, order_of_accuracy},
      {4, "exact generator Taylor coefficients", 60, oracle_taylor},
      {5, "commuting closed form", 5, commuting_case},
      {6, "first/second order Lindblad-type and CPTP", 120, quantum_cptp},
      {7, "structural second-order coefficient", 60, structural_f2},
      {8, "spin-boson bath covariances", 30, fock_coefficients},
      {9, "spin-boson second order beats coarse graining", 30, spin_boson_windows},
      {10, "Ising chain structure and positivity", 120, ising_structure},
      {11, "central-spin error monotone in N", 180, central_spin_monotone},
      {12, "determinism", 600, determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tred acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool ok = out.pass && in_time;
    failed += !ok;
    std::printf("criterion %2d %s: %s (%s) [%.2f s / %.0f s%s]\n", c.id, ok ? "PASS" : "FAIL",
                c.name, out.detail.c_str(), secs, c.limit_s, in_time ? "" : ", over limit");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
