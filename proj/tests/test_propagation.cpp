#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tred/errors.hpp"
#include "tred/propagation.hpp"

using namespace tred;

TEST_CASE("series coefficients collapse to R L^k J / k!") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const auto sys = oracle::random_system(8, 3, rng);
    const ProjectorFactorization obl = oracle::oblique_factors(8, 3, rng);
    for (const auto* proj : {&sys.proj, &obl}) {
      for (std::size_t N : {0u, 1u, 4u}) {
        const PropagatorSeries s = build_E_terms(build_F_terms(sys.L, *proj, N), N + 1);
        for (std::size_t k = 1; k <= N + 1; ++k) {
          const ComplexMatrix ref = oracle::scaled_moment(sys.L, *proj, k);
          CHECK(oracle::frob(oracle::add(s.terms[k], ref, -1.0)) <= 1e-12 * oracle::frob(ref));
        }
      }
    }
  }
}

TEST_CASE("third series coefficient written out") {
  std::mt19937_64 rng(32);
  const ComplexMatrix f1 = oracle::random_complex(3, 3, rng);
  const ComplexMatrix f2 = oracle::random_complex(3, 3, rng);
  const ComplexMatrix f3 = oracle::random_complex(3, 3, rng);
  const PropagatorSeries s = build_E_terms(PolyGenerator({f1, f2, f3}), 3);
  using oracle::add, oracle::mul, oracle::scale;
  ComplexMatrix ref = scale(f3, 1.0 / 3);
  ref = add(ref, mul(f2, f1), 1.0 / 3);
  ref = add(ref, mul(f1, f2), 1.0 / 6);
  ref = add(ref, mul(mul(f1, f1), f1), 1.0 / 6);
  CHECK(oracle::max_abs_diff(s.terms[3], ref) < 1e-12);
  CHECK(s.terms[0] == ComplexMatrix::identity(3));
}

TEST_CASE("series sum solves the time-dependent ODE") {
  std::mt19937_64 rng(33);
  std::vector<ComplexMatrix> c;
  for (int k = 0; k < 3; ++k) c.push_back(oracle::scale(oracle::random_complex(4, 4, rng), 0.3));
  const PolyGenerator gen(c);
  const PropagatorSeries s = build_E_terms(gen, 60);
  const ComplexMatrix ref = oracle::rk4(
      [&](double t, const ComplexMatrix& z) { return oracle::mul(oracle::poly_at(c, t), z); },
      ComplexMatrix::identity(4), 1.0, 4000);
  SeriesDiagnostics diag;
  const ComplexMatrix sum = eval_series(s, 1.0, &diag);
  CHECK(oracle::max_abs_diff(sum, ref) < 1e-10);
  CHECK_FALSE(diag.truncation_dominates);

  const Trajectory traj = integrate_ltv(gen, ComplexMatrix::identity(4), 1.0, 500);
  CHECK(traj.times.size() == 501);
  CHECK(oracle::max_abs_diff(traj.states.back(), ref) < 1e-9);
}

TEST_CASE("truncation flag fires when K is too small") {
  const PolyGenerator gen({ComplexMatrix{{2.0}}});
  SeriesDiagnostics diag;
  eval_series(build_E_terms(gen, 3), 5.0, &diag);
  CHECK(diag.truncation_dominates);
}

TEST_CASE("commuting coefficients give an ordinary exponential") {
  // F_(k) = p_k(A) for one matrix A, so everything commutes.
  std::mt19937_64 rng(34);
  const ComplexMatrix A = oracle::scale(oracle::random_complex(4, 4, rng), 0.25);
  const std::vector<ComplexMatrix> c{A, oracle::mul(A, A), oracle::add(A, ComplexMatrix::identity(4), 0.5)};
  const PropagatorSeries s = build_E_terms(PolyGenerator(c), 80);
  for (double t : {0.1, 0.5, 1.0}) {
    ComplexMatrix exponent(4, 4);
    for (std::size_t k = 0; k < c.size(); ++k)
      exponent = oracle::add(exponent, c[k], std::pow(t, k + 1) / static_cast<double>(k + 1));
    CHECK(oracle::max_abs_diff(eval_series(s, t), oracle::taylor_expm(exponent)) < 1e-10);
  }
}

TEST_CASE("exact reduced propagator and trajectory") {
  std::mt19937_64 rng(35);
  const auto sys = oracle::random_system(6, 2, rng);
  const ComplexMatrix ref = oracle::mul(
      oracle::mul(sys.proj.reduction(), oracle::taylor_expm(oracle::scale(sys.L, 2.0))),
      sys.proj.injection());
  CHECK(oracle::max_abs_diff(exact_reduced(sys.L, sys.proj, 2.0), ref) < 1e-12);
  const ComplexMatrix z0{{1.0}, {0.0}};
  const Trajectory traj = exact_reduced_trajectory(sys.L, sys.proj, z0, 2.0, 40);
  CHECK(oracle::max_abs_diff(traj.states.back(), oracle::mul(ref, z0)) < 1e-12);
  CHECK(traj.times[20] == doctest::Approx(1.0));
}

TEST_CASE("Taylor baseline") {
  std::mt19937_64 rng(36);
  const auto sys = oracle::random_system(5, 2, rng);
  ComplexMatrix ref = ComplexMatrix::identity(2);
  for (std::size_t k = 1; k <= 3; ++k)
    ref = oracle::add(ref, oracle::scaled_moment(sys.L, sys.proj, k), std::pow(0.4, k));
  CHECK(oracle::max_abs_diff(taylor_baseline(sys.L, sys.proj, 3, 0.4), ref) < 1e-14);
}

TEST_CASE("error curve scales like t^(N+2)") {
  std::mt19937_64 rng(37);
  const auto sys = oracle::random_system(8, 2, rng);
  const PolyGenerator gen = build_F_terms(sys.L, sys.proj, 1);
  const std::vector<double> grid{0.05, 0.1};
  const auto rows = error_curve(sys.L, sys.proj, gen, 60, grid);
  REQUIRE(rows.size() == 2);
  const double slope = std::log(rows[1].error / rows[0].error) / std::log(2.0);
  CHECK(slope == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("RK4 stops at overflow") {
  const TimeDependentRhs blow = [](double, const ComplexMatrix& x) {
    return oracle::mul(oracle::mul(x, x), x) * cplx(50.0);
  };
  const Trajectory traj = integrate_rk4(blow, ComplexMatrix{{1.0}}, 1.0, 200);
  CHECK(traj.diverged);
  CHECK(traj.states.size() < 201);
  for (const auto& s : traj.states) CHECK(s.all_finite());
  CHECK_THROWS_AS(integrate_rk4(blow, ComplexMatrix{{1.0}}, 1.0, 0), PreconditionError);
}
