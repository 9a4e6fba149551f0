#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "tred/kernels.hpp"

using namespace tred;

namespace {
std::vector<cplx> random_entries(std::size_t n, std::mt19937_64& rng) {
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  return v;
}
}  // namespace

TEST_CASE("parallel gemm is bit-identical to serial for any team size") {
  std::mt19937_64 rng(1);
  const std::size_t m = 67, k = 45, n = 53;
  const auto a = random_entries(m * k, rng);
  const auto b = random_entries(k * n, rng);
  std::vector<cplx> ref(m * n), out(m * n);
  kernels::gemm_serial(a, b, ref, m, k, n);
  for (int threads : {1, 2, 3, 8}) {
    kernels::set_thread_cap(threads);
    kernels::gemm_parallel(a, b, out, m, k, n);
    CHECK(out == ref);
  }
  kernels::set_thread_cap(0);
}

TEST_CASE("parallel kron is bit-identical to serial") {
  std::mt19937_64 rng(2);
  const auto a = random_entries(6 * 5, rng);
  const auto b = random_entries(7 * 4, rng);
  std::vector<cplx> ref(42 * 20), out(42 * 20);
  kernels::kron_serial(a, 6, 5, b, 7, 4, ref);
  for (int threads : {1, 4}) {
    kernels::set_thread_cap(threads);
    kernels::kron_parallel(a, 6, 5, b, 7, 4, out);
    CHECK(out == ref);
  }
  kernels::set_thread_cap(0);
}

TEST_CASE("serial gemm against the triple loop") {
  std::mt19937_64 rng(3);
  const ComplexMatrix a = oracle::random_complex(9, 4, rng);
  const ComplexMatrix b = oracle::random_complex(4, 6, rng);
  std::vector<cplx> c(54);
  kernels::gemm_serial(a.data(), b.data(), c, 9, 4, 6);
  CHECK(oracle::max_abs_diff(ComplexMatrix(9, 6, c), oracle::mul(a, b)) < 1e-14);
}

TEST_CASE("thread cap round trip") {
  kernels::set_thread_cap(2);
  CHECK(kernels::thread_cap() == 2);
  CHECK(kernels::team_size() <= 2);
  kernels::set_thread_cap(0);
  CHECK(kernels::team_size() >= 1);
}
