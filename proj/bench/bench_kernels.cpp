// Serial vs OpenMP kernels at superoperator sizes.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tred/kernels.hpp"
#include "tred/models.hpp"
#include "tred/quantum.hpp"

namespace {

using tred::cplx;

std::vector<cplx> random_entries(std::size_t n) {
  std::mt19937_64 rng(n);
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(tred::uniform01(rng), tred::uniform01(rng));
  return v;
}

void BM_gemm_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_entries(n * n), b = random_entries(n * n);
  std::vector<cplx> c(n * n);
  for (auto _ : state) {
    tred::kernels::gemm_serial(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}

void BM_gemm_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_entries(n * n), b = random_entries(n * n);
  std::vector<cplx> c(n * n);
  for (auto _ : state) {
    tred::kernels::gemm_parallel(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}

void BM_kron_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_entries(n * n), b = random_entries(n * n);
  std::vector<cplx> out(n * n * n * n);
  for (auto _ : state) {
    tred::kernels::kron_serial(a, n, n, b, n, n, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_kron_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_entries(n * n), b = random_entries(n * n);
  std::vector<cplx> out(n * n * n * n);
  for (auto _ : state) {
    tred::kernels::kron_parallel(a, n, n, b, n, n, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_central_spin_liouvillian(benchmark::State& state) {
  tred::CentralSpinParams p;
  p.Lambda_diss = 0.8;
  const tred::CentralSpinModel m = tred::central_spin_model(p);
  for (auto _ : state) benchmark::DoNotOptimize(tred::liouvillian(m.spec));
}

}  // namespace

BENCHMARK(BM_gemm_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_parallel)->Arg(64)->Arg(256);
BENCHMARK(BM_kron_serial)->Arg(8)->Arg(16);
BENCHMARK(BM_kron_parallel)->Arg(8)->Arg(16);
BENCHMARK(BM_central_spin_liouvillian);
BENCHMARK_MAIN();
