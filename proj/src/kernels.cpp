#include "tred/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>

namespace tred::kernels {
namespace {

std::atomic<int> g_thread_cap{0};

}  // namespace

int team_size() {
  const int cap = g_thread_cap.load(std::memory_order_relaxed);
  const int avail = omp_get_max_threads();
  return cap > 0 ? std::min(cap, avail) : avail;
}

namespace {

// Plain component arithmetic; std::complex::operator* goes through the
// Annex G NaN-recovery path, which is several times slower.
inline void gemm_row(const cplx* a_row, const cplx* b, cplx* c_row, std::size_t k,
                     std::size_t n) {
  const double* bd = reinterpret_cast<const double*>(b);
  double* cd = reinterpret_cast<double*>(c_row);
  std::fill(cd, cd + 2 * n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double ar = a_row[p].real();
    const double ai = a_row[p].imag();
    if (ar == 0.0 && ai == 0.0) continue;
    const double* brow = bd + 2 * p * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double br = brow[2 * j];
      const double bi = brow[2 * j + 1];
      cd[2 * j] += ar * br - ai * bi;
      cd[2 * j + 1] += ar * bi + ai * br;
    }
  }
}

inline void kron_row(const cplx* a, std::size_t ac, const cplx* b, std::size_t br,
                     std::size_t bc, std::size_t row, cplx* out_row) {
  const std::size_t i = row / br;
  const std::size_t k = row % br;
  const cplx* b_row = b + k * bc;
  for (std::size_t j = 0; j < ac; ++j) {
    const cplx aij = a[i * ac + j];
    cplx* dst = out_row + j * bc;
    for (std::size_t l = 0; l < bc; ++l) {
      dst[l] = cplx(aij.real() * b_row[l].real() - aij.imag() * b_row[l].imag(),
                    aij.real() * b_row[l].imag() + aij.imag() * b_row[l].real());
    }
  }
}

}  // namespace

void set_thread_cap(int threads) { g_thread_cap.store(std::max(0, threads)); }
int thread_cap() { return g_thread_cap.load(); }

void gemm_serial(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                 std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) gemm_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
}

void gemm_parallel(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                   std::size_t m, std::size_t k, std::size_t n) {
  const cplx* ap = a.data();
  const cplx* bp = b.data();
  cplx* cp = c.data();
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(team_size())
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    gemm_row(ap + i * k, bp, cp + i * n, k, n);
  }
}

void kron_serial(std::span<const cplx> a, std::size_t ar, std::size_t ac,
                 std::span<const cplx> b, std::size_t br, std::size_t bc, std::span<cplx> out) {
  const std::size_t out_cols = ac * bc;
  for (std::size_t row = 0; row < ar * br; ++row) {
    kron_row(a.data(), ac, b.data(), br, bc, row, out.data() + row * out_cols);
  }
}

void kron_parallel(std::span<const cplx> a, std::size_t ar, std::size_t ac,
                   std::span<const cplx> b, std::size_t br, std::size_t bc, std::span<cplx> out) {
  const std::size_t out_cols = ac * bc;
  const auto rows = static_cast<std::ptrdiff_t>(ar * br);
  const cplx* ap = a.data();
  const cplx* bp = b.data();
  cplx* op = out.data();
#pragma omp parallel for schedule(static) num_threads(team_size())
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    kron_row(ap, ac, bp, br, bc, static_cast<std::size_t>(row), op + row * out_cols);
  }
}

}  // namespace tred::kernels
