#pragma once

// Inner loops that dominate run time at superoperator sizes (n up to 256).
// Each kernel has an OpenMP version and a serial reference that the tests
// compare against; the parallel versions partition output rows, so every
// output entry is accumulated in the same order as in the serial kernel and
// the two agree bit for bit.

#include <complex>
#include <cstddef>
#include <span>

namespace tred::kernels {

using cplx = std::complex<double>;

// c (m x n) = a (m x k) * b (k x n), all row-major, c overwritten.
void gemm_serial(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                 std::size_t m, std::size_t k, std::size_t n);
void gemm_parallel(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                   std::size_t m, std::size_t k, std::size_t n);

// out ((ar*br) x (ac*bc)) = a (ar x ac) ⊗ b (br x bc).
void kron_serial(std::span<const cplx> a, std::size_t ar, std::size_t ac,
                 std::span<const cplx> b, std::size_t br, std::size_t bc, std::span<cplx> out);
void kron_parallel(std::span<const cplx> a, std::size_t ar, std::size_t ac,
                   std::span<const cplx> b, std::size_t br, std::size_t bc, std::span<cplx> out);

// Work (m*k*n) above which matmul dispatches to the parallel kernel.
inline constexpr std::size_t kParallelGemmWork = std::size_t{1} << 15;

/// Caps the OpenMP team size used by the parallel kernels (0 = runtime default).
void set_thread_cap(int threads);
int thread_cap();
/// Team size the parallel kernels actually request.
int team_size();

}  // namespace tred::kernels
