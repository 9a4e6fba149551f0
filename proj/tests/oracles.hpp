#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerical kernels except ComplexMatrix storage, so a bug in
// matmul/expm/the recursions cannot hide itself.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "tred/linalg.hpp"
#include "tred/models.hpp"
#include "tred/reduction.hpp"

namespace oracle {

using tred::ComplexMatrix;
using tred::cplx;

inline ComplexMatrix mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

inline ComplexMatrix add(ComplexMatrix a, const ComplexMatrix& b, cplx s = 1.0) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += s * b(i, j);
  return a;
}

inline ComplexMatrix scale(ComplexMatrix a, cplx s) {
  for (auto& x : a.data()) x *= s;
  return a;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double frob(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += std::norm(x);
  return std::sqrt(s);
}

/// Plain Taylor sum with scaling and squaring; terms are summed until they
/// stop changing anything.
inline ComplexMatrix taylor_expm(const ComplexMatrix& a, std::size_t terms = 30) {
  double nrm = 0.0;
  for (const auto& x : a.data()) nrm += std::abs(x);
  int squarings = 0;
  while (nrm > 0.5) {
    nrm /= 2.0;
    ++squarings;
  }
  const ComplexMatrix as = scale(a, std::ldexp(1.0, -squarings));
  ComplexMatrix sum = ComplexMatrix::identity(a.rows());
  ComplexMatrix term = sum;
  for (std::size_t k = 1; k <= terms; ++k) {
    term = scale(mul(term, as), 1.0 / static_cast<double>(k));
    sum = add(sum, term);
  }
  for (int i = 0; i < squarings; ++i) sum = mul(sum, sum);
  return sum;
}

/// R L^k J / k!, by explicit powers.
inline ComplexMatrix scaled_moment(const ComplexMatrix& L, const tred::ProjectorFactorization& p,
                                   std::size_t k) {
  ComplexMatrix pw = ComplexMatrix::identity(L.rows());
  double fact = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    pw = mul(pw, L);
    fact *= static_cast<double>(i);
  }
  return scale(mul(mul(p.reduction(), pw), p.injection()), 1.0 / fact);
}

/// Fixed-step RK4 for x' = f(t, x), written independently of the library's.
inline ComplexMatrix rk4(const std::function<ComplexMatrix(double, const ComplexMatrix&)>& f,
                         ComplexMatrix x, double t_end, std::size_t steps) {
  const double h = t_end / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = h * static_cast<double>(i);
    const ComplexMatrix k1 = f(t, x);
    const ComplexMatrix k2 = f(t + h / 2, add(x, k1, h / 2));
    const ComplexMatrix k3 = f(t + h / 2, add(x, k2, h / 2));
    const ComplexMatrix k4 = f(t + h, add(x, k3, h));
    ComplexMatrix inc = add(add(add(k1, k2, 2.0), k3, 2.0), k4);
    x = add(x, inc, h / 6);
  }
  return x;
}

/// sum_k t^k F_k as a plain function of t.
inline ComplexMatrix poly_at(const std::vector<ComplexMatrix>& f, double t) {
  ComplexMatrix acc(f.front().rows(), f.front().cols());
  double tk = 1.0;
  for (const auto& c : f) {
    acc = add(acc, c, tk);
    tk *= t;
  }
  return acc;
}

/// Taylor coefficients c_0..c_3 of g around 0 from 5-point central
/// differences at steps h, h/2, h/4 with two Richardson levels.
inline std::vector<ComplexMatrix> fd_taylor(const std::function<ComplexMatrix(double)>& g,
                                            double h) {
  struct Stencil {
    double w[5];
    int power;     // divide by h^power
    int order;     // leading error order
  };
  // offsets -2h, -h, 0, h, 2h
  const Stencil d1{{1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12}, 1, 4};
  const Stencil d2{{-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}, 2, 4};
  const Stencil d3{{-0.5, 1.0, 0.0, -1.0, 0.5}, 3, 2};
  const Stencil* stencils[] = {&d1, &d2, &d3};

  std::vector<ComplexMatrix> out{g(0.0)};
  const double factorial[] = {1.0, 1.0, 2.0, 6.0};
  for (int d = 0; d < 3; ++d) {
    const Stencil& s = *stencils[d];
    ComplexMatrix level[3];
    for (int r = 0; r < 3; ++r) {
      const double hr = h / std::ldexp(1.0, r);
      ComplexMatrix acc(out[0].rows(), out[0].cols());
      for (int i = 0; i < 5; ++i) {
        if (s.w[i] != 0.0) acc = add(acc, g((i - 2) * hr), s.w[i]);
      }
      level[r] = scale(acc, 1.0 / std::pow(hr, s.power));
    }
    // Central differences have even error expansions: orders p, p+2.
    const double a = std::ldexp(1.0, s.order);
    const double b = std::ldexp(1.0, s.order + 2);
    ComplexMatrix r1 = scale(add(scale(level[1], a), level[0], -1.0), 1.0 / (a - 1));
    ComplexMatrix r2 = scale(add(scale(level[2], a), level[1], -1.0), 1.0 / (a - 1));
    ComplexMatrix best = scale(add(scale(r2, b), r1, -1.0), 1.0 / (b - 1));
    out.push_back(scale(best, 1.0 / factorial[d + 1]));
  }
  return out;
}

/// Random matrix with entries uniform in the unit disk's bounding square.
inline ComplexMatrix random_complex(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  ComplexMatrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      a(i, j) = cplx(2 * tred::uniform01(rng) - 1, 2 * tred::uniform01(rng) - 1);
  return a;
}

inline ComplexMatrix random_hermitian(std::size_t d, std::mt19937_64& rng) {
  const ComplexMatrix a = random_complex(d, d, rng);
  ComplexMatrix h(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return h;
}

/// Full-rank density matrix A A^dag / tr(A A^dag) plus a small identity admixture.
inline ComplexMatrix random_density(std::size_t d, std::mt19937_64& rng) {
  const ComplexMatrix a = random_complex(d, d, rng);
  ComplexMatrix rho = mul(a, a.adjoint());
  rho = add(rho, ComplexMatrix::identity(d), 0.05);
  cplx tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += rho(i, i);
  rho = scale(rho, 1.0 / tr);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) rho(j, i) = std::conj(rho(i, j));
  for (std::size_t i = 0; i < d; ++i) rho(i, i) = rho(i, i).real();
  return rho;
}

/// Random (L, R, J) with orthogonal coordinate projector: R = [I_m | 0].
struct RandomSystem {
  ComplexMatrix L;
  tred::ProjectorFactorization proj;
};

inline RandomSystem random_system(std::size_t n, std::size_t m, std::mt19937_64& rng,
                                  double target_norm = 1.0) {
  ComplexMatrix L = random_complex(n, n, rng);
  L = scale(L, target_norm / frob(L));
  ComplexMatrix r(m, n);
  for (std::size_t i = 0; i < m; ++i) r(i, i) = 1.0;
  ComplexMatrix j = r.transpose();
  return {std::move(L), tred::ProjectorFactorization(std::move(r), std::move(j))};
}

/// Oblique factorization: R = [I | B], J = [I ; 0] gives R J = I and a
/// non-orthogonal P.
inline tred::ProjectorFactorization oblique_factors(std::size_t n, std::size_t m,
                                                    std::mt19937_64& rng) {
  ComplexMatrix r(m, n), j(n, m);
  const ComplexMatrix b = random_complex(m, n - m, rng);
  for (std::size_t i = 0; i < m; ++i) {
    r(i, i) = 1.0;
    j(i, i) = 1.0;
    for (std::size_t k = 0; k < n - m; ++k) r(i, m + k) = 0.3 * b(i, k);
  }
  return tred::ProjectorFactorization(std::move(r), std::move(j));
}

}  // namespace oracle
