#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tred/linalg.hpp"
#include "tred/reduction.hpp"

namespace tred {

/// Coefficients E_(0)..E_(K) of the time-ordered exponential of a
/// polynomial generator, T exp(int_0^t F_{s,N} ds) = sum_k t^k E_(k).
struct PropagatorSeries {
  std::vector<ComplexMatrix> terms;
  std::size_t source_order = 0;

  std::size_t max_power() const noexcept { return terms.size() - 1; }
};

/// Sampled solution of a linear ODE. `states[i]` is the state at `times[i]`.
/// When the integration overflowed, the samples stop at the last finite state
/// and `diverged` is set.
struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexMatrix> states;
  bool diverged = false;
};

/// E_(k) = (1/k) sum_{s=1}^{k} F_(s) E_(k-s) with F_(s) = 0 for s > N + 1.
PropagatorSeries build_E_terms(const PolyGenerator& gen, std::size_t max_power);

struct SeriesDiagnostics {
  double tail_ratio = 0.0;  // ||t^K E_(K)|| / ||result||
  bool truncation_dominates = false;
};

/// sum_k t^k E_(k) by Horner's rule. Sets `diag->truncation_dominates` when the
/// last term still contributes more than 1e-8 of the result.
ComplexMatrix eval_series(const PropagatorSeries& series, double t,
                          SeriesDiagnostics* diag = nullptr);

/// Classical RK4 on dz/dt = F_{t,N} z with a fixed step t_max/steps. z0 may
/// be a column or a block of columns (e.g. the identity for the propagator).
Trajectory integrate_ltv(const PolyGenerator& gen, const ComplexMatrix& z0, double t_max,
                         std::size_t steps);

using TimeDependentRhs = std::function<ComplexMatrix(double, const ComplexMatrix&)>;

/// Classical RK4 for a general right-hand side x' = f(t, x).
Trajectory integrate_rk4(const TimeDependentRhs& rhs, const ComplexMatrix& x0, double t_max,
                         std::size_t steps);

/// Exact reduced propagator R e^{L t} J.
ComplexMatrix exact_reduced(const ComplexMatrix& L, const ProjectorFactorization& proj,
                            double t);

/// Samples R e^{L k h} J z0 on the uniform grid k h, h = t_max/steps, by
/// repeated application of the one-step propagator e^{L h}.
Trajectory exact_reduced_trajectory(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                    const ComplexMatrix& z0, double t_max, std::size_t steps);

/// Truncated exponential sum_{k=0}^{N} t^k/k! R L^k J.
ComplexMatrix taylor_baseline(const ComplexMatrix& L, const ProjectorFactorization& proj,
                              std::size_t order, double t);

enum class ErrorNorm { kOperator, kVector2 };

struct ErrorRow {
  double t;
  double error;
};

/// ||R e^{Lt} J - sum_k t^k E_(k)|| on each grid time. With ErrorNorm::kVector2
/// both propagators are applied to `z0` and compared in the Euclidean norm.
std::vector<ErrorRow> error_curve(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                  const PolyGenerator& gen, std::size_t max_power,
                                  std::span<const double> time_grid,
                                  ErrorNorm norm = ErrorNorm::kOperator,
                                  const std::optional<ComplexMatrix>& z0 = std::nullopt);

}  // namespace tred
