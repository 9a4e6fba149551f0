#include "tred/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "tred/errors.hpp"
#include "tred/kernels.hpp"

namespace tred {
namespace {

// Beyond this the state has left any regime worth sampling.
constexpr double kDivergenceLimit = 1e150;

bool usable(const ComplexMatrix& x) { return x.all_finite() && x.max_abs() < kDivergenceLimit; }

}  // namespace

PropagatorSeries build_E_terms(const PolyGenerator& gen, std::size_t max_power) {
  if (max_power == 0) throw PreconditionError("build_E_terms: K must be >= 1");
  PropagatorSeries series;
  series.source_order = gen.order();
  series.terms.reserve(max_power + 1);
  series.terms.push_back(ComplexMatrix::identity(gen.dim()));
  const std::size_t n_coeffs = gen.coeffs().size();
  for (std::size_t k = 1; k <= max_power; ++k) {
    ComplexMatrix ek(gen.dim(), gen.dim());
    for (std::size_t s = 1; s <= std::min(k, n_coeffs); ++s) {
      ek += gen.term(s) * series.terms[k - s];
    }
    ek *= 1.0 / static_cast<double>(k);
    series.terms.push_back(std::move(ek));
  }
  return series;
}

ComplexMatrix eval_series(const PropagatorSeries& series, double t, SeriesDiagnostics* diag) {
  if (t < 0.0) throw PreconditionError("eval_series: requires t >= 0");
  ComplexMatrix acc = series.terms.back();
  for (std::size_t i = series.terms.size() - 1; i-- > 0;) {
    acc *= t;
    acc += series.terms[i];
  }
  if (diag != nullptr) {
    const double tail =
        std::pow(t, static_cast<double>(series.max_power())) * hs_norm(series.terms.back());
    const double total = hs_norm(acc);
    diag->tail_ratio = total > 0.0 ? tail / total : (tail > 0.0 ? INFINITY : 0.0);
    diag->truncation_dominates = diag->tail_ratio > 1e-8;
  }
  return acc;
}

Trajectory integrate_rk4(const TimeDependentRhs& rhs, const ComplexMatrix& x0, double t_max,
                         std::size_t steps) {
  if (steps == 0) throw PreconditionError("integrate: steps must be >= 1");
  if (!(t_max > 0.0)) throw PreconditionError("integrate: t_max must be > 0");
  const double h = t_max / static_cast<double>(steps);
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  ComplexMatrix x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const ComplexMatrix k1 = rhs(t, x);
    const ComplexMatrix k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1);
    const ComplexMatrix k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2);
    const ComplexMatrix k4 = rhs(t + h, x + h * k3);
    ComplexMatrix incr = k1;
    incr.add_scaled(k2, 2.0).add_scaled(k3, 2.0) += k4;
    x.add_scaled(incr, h / 6.0);
    if (!usable(x)) {
      traj.diverged = true;
      break;
    }
    traj.times.push_back(static_cast<double>(i + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate_ltv(const PolyGenerator& gen, const ComplexMatrix& z0, double t_max,
                         std::size_t steps) {
  if (z0.rows() != gen.dim()) {
    throw DimensionError("integrate_ltv: generator is " + std::to_string(gen.dim()) +
                         "-dimensional, initial state " + z0.shape_string());
  }
  return integrate_rk4([&gen](double t, const ComplexMatrix& z) { return gen.at(t) * z; }, z0,
                       t_max, steps);
}

ComplexMatrix exact_reduced(const ComplexMatrix& L, const ProjectorFactorization& proj,
                            double t) {
  if (t < 0.0) throw PreconditionError("exact_reduced: requires t >= 0");
  return proj.reduction() * expm(t * L) * proj.injection();
}

Trajectory exact_reduced_trajectory(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                    const ComplexMatrix& z0, double t_max, std::size_t steps) {
  if (steps == 0) throw PreconditionError("exact_reduced_trajectory: steps must be >= 1");
  const double h = t_max / static_cast<double>(steps);
  const ComplexMatrix step = expm(h * L);
  Trajectory traj;
  ComplexMatrix x = proj.injection() * z0;
  traj.times.push_back(0.0);
  traj.states.push_back(proj.reduction() * x);
  for (std::size_t i = 1; i <= steps; ++i) {
    x = step * x;
    traj.times.push_back(static_cast<double>(i) * h);
    traj.states.push_back(proj.reduction() * x);
  }
  return traj;
}

ComplexMatrix taylor_baseline(const ComplexMatrix& L, const ProjectorFactorization& proj,
                              std::size_t order, double t) {
  if (t < 0.0) throw PreconditionError("taylor_baseline: requires t >= 0");
  ComplexMatrix acc = ComplexMatrix::identity(proj.reduced_dim());
  if (order == 0) return acc;
  const auto moments = reduced_moments(L, proj, order);
  double coeff = 1.0;
  for (std::size_t k = 1; k <= order; ++k) {
    coeff *= t / static_cast<double>(k);
    acc.add_scaled(moments[k - 1], coeff);
  }
  return acc;
}

std::vector<ErrorRow> error_curve(const ComplexMatrix& L, const ProjectorFactorization& proj,
                                  const PolyGenerator& gen, std::size_t max_power,
                                  std::span<const double> time_grid, ErrorNorm norm,
                                  const std::optional<ComplexMatrix>& z0) {
  if (!std::is_sorted(time_grid.begin(), time_grid.end())) {
    throw PreconditionError("error_curve: time grid must be ascending");
  }
  if (norm == ErrorNorm::kVector2 && !z0) {
    throw PreconditionError("error_curve: vector norm needs an initial state");
  }
  const PropagatorSeries series = build_E_terms(gen, max_power);
  std::vector<ErrorRow> rows(time_grid.size());
  const auto count = static_cast<std::ptrdiff_t>(time_grid.size());
  // Each slot is written by exactly one iteration; order of evaluation is irrelevant.
#pragma omp parallel for schedule(dynamic) num_threads(kernels::team_size())
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double t = time_grid[static_cast<std::size_t>(i)];
    ComplexMatrix diff = exact_reduced(L, proj, t) - eval_series(series, t);
    const double err = norm == ErrorNorm::kOperator ? op_norm(diff) : hs_norm(diff * (*z0));
    rows[static_cast<std::size_t>(i)] = {t, err};
  }
  return rows;
}

}  // namespace tred
