#ifndef LAPLACE_BOUNDS_CONJUGATE_HPP_
#define LAPLACE_BOUNDS_CONJUGATE_HPP_

// Multivariate conjugates: per-axis sums for separable objectives, iterated
// sweeps for tensor grids, dilations and the Young gap.

#include <cmath>

#include "laplace_bounds/legendre.hpp"
#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/saddle.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

enum class NdMode { separable, factorized_sweep };

namespace detail {

// One axis of a separable analytic objective as a 1D objective.
inline Objective axis_objective(const Objective& f, int axis) {
  const Domain& dom = f.domain();
  Domain d1 = dom.kind == DomainKind::box
                  ? Domain::box(make_vec({dom.lower[axis]}), make_vec({dom.upper[axis]}))
                  : (dom.kind == DomainKind::orthant ? Domain::orthant(1) : Domain::full(1));
  const auto& ps = f.profiles();
  return Objective::separable({ps.size() == 1 ? ps.front() : ps[axis]}, d1, f.scale());
}

}  // namespace detail

/// zeta*(lambda) for an objective, either as a sum of 1D conjugates or by an
/// iterated sweep over its tensor grid.
inline double conjugate_nd(const Objective& f, const Vec& lambda, NdMode mode = NdMode::separable) {
  require(lambda.size() == f.dim(), "dimension mismatch in conjugate argument");
  if (mode == NdMode::factorized_sweep) {
    if (f.family() != Family::grid) throw UsageError("factorized sweep needs a grid-backed objective");
    if (f.dim() > 3) throw UsageError("factorized sweep supports d <= 3");
    return conjugate_value(f, lambda).value;
  }
  if (!f.is_separable()) throw UsageError("objective is not separable; use the factorized sweep or the saddle");
  if (f.dim() == 1) return conjugate_value(f, lambda).value;
  double acc = 0.0;
  for (int i = 0; i < f.dim(); ++i) {
    acc += conjugate_value(detail::axis_objective(f, i), make_vec({lambda[i]})).value;
  }
  return acc;
}

/// Discrete conjugate of a tensor grid (d <= 3).
inline double conjugate_nd(const GridFn& g, const Vec& lambda, NdMode mode = NdMode::factorized_sweep) {
  if (mode == NdMode::separable && g.dim() > 1) {
    throw UsageError("a tensor grid is not known to be separable; use the factorized sweep");
  }
  if (g.dim() > 3) throw UsageError("factorized sweep supports d <= 3");
  return factorized_conjugate(g, lambda).value;
}

/// sup_x (lambda, x) - c zeta(x) = c zeta*(lambda / c), c > 0.
inline double dilated_conjugate(const Objective& f, const Vec& lambda, double c) {
  require(c > 0.0 && std::isfinite(c), "dilation factor must be positive");
  return c * conjugate_value(f, lambda / c).value;
}

/// zeta(x) + zeta*(lambda) - (lambda, x); nonnegative by Young's inequality.
inline double young_gap(const Objective& f, const Vec& x, const Vec& lambda) {
  require(x.size() == f.dim() && lambda.size() == f.dim(), "dimension mismatch in Young gap");
  return f.eval(x) + conjugate_value(f, lambda).value - lambda.dot(x);
}

/// zeta*[D](lambda) for D = X intersected with the box [lo, hi].
inline double regional_conjugate(const Objective& f, const Vec& lambda, const Vec& lo, const Vec& hi) {
  const SaddleResult r = regional_saddle(f, lambda, lo, hi);
  if (!r.converged) throw DivergenceError("regional supremum did not converge");
  return r.s_value;
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_CONJUGATE_HPP_
