#ifndef LAPLACE_BOUNDS_SADDLE_HPP_
#define LAPLACE_BOUNDS_SADDLE_HPP_

// Maximizer x0(lambda) of S(lambda, x) = (lambda, x) - zeta(x), the conjugate
// value zeta*(lambda) it yields, and the quantities built on the envelope
// identity grad zeta*(lambda) = x0(lambda): pi_kappa and the constant C(phi).

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "laplace_bounds/legendre.hpp"
#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

struct SaddleResult {
  Vec x0;
  double s_value = kNaN;       // S(lambda, x0)
  double hessian_det = kNaN;   // det zeta''(x0)
  int iterations = 0;
  bool converged = false;
  bool boundary = false;       // x0 on the domain boundary
  bool gradient_fallback = false;  // a singular Hessian forced gradient steps
  std::vector<double> residuals;   // projected gradient norm per iterate
};

namespace detail {

inline double s_value(const Objective& f, const Vec& lambda, const Vec& x) {
  return lambda.dot(x) - f.eval(x);
}

inline bool on_boundary(const Domain& dom, const Vec& x) {
  for (int i = 0; i < dom.dim; ++i) {
    if (x[i] <= dom.axis_lower(i) || x[i] >= dom.axis_upper(i)) return true;
  }
  return false;
}

inline SaddleResult grid_saddle(const Objective& f, const Vec& lambda) {
  const GridFn& g = *f.grid_fn();
  const DiscreteSup sup = factorized_conjugate(g, lambda);
  SaddleResult out;
  out.x0 = g.node_point(sup.argmax);
  out.s_value = sup.value;
  out.converged = true;
  out.boundary = sup.boundary;
  try {
    out.hessian_det = f.hessian(out.x0).value.determinant();
  } catch (const NumericalError&) {
  }
  return out;
}

}  // namespace detail

namespace detail {

// Coordinate bounds of a (possibly degenerate or unbounded) box.
struct Bounds {
  Vec lo, hi;
  static Bounds of(const Domain& dom) {
    Bounds b{Vec(dom.dim), Vec(dom.dim)};
    for (int i = 0; i < dom.dim; ++i) {
      b.lo[i] = dom.axis_lower(i);
      b.hi[i] = dom.axis_upper(i);
    }
    return b;
  }
  Vec project(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
  bool on_boundary(const Vec& x) const {
    return ((x.array() <= lo.array()) || (x.array() >= hi.array())).any();
  }
  double residual(const Vec& x, const Vec& g) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) continue;
      acc += g[i] * g[i];
    }
    return std::sqrt(acc);
  }
};

// Maximizes S(lambda, .) over the box b by damped projected Newton.
inline SaddleResult projected_newton(const Objective& f, const Vec& lambda, const Bounds& b,
                                     Vec x, int max_iterations) {
  const double tol = 1e-9 * (1.0 + lambda.norm());
  const int d = f.dim();
  SaddleResult out;
  x = b.project(x);
  double s = s_value(f, lambda, x);
  for (int it = 0; it <= max_iterations; ++it) {
    const Vec g = f.gradient(x).value - lambda;
    const double res = b.residual(x, g);
    out.residuals.push_back(res);
    out.iterations = it;
    if (!std::isfinite(res)) break;
    if (res <= tol) {
      out.converged = true;
      break;
    }
    if (it == max_iterations) break;

    // free coordinates: not held at a bound by the sign of the gradient
    std::vector<int> free;
    for (int i = 0; i < d; ++i) {
      const bool held = (x[i] <= b.lo[i] && g[i] > 0.0) || (x[i] >= b.hi[i] && g[i] < 0.0);
      if (!held && b.lo[i] < b.hi[i]) free.push_back(i);
    }
    Vec step = Vec::Zero(d);
    bool newton = false;
    try {
      const Mat H = f.hessian(x).value;
      const int nf = static_cast<int>(free.size());
      Mat Hf(nf, nf);
      Vec gf(nf);
      for (int a = 0; a < nf; ++a) {
        gf[a] = g[free[a]];
        for (int c = 0; c < nf; ++c) Hf(a, c) = H(free[a], free[c]);
      }
      Eigen::LLT<Mat> llt(Hf);
      if (llt.info() == Eigen::Success) {
        const Vec df = llt.solve(gf);
        if (df.allFinite()) {
          for (int a = 0; a < nf; ++a) step[free[a]] = df[a];
          newton = true;
        }
      }
    } catch (const NumericalError&) {
    }
    if (!newton) {
      out.gradient_fallback = true;
      for (int i : free) step[i] = g[i];
      const double n = step.norm();
      if (n > 0.0) step *= std::min(1.0, (1.0 + x.norm()) / n);
    }

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      const Vec xn = b.project(x - t * step);
      const double sn = s_value(f, lambda, xn);
      if (!std::isfinite(sn)) continue;
      const double rn = b.residual(xn, f.gradient(xn).value - lambda);
      if (sn >= s - 1e-14 * (1.0 + std::abs(s)) || rn < res) {
        x = xn;
        s = sn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.x0 = x;
  out.s_value = s_value(f, lambda, x);
  out.boundary = b.on_boundary(x);
  try {
    out.hessian_det = f.hessian(x).value.determinant();
  } catch (const NumericalError&) {
  }
  return out;
}

}  // namespace detail

/// Damped projected Newton on grad zeta(x) = lambda. Never throws on
/// non-convergence; inspect `converged`.
inline SaddleResult find_saddle(const Objective& f, const Vec& lambda,
                                const std::optional<Vec>& x_init = std::nullopt,
                                int max_iterations = 100) {
  require(lambda.size() == f.dim(), "dimension mismatch in saddle search");
  require(lambda.allFinite(), "lambda must be finite");
  if (f.family() == Family::grid) return detail::grid_saddle(f, lambda);
  return detail::projected_newton(f, lambda, detail::Bounds::of(f.domain()),
                                  x_init ? *x_init : f.default_saddle_start(lambda), max_iterations);
}

/// sup of (lambda, x) - zeta(x) over X intersected with the box [lo, hi]
/// (infinite ends and lo_i = hi_i allowed). Concave problem, so the projected
/// Newton limit is the regional maximizer.
inline SaddleResult regional_saddle(const Objective& f, const Vec& lambda, const Vec& lo, const Vec& hi) {
  require(lo.size() == f.dim() && hi.size() == f.dim(), "dimension mismatch in region bounds");
  detail::Bounds b = detail::Bounds::of(f.domain());
  b.lo = b.lo.cwiseMax(lo);
  b.hi = b.hi.cwiseMin(hi);
  if ((b.lo.array() > b.hi.array()).any()) throw InputError("region does not meet the domain");
  if (f.family() == Family::grid) {
    const GridFn& g = *f.grid_fn();
    const auto mask = RegionMask::where(g, [&](const Vec& x) {
      return (x.array() >= b.lo.array()).all() && (x.array() <= b.hi.array()).all();
    });
    const auto sup = regional_conjugate(g, mask, lambda);
    SaddleResult out;
    out.x0 = g.node_point(sup.argmax);
    out.s_value = sup.value;
    out.converged = true;
    out.boundary = sup.boundary;
    return out;
  }
  Vec start = f.default_saddle_start(lambda);
  for (int i = 0; i < f.dim(); ++i) {
    if (!std::isfinite(start[i])) start[i] = 0.0;
  }
  return detail::projected_newton(f, lambda, b, start, 100);
}

enum class ConjugateSource { closed, saddle, discrete };

/// zeta*(lambda) with its maximizer.
struct ConjugateValue {
  double value = kNaN;
  Vec argmax;
  ConjugateSource source = ConjugateSource::saddle;
  bool boundary = false;
};

/// Exact conjugate: closed form when one exists, discrete sup for grids,
/// otherwise the saddle value. Throws DivergenceError when the supremum is
/// infinite or the saddle search fails.
inline ConjugateValue conjugate_value(const Objective& f, const Vec& lambda) {
  require(lambda.size() == f.dim(), "dimension mismatch in conjugate argument");
  ConjugateValue out;
  if (f.family() == Family::grid) {
    const GridFn& g = *f.grid_fn();
    if (g.extension() == Extension::linear && g.dim() == 1) {
      const auto& x = g.nodes();
      const auto& v = g.values();
      const std::size_t n = x.size();
      const double lo = (v[1] - v[0]) / (x[1] - x[0]);
      const double hi = (v[n - 1] - v[n - 2]) / (x[n - 1] - x[n - 2]);
      const Domain& dom = f.domain();
      if ((lambda[0] > hi && dom.axis_upper(0) > x.back()) ||
          (lambda[0] < lo && dom.axis_lower(0) < x.front())) {
        throw DivergenceError("conjugate is +inf: lambda lies outside the slope range of the linear extension");
      }
    }
    const auto sup = factorized_conjugate(g, lambda);
    out.value = sup.value;
    out.argmax = g.node_point(sup.argmax);
    out.source = ConjugateSource::discrete;
    out.boundary = sup.boundary;
    return out;
  }
  if (auto closed = f.closed_conjugate(lambda); closed && !closed->asymptotic) {
    out.value = closed->value;
    out.source = ConjugateSource::closed;
    if (f.power_exponent()) {
      out.argmax = f.default_saddle_start(lambda);
      out.boundary = detail::on_boundary(f.domain(), out.argmax);
      return out;
    }
  }
  const SaddleResult sr = find_saddle(f, lambda);
  if (!sr.converged) {
    throw DivergenceError("saddle search did not converge; conjugate may be infinite");
  }
  out.argmax = sr.x0;
  out.boundary = sr.boundary;
  if (out.source != ConjugateSource::closed) out.value = sr.s_value;
  return out;
}

/// grad zeta*(lambda) = x0(lambda).
inline Vec grad_conjugate(const Objective& f, const Vec& lambda) {
  return conjugate_value(f, lambda).argmax;
}

struct PiKappa {
  double value = kNaN;  // clamped to (0, 1/2]
  double raw = kNaN;
  bool clamped = false;
};

/// pi_kappa(lambda) = kappa / (lambda, grad zeta*(lambda)).
inline PiKappa pi_kappa_from_gradient(const Vec& lambda, const Vec& grad, double kappa) {
  require(kappa > 0.0 && std::isfinite(kappa), "kappa must be positive");
  const double denom = lambda.dot(grad);
  if (!(denom > 0.0)) throw InputError("pi_kappa: (lambda, grad zeta*(lambda)) must be positive");
  PiKappa out;
  out.raw = kappa / denom;
  out.clamped = out.raw > 0.5;
  out.value = std::min(out.raw, 0.5);
  return out;
}

inline PiKappa pi_kappa(const Objective& f, const Vec& lambda, double kappa) {
  return pi_kappa_from_gradient(lambda, grad_conjugate(f, lambda), kappa);
}

/// Lambda(kappa): the smallest min-component along `direction` from which
/// pi_kappa <= 1/2, located by bisection (pi_kappa decreases along rays).
inline double lambda_threshold(const Objective& f, const Vec& direction, double kappa) {
  require((direction.array() > 0.0).all(), "direction must be componentwise positive");
  const Vec dir = direction / direction.minCoeff();
  auto raw = [&](double t) { return pi_kappa(f, t * dir, kappa).raw; };
  double hi = 1.0;
  int guard = 0;
  while (raw(hi) > 0.5) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("pi_kappa does not fall below 1/2 along the ray");
  }
  double lo = hi;
  guard = 0;
  while (lo > 1e-300 && raw(lo * 0.5) <= 0.5) {
    lo *= 0.5;
    if (++guard > 200) return 0.0;
  }
  lo *= 0.5;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (raw(mid) > 0.5 ? lo : hi) = mid;
  }
  return hi;
}

enum class Boundedness { plausibly_bounded, unbounded_suspect };

struct CPhiRecord {
  Vec lambda;
  double shift_full = kNaN;  // phi(lambda + 2 lambda pi(lambda)) - phi(lambda)
  double shift_half = kNaN;  // phi(lambda + lambda pi(lambda)) - phi(lambda)
};

struct CPhiEstimate {
  double value = -kInf;
  Boundedness verdict = Boundedness::plausibly_bounded;
  std::vector<CPhiRecord> records;  // ordered by min-component
};

/// Empirical sup of phi(lambda + 2 lambda / (lambda, phi'(lambda))) - phi(lambda)
/// over grid points with pi_kappa(lambda) <= 1/2. The verdict flags a running
/// maximum still rising by more than 1% over the last decade of the grid.
inline CPhiEstimate estimate_c_phi(const std::function<double(const Vec&)>& phi,
                                   const std::function<Vec(const Vec&)>& dphi,
                                   std::vector<Vec> lambda_grid, double kappa) {
  require(!lambda_grid.empty(), "C(phi) estimate needs a nonempty lambda grid");
  std::sort(lambda_grid.begin(), lambda_grid.end(),
            [](const Vec& a, const Vec& b) { return a.minCoeff() < b.minCoeff(); });
  CPhiEstimate out;
  for (const Vec& l : lambda_grid) {
    const Vec grad = dphi(l);
    const double denom = l.dot(grad);
    if (!(denom > 0.0) || kappa / denom > 0.5) continue;
    const double base = phi(l);
    CPhiRecord rec;
    rec.lambda = l;
    rec.shift_full = phi(l + 2.0 * l / denom) - base;
    rec.shift_half = phi(l + l / denom) - base;
    out.records.push_back(rec);
  }
  if (out.records.empty()) throw InputError("no grid point satisfies pi_kappa(lambda) <= 1/2");
  const double top = out.records.back().lambda.minCoeff();
  double before = -kInf, overall = -kInf;
  for (const auto& rec : out.records) {
    overall = std::max(overall, rec.shift_full);
    if (rec.lambda.minCoeff() < top / 10.0) before = overall;
  }
  if (before == -kInf) before = out.records.front().shift_full;
  out.value = overall;
  const double rise = overall - before;
  out.verdict = rise <= 0.01 * std::max(std::abs(before), 1e-300) ? Boundedness::plausibly_bounded
                                                                  : Boundedness::unbounded_suspect;
  return out;
}

inline CPhiEstimate estimate_c_phi(const Objective& f, const std::vector<Vec>& lambda_grid, double kappa) {
  return estimate_c_phi([&](const Vec& l) { return conjugate_value(f, l).value; },
                        [&](const Vec& l) { return grad_conjugate(f, l); }, lambda_grid, kappa);
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_SADDLE_HPP_
