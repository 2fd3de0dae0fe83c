#ifndef LAPLACE_BOUNDS_TAUBERIAN_HPP_
#define LAPLACE_BOUNDS_TAUBERIAN_HPP_

// Ratio scans ln I / zeta* along rays, recovery of bounds on zeta from
// bounds on ln I by discrete conjugation, and the Chernoff tail bound.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "laplace_bounds/bounds.hpp"
#include "laplace_bounds/legendre.hpp"
#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/parallel.hpp"
#include "laplace_bounds/quadrature.hpp"
#include "laplace_bounds/saddle.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

/// Samples of a function of lambda on a tensor grid (ln J, ln K or Q) and the
/// scale constant applied to the argument of its conjugate.
struct ComparisonFn {
  GridFn samples;
  double scale = 1.0;

  static ComparisonFn from_samples(std::vector<double> lambda, std::vector<double> values, double scale = 1.0) {
    return {GridFn(std::move(lambda), std::move(values)), scale};
  }
  template <typename F>
  static ComparisonFn sample(std::vector<double> lambda, F&& fn, double scale = 1.0) {
    return {GridFn::sample(std::move(lambda), std::forward<F>(fn)), scale};
  }
  int dim() const { return samples.dim(); }
};

// ---------------------------------------------------------------- direct

struct RatioRecord {
  double t = kNaN;
  double lambda_min = kNaN;   // min-component of t * direction
  double log_i = kNaN;
  double phi = kNaN;          // zeta*(lambda)
  double ratio = kNaN;        // ln I / zeta*
  double log_r_ratio = kNaN;  // |ln r(lambda)| / zeta*, r = R(pi_1(lambda))
  double log_v_ratio = kNaN;  // |ln V(lambda)| / zeta*
  bool ok = false;
  std::string flag;
};

struct TauberianScan {
  std::vector<RatioRecord> records;
  double last_decade_deviation = kNaN;  // max |ratio - 1| for t >= t_max / 10
  double last_decade_max = kNaN;        // lim sup proxy
  double last_decade_min = kNaN;        // lim inf proxy
  bool partial = false;
};

struct RatioScanOptions {
  bool diagnostics = true;  // also compute |ln r| / zeta* and |ln V| / zeta*
  double kappa = 1.0;
  std::vector<double> kappa_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  QuadratureOptions quadrature;
};

namespace detail {

inline void summarize(const std::vector<RatioRecord>& recs, double& dev, double& hi, double& lo) {
  dev = hi = kNaN;
  lo = kNaN;
  double t_max = -kInf;
  for (const auto& r : recs) {
    if (r.ok) t_max = std::max(t_max, r.t);
  }
  if (t_max == -kInf) return;
  dev = 0.0;
  hi = -kInf;
  lo = kInf;
  for (const auto& r : recs) {
    if (!r.ok || r.t < t_max / 10.0) continue;
    dev = std::max(dev, std::abs(r.ratio - 1.0));
    hi = std::max(hi, r.ratio);
    lo = std::min(lo, r.ratio);
  }
}

inline void check_ray(const Vec& direction, const std::vector<double>& t_grid, int d) {
  require(direction.size() == d, "direction has the wrong dimension");
  if (!(direction.array() > 0.0).all()) throw InputError("direction must be componentwise positive");
  if (t_grid.empty()) throw InputError("t-grid must be nonempty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw InputError("t-grid values must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw InputError("t-grid must be strictly increasing");
  }
}

}  // namespace detail

/// ln I(t d) / zeta*(t d) along the ray t -> t d. A divergent point is kept
/// as a flagged record and marks the scan partial.
inline TauberianScan ratio_scan(const Objective& f, const WeightedMeasure& mu, const Vec& direction,
                                const std::vector<double>& t_grid, const RatioScanOptions& opt = {}) {
  detail::check_ray(direction, t_grid, f.dim());
  TauberianScan out;
  out.records.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    RatioRecord& rec = out.records[i];
    rec.t = t_grid[i];
    const Vec lambda = t_grid[i] * direction;
    rec.lambda_min = lambda.minCoeff();
    try {
      rec.log_i = log_laplace_integral(f, mu, lambda, opt.quadrature).log_value;
      rec.phi = conjugate_value(f, lambda).value;
      rec.ratio = rec.log_i / rec.phi;
      if (opt.diagnostics) {
        const PiKappa pk = pi_kappa(f, lambda, opt.kappa);
        const double log_r = r_integral(f, mu, pk.value, opt.quadrature).value.log_value;
        rec.log_r_ratio = std::abs(log_r) / rec.phi;
        const LowerBound v = lower_bound_v(f, mu, lambda, opt.kappa_grid, std::nullopt, opt.quadrature);
        rec.log_v_ratio = std::abs(v.log_value - rec.phi) / rec.phi;
        if (pk.clamped) rec.flag = "pi_kappa clamped";
      }
      rec.ok = std::isfinite(rec.ratio);
      if (!rec.ok) rec.flag = "zeta* is zero";
    } catch (const NumericalError& e) {
      rec.ok = false;
      rec.flag = e.what();
    }
  });
  for (const auto& r : out.records) out.partial = out.partial || !r.ok;
  detail::summarize(out.records, out.last_decade_deviation, out.last_decade_max, out.last_decade_min);
  return out;
}

// ---------------------------------------------------------------- inverse

/// Bound on zeta at the x-nodes; `edge` marks values whose maximizer sits on
/// the first or last lambda-node (the sampled range may be too short).
struct InverseBound {
  std::vector<Vec> x;
  std::vector<double> bound;
  std::vector<bool> edge;
  bool extrapolated = false;

  /// The bound as a 1D grid function (x must be an increasing 1D grid).
  GridFn as_grid() const {
    std::vector<double> nodes(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) nodes[i] = x[i][0];
    return GridFn(std::move(nodes), bound);
  }
};

namespace detail {

// [samples]*(c x) at every x.
inline InverseBound scaled_conjugate(const ComparisonFn& fn, const std::vector<Vec>& x) {
  InverseBound out;
  out.x = x;
  out.bound.resize(x.size());
  out.edge.resize(x.size());
  const GridFn& g = fn.samples;
  for (const Vec& xi : x) require(xi.size() == g.dim(), "x has the wrong dimension");
  if (g.dim() == 1) {
    std::vector<double> arg;
    for (const Vec& xi : x) arg.push_back(fn.scale * xi[0]);
    std::sort(arg.begin(), arg.end());
    arg.erase(std::unique(arg.begin(), arg.end()), arg.end());
    const ConjugateFn c = legendre_transform(g.nodes(), g.values(), arg);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto k = static_cast<std::size_t>(std::lower_bound(arg.begin(), arg.end(), fn.scale * x[i][0]) - arg.begin());
      out.bound[i] = c.values[k];
      out.edge[i] = c.boundary[k];
    }
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const DiscreteSup s = factorized_conjugate(g, fn.scale * x[i]);
      out.bound[i] = s.value;
      out.edge[i] = s.boundary;
    }
  }
  out.extrapolated = std::any_of(out.edge.begin(), out.edge.end(), [](bool b) { return b; });
  return out;
}

inline std::vector<Vec> as_points(const std::vector<double>& x) {
  std::vector<Vec> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(make_vec({v}));
  return out;
}

}  // namespace detail

/// zeta(x) <= [ln J]*(C12 x) given ln I >= ln J; C12 >= 1.
inline InverseBound inverse_upper(const ComparisonFn& ln_j, const std::vector<Vec>& x) {
  if (!(ln_j.scale >= 1.0) || !std::isfinite(ln_j.scale)) throw InputError("C12 must be >= 1");
  return detail::scaled_conjugate(ln_j, x);
}
inline InverseBound inverse_upper(const ComparisonFn& ln_j, const std::vector<double>& x) {
  return inverse_upper(ln_j, detail::as_points(x));
}

/// zeta(x) >= [ln K]*(C13 x) given ln I <= ln K; C13 in (0, 1].
inline InverseBound inverse_lower(const ComparisonFn& ln_k, const std::vector<Vec>& x) {
  if (!(ln_k.scale > 0.0 && ln_k.scale <= 1.0)) throw InputError("C13 must lie in (0, 1]");
  return detail::scaled_conjugate(ln_k, x);
}
inline InverseBound inverse_lower(const ComparisonFn& ln_k, const std::vector<double>& x) {
  return inverse_lower(ln_k, detail::as_points(x));
}

struct InverseLimitRecord {
  double t = kNaN;
  double zeta = kNaN;
  double q_star = kNaN;
  double ratio = kNaN;             // zeta / Q*
  double hypothesis_ratio = kNaN;  // ln I / Q at lambda = t d, when a measure is given
  bool edge = false;
  bool ok = false;
  std::string flag;
};

struct InverseLimitScan {
  std::vector<InverseLimitRecord> records;
  double last_decade_deviation = kNaN;
  double last_decade_max = kNaN;
  double last_decade_min = kNaN;
};

/// zeta(t d) / Q*(t d) along a ray. With a measure, also ln I(t d) / Q(t d),
/// the quantity whose lim sup / lim inf the hypotheses constrain.
inline InverseLimitScan inverse_limit_check(const Objective& f, const ComparisonFn& q, const Vec& direction,
                                            const std::vector<double>& t_grid,
                                            const std::optional<WeightedMeasure>& mu = std::nullopt,
                                            const QuadratureOptions& opt = {}) {
  detail::check_ray(direction, t_grid, f.dim());
  require(q.dim() == f.dim(), "Q and the objective differ in dimension");
  ComparisonFn unscaled = q;
  unscaled.scale = 1.0;
  std::vector<Vec> pts;
  for (double t : t_grid) pts.push_back(t * direction);
  const InverseBound qs = detail::scaled_conjugate(unscaled, pts);
  InverseLimitScan out;
  out.records.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    InverseLimitRecord& r = out.records[i];
    r.t = t_grid[i];
    r.zeta = f.eval(pts[i]);
    r.q_star = qs.bound[i];
    r.edge = qs.edge[i];
    if (r.q_star == 0.0) {
      r.flag = "Q* is zero";
      return;
    }
    r.ratio = r.zeta / r.q_star;
    r.ok = std::isfinite(r.ratio);
    if (r.edge) r.flag = "Q* maximizer on the lambda-grid edge";
    if (mu) {
      const double qv = q.samples(pts[i]);
      try {
        r.hypothesis_ratio = log_laplace_integral(f, *mu, pts[i], opt).log_value / qv;
      } catch (const NumericalError& e) {
        r.flag = e.what();
      }
    }
  });
  std::vector<RatioRecord> proxy;
  for (const auto& r : out.records) {
    RatioRecord p;
    p.t = r.t;
    p.ratio = r.ratio;
    p.ok = r.ok;
    proxy.push_back(p);
  }
  detail::summarize(proxy, out.last_decade_deviation, out.last_decade_max, out.last_decade_min);
  return out;
}

// ---------------------------------------------------------------- Chernoff

struct ChernoffBound {
  double value = kNaN;      // min(1, exp(-phi*(x)))
  double phi_star = kNaN;
  bool clipped = false;
  bool edge = false;        // discrete maximizer on the grid edge
};

namespace detail {

inline void check_tail_point(const Vec& x) {
  if (!x.allFinite() || (x.array() < 0.0).any()) throw InputError("tail point must be componentwise >= 0");
}

inline ChernoffBound chernoff_from(double phi_star, bool edge) {
  if (phi_star == -kInf || std::isnan(phi_star)) throw InputError("phi* is -inf: empty effective domain");
  ChernoffBound out;
  out.phi_star = phi_star;
  out.edge = edge;
  out.clipped = phi_star < 0.0;
  out.value = out.clipped ? 1.0 : std::exp(-phi_star);
  return out;
}

}  // namespace detail

/// P(xi >= x) <= exp(-phi*(x)), phi = ln E e^{(lambda, xi)} given by samples.
inline ChernoffBound chernoff_tail(const ComparisonFn& phi, const Vec& x) {
  detail::check_tail_point(x);
  ComparisonFn unscaled = phi;
  unscaled.scale = 1.0;
  const InverseBound c = detail::scaled_conjugate(unscaled, {x});
  return detail::chernoff_from(c.bound[0], c.edge[0]);
}

/// Same with phi given analytically.
inline ChernoffBound chernoff_tail(const Objective& phi, const Vec& x) {
  detail::check_tail_point(x);
  require(x.size() == phi.dim(), "tail point has the wrong dimension");
  const ConjugateValue c = conjugate_value(phi, x);
  return detail::chernoff_from(c.value, false);
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_TAUBERIAN_HPP_
