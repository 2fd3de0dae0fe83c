#ifndef LAPLACE_BOUNDS_LEGENDRE_HPP_
#define LAPLACE_BOUNDS_LEGENDRE_HPP_

// Discrete Legendre-Fenchel transforms on grids. The 1D transform walks the
// lower convex hull of the samples once, so n samples and m slopes cost
// O(n + m); tensor grids are transformed one axis at a time.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

enum class Exactness { discrete, analytic };

/// Sampled conjugate: values on lambda-nodes together with the maximizing
/// x-node for each (the discrete x0(lambda)).
struct ConjugateFn {
  std::vector<double> lambda;
  std::vector<double> values;
  std::vector<std::size_t> argmax;
  std::vector<double> argmax_x;
  std::vector<bool> boundary;      // maximizer is the first or last x-node
  std::vector<bool> extrapolated;  // lambda outside the sampled slope range
  Exactness exactness = Exactness::discrete;

  std::size_t size() const { return lambda.size(); }

  /// Convexity up to rounding: slope increments may dip below zero only by
  /// the floating-point noise of the values involved.
  bool convex(double tol = 1e-12) const {
    double scale = 1.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 1; k + 1 < values.size(); ++k) {
      const double h0 = lambda[k] - lambda[k - 1];
      const double h1 = lambda[k + 1] - lambda[k];
      const double s0 = (values[k] - values[k - 1]) / h0;
      const double s1 = (values[k + 1] - values[k]) / h1;
      if (s1 - s0 < -tol * scale * (1.0 / h0 + 1.0 / h1)) return false;
    }
    return true;
  }

  bool argmax_monotone() const {
    return std::is_sorted(argmax.begin(), argmax.end());
  }
};

/// Indices of the vertices of the lower convex hull of (x_i, f_i); x strictly
/// increasing. Collinear interior points are dropped.
inline std::vector<std::size_t> lower_hull(std::span<const double> x, std::span<const double> f) {
  std::vector<std::size_t> hull;
  hull.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double s_ab = (f[b] - f[a]) / (x[b] - x[a]);
      const double s_bi = (f[i] - f[b]) / (x[i] - x[b]);
      if (s_ab < s_bi) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  return hull;
}

/// sup_i (lambda x_i - f_i) for every lambda in an increasing sequence.
/// Ties resolve to the smallest index.
inline ConjugateFn legendre_transform(std::span<const double> x, std::span<const double> f,
                                      std::span<const double> lambda) {
  if (x.empty()) throw InputError("Legendre transform of an empty grid");
  require(x.size() == f.size(), "node and value counts differ");
  for (std::size_t k = 1; k < lambda.size(); ++k) {
    require(lambda[k] > lambda[k - 1], "lambda-nodes must be strictly increasing");
  }
  const auto hull = lower_hull(x, f);
  const std::size_t n = x.size();
  const double min_slope = n > 1 ? (f[hull[1]] - f[hull[0]]) / (x[hull[1]] - x[hull[0]]) : 0.0;
  const double max_slope =
      n > 1 ? (f[hull.back()] - f[hull[hull.size() - 2]]) / (x[hull.back()] - x[hull[hull.size() - 2]])
            : 0.0;

  ConjugateFn out;
  out.lambda.assign(lambda.begin(), lambda.end());
  out.values.resize(lambda.size());
  out.argmax.resize(lambda.size());
  out.argmax_x.resize(lambda.size());
  out.boundary.resize(lambda.size());
  out.extrapolated.resize(lambda.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double l = lambda[j];
    double best = l * x[hull[k]] - f[hull[k]];
    while (k + 1 < hull.size()) {
      const double next = l * x[hull[k + 1]] - f[hull[k + 1]];
      if (!(next > best)) break;
      best = next;
      ++k;
    }
    out.values[j] = best;
    out.argmax[j] = hull[k];
    out.argmax_x[j] = x[hull[k]];
    out.boundary[j] = hull[k] == 0 || hull[k] == n - 1;
    out.extrapolated[j] = l < min_slope || l > max_slope;
  }
  return out;
}

/// Transform of a 1D grid function at the given lambda-nodes.
inline ConjugateFn llt_1d(const GridFn& f, std::span<const double> lambda) {
  require(f.dim() == 1, "llt_1d needs a one-dimensional grid");
  return legendre_transform(f.nodes(), f.values(), lambda);
}

/// Default lambda-nodes: the slope range of the samples padded by 10%.
inline std::vector<double> default_lambda_nodes(const GridFn& f, std::size_t count) {
  require(f.dim() == 1, "default lambda-nodes need a one-dimensional grid");
  require(count >= 2, "need at least two lambda-nodes");
  const auto& x = f.nodes();
  const auto& v = f.values();
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double s = (v[i] - v[i - 1]) / (x[i] - x[i - 1]);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double pad = 0.1 * std::max(hi - lo, 1e-12);
  return GridFn::linspace(lo - pad, hi + pad, count);
}

/// zeta** sampled back on the original nodes: the convex envelope of the
/// samples. The slopes of the hull edges serve as lambda-nodes, which makes
/// the round trip exact on the grid.
inline GridFn biconjugate(const GridFn& f) {
  require(f.dim() == 1, "biconjugate needs a one-dimensional grid");
  const auto& x = f.nodes();
  const auto& v = f.values();
  const auto hull = lower_hull(x, v);
  std::vector<double> slopes;
  for (std::size_t k = 1; k < hull.size(); ++k) {
    slopes.push_back((v[hull[k]] - v[hull[k - 1]]) / (x[hull[k]] - x[hull[k - 1]]));
  }
  const ConjugateFn fstar = legendre_transform(x, v, slopes);
  const ConjugateFn fss = legendre_transform(slopes, fstar.values, x);
  return GridFn(x, fss.values, f.extension());
}

/// Selected subset D of the nodes of a grid.
struct RegionMask {
  std::vector<bool> selected;

  template <typename Pred>
  static RegionMask where(const GridFn& g, Pred&& pred) {
    RegionMask mask;
    mask.selected.resize(g.total_size());
    for (std::size_t i = 0; i < g.total_size(); ++i) mask.selected[i] = pred(g.node_point(i));
    return mask;
  }
  static RegionMask all(const GridFn& g) {
    return RegionMask{std::vector<bool>(g.total_size(), true)};
  }
  bool empty() const { return std::none_of(selected.begin(), selected.end(), [](bool b) { return b; }); }
};

struct DiscreteSup {
  double value = -kInf;
  std::size_t argmax = 0;  // flat node index
  bool boundary = false;
};

inline double dot_node(const GridFn& g, const Vec& lambda, std::size_t flat) {
  const auto idx = g.multi_index(flat);
  double acc = 0.0;
  for (int a = 0; a < g.dim(); ++a) acc += lambda[a] * g.nodes(a)[idx[a]];
  return acc;
}

/// sup over the selected nodes of (lambda, x) - f(x).
inline DiscreteSup regional_conjugate(const GridFn& f, const RegionMask& mask, const Vec& lambda) {
  require(mask.selected.size() == f.total_size(), "mask size does not match the grid");
  require(lambda.size() == f.dim(), "dimension mismatch in regional conjugate");
  if (mask.empty()) throw InputError("regional conjugate over an empty region");
  DiscreteSup out;
  for (std::size_t i = 0; i < f.total_size(); ++i) {
    if (!mask.selected[i]) continue;
    const double v = dot_node(f, lambda, i) - f.values()[i];
    if (v > out.value) {
      out.value = v;
      out.argmax = i;
    }
  }
  const auto idx = f.multi_index(out.argmax);
  for (int a = 0; a < f.dim(); ++a) {
    if (idx[a] == 0 || idx[a] + 1 == f.size(a)) out.boundary = true;
  }
  return out;
}

/// Discrete conjugate of a tensor grid at one lambda by iterated 1D
/// transforms: the last axis is eliminated line by line, then the next.
inline DiscreteSup factorized_conjugate(const GridFn& f, const Vec& lambda) {
  require(lambda.size() == f.dim(), "dimension mismatch in tensor conjugate");
  const int d = f.dim();
  // current values over the leading axes; witness[j] = flat index attaining it
  std::vector<double> cur(f.values().begin(), f.values().end());
  std::vector<std::size_t> witness(cur.size());
  for (std::size_t i = 0; i < witness.size(); ++i) witness[i] = i;
  std::size_t lines = cur.size();
  for (int a = d - 1; a >= 0; --a) {
    const auto& x = f.nodes(a);
    const std::size_t n = x.size();
    lines /= n;
    std::vector<double> next(lines);
    std::vector<std::size_t> next_w(lines);
    std::vector<double> line(n);
    const double l = lambda[a];
    for (std::size_t li = 0; li < lines; ++li) {
      // transform of g(x) = cur(x) at slope l: sup_x (l x - cur)
      for (std::size_t j = 0; j < n; ++j) line[j] = cur[li * n + j];
      const ConjugateFn t = legendre_transform(x, line, std::span<const double>(&l, 1));
      next[li] = -t.values[0];  // carried as a "cost" for the next axis
      next_w[li] = witness[li * n + t.argmax[0]];
    }
    cur = std::move(next);
    witness = std::move(next_w);
  }
  DiscreteSup out;
  out.value = -cur[0];
  out.argmax = witness[0];
  const auto idx = f.multi_index(out.argmax);
  for (int a = 0; a < d; ++a) {
    if (idx[a] == 0 || idx[a] + 1 == f.size(a)) out.boundary = true;
  }
  return out;
}

/// Conjugate of the radial lift g(x) = g0(|x|) on R^d at any y with |y| = rho,
/// computed as the 1D conjugate of the even extension of g0.
inline double radial_conjugate(const GridFn& profile, double rho, int d) {
  require(profile.dim() == 1, "radial profile must be one-dimensional");
  require(d >= 1, "dimension must be >= 1");
  if (!(rho >= 0.0)) throw InputError("radial conjugate needs rho >= 0");
  const auto& s = profile.nodes();
  const auto& v = profile.values();
  require(s.front() >= 0.0, "radial profile must be sampled on s >= 0");
  std::vector<double> xs, fs;
  const std::size_t n = s.size();
  for (std::size_t i = n; i-- > 0;) {
    if (s[i] == 0.0) continue;
    xs.push_back(-s[i]);
    fs.push_back(v[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(s[i]);
    fs.push_back(v[i]);
  }
  return legendre_transform(xs, fs, std::span<const double>(&rho, 1)).values[0];
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_LEGENDRE_HPP_
