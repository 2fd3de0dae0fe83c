#ifndef LAPLACE_BOUNDS_QUADRATURE_HPP_
#define LAPLACE_BOUNDS_QUADRATURE_HPP_

// Log-space integration of exp(H(x)) against |x|^alpha M(|x|) dx.
//
// One-dimensional integrals use adaptive Gauss-Kronrod (7/15) panels whose
// values are kept as logarithms and merged by log-sum-exp, on a window around
// the peak of H that doubles until the newly added tails are negligible.
// Higher dimensions reduce to that engine where the integrand allows
// (separable sums, radial functions, nested lines for d <= 3) and fall back
// to importance-sampled Monte Carlo for d <= 6.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/parallel.hpp"
#include "laplace_bounds/random.hpp"
#include "laplace_bounds/saddle.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

/// mu(dx) = |x|^alpha M(|x|) dx; alpha = 0 with M = 1 is Lebesgue measure.
struct WeightedMeasure {
  double alpha = 0.0;
  SlowVary M = SlowVary::one();

  static WeightedMeasure lebesgue() { return {}; }
  static WeightedMeasure power(double alpha, SlowVary M = SlowVary::one()) {
    require(std::isfinite(alpha), "measure exponent alpha must be finite");
    return {alpha, M};
  }
  bool is_lebesgue() const { return alpha == 0.0 && M.is_one(); }
  void validate(int d) const {
    if (!(alpha > -d)) throw InputError("measure exponent alpha must exceed -d = " + std::to_string(-d));
  }
  /// ln of the density at radius r.
  double log_density(double r) const {
    if (is_lebesgue()) return 0.0;
    double out = 0.0;
    if (alpha != 0.0) out += alpha * std::log(r);
    if (!M.is_one()) out += std::log(M(r));
    return out;
  }
};

enum class IntegralMethod { tensor_adaptive, factorized, radial, cell_gauss, monte_carlo };

inline const char* method_name(IntegralMethod m) {
  switch (m) {
    case IntegralMethod::tensor_adaptive: return "tensor-adaptive";
    case IntegralMethod::factorized: return "factorized";
    case IntegralMethod::radial: return "radial";
    case IntegralMethod::cell_gauss: return "cell-gauss";
    case IntegralMethod::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

struct LogIntegralResult {
  double log_value = kNaN;
  double abs_error_log = 0.0;  // estimated |error| of log_value
  long evaluations = 0;
  IntegralMethod method = IntegralMethod::tensor_adaptive;
  bool saddle_fallback = false;  // peak found by scanning, not by Newton
  bool tolerance_met = true;
  double std_error = 0.0;  // Monte Carlo only, relative
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  int max_doublings = 60;
  int max_panels = 4000;
  long mc_samples = 1L << 18;
  std::uint64_t seed = 42;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 6-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 6> kGl6x = {
    -0.932469514203152027812301554493995, -0.661209386466264513661399595019906,
    -0.238619186083196908630501721680712, 0.238619186083196908630501721680712,
    0.661209386466264513661399595019906,  0.932469514203152027812301554493995};
inline constexpr std::array<double, 6> kGl6w = {
    0.171324492379170345040296142172733, 0.360761573048138607569833513837716,
    0.467913934572691047389870343989551, 0.467913934572691047389870343989551,
    0.360761573048138607569833513837716, 0.171324492379170345040296142172733};

using LogFn = std::function<double(double)>;

struct Panel {
  double a, b;
  double log_value, log_error;
};

inline double checked(double v) {
  if (std::isnan(v)) throw NumericalError("integrand returned NaN");
  if (v == kInf) throw DivergenceError("integrand is +inf");
  return v;
}

inline Panel gk_panel(const LogFn& h, double a, double b, long& evals) {
  const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  std::array<double, 15> l;
  l[0] = checked(h(c));
  for (int j = 0; j < 7; ++j) {
    l[1 + 2 * j] = checked(h(c - hl * kXgk[j]));
    l[2 + 2 * j] = checked(h(c + hl * kXgk[j]));
  }
  evals += 15;
  const double m = *std::max_element(l.begin(), l.end());
  if (m == -kInf) return {a, b, -kInf, -kInf};
  auto e = [&](int k) { return std::exp(l[k] - m); };
  double K = kWgk[7] * e(0), G = kWg[3] * e(0);
  for (int j = 0; j < 7; ++j) {
    const double pair = e(1 + 2 * j) + e(2 + 2 * j);
    K += kWgk[j] * pair;
    if (j % 2 == 1) G += kWg[j / 2] * pair;
  }
  const double err = std::max(std::abs(K - G), 1e-15 * K);
  return {a, b, m + std::log(hl * K), m + std::log(hl * err)};
}

struct Adapted {
  double log_value = -kInf;
  double log_error = -kInf;
  bool converged = true;
};

// Adaptive bisection over the panels spanned by `cuts`; stops when the total
// error is below rel_tol times the total or below exp(log_abs_tol).
inline Adapted adapt(const LogFn& h, const std::vector<double>& cuts, double rel_tol,
                     double log_abs_tol, int max_panels, long& evals) {
  std::vector<Panel> panels;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] > cuts[i - 1]) panels.push_back(gk_panel(h, cuts[i - 1], cuts[i], evals));
  }
  Adapted out;
  const double log_rel = std::log(rel_tol);
  while (true) {
    double val = -kInf, err = -kInf;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      val = log_add(val, panels[i].log_value);
      err = log_add(err, panels[i].log_error);
      if (panels[i].log_error > panels[worst].log_error) worst = i;
    }
    out.log_value = val;
    out.log_error = err;
    if (panels.empty() || err == -kInf || err <= val + log_rel || err <= log_abs_tol) break;
    const Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (static_cast<int>(panels.size()) >= max_panels || !(mid > p.a && mid < p.b) ||
        (p.b - p.a) <= 1e-15 * std::max(std::abs(p.a), std::abs(p.b))) {
      out.converged = false;
      break;
    }
    panels[worst] = gk_panel(h, p.a, mid, evals);
    panels.push_back(gk_panel(h, mid, p.b, evals));
  }
  return out;
}

// Maximizer of h on [a, b]: climb from the guess with doubling steps to a
// bracket, then golden-section search.
inline double locate_peak(const LogFn& h, double a, double b, double guess, double step, long& evals) {
  double x = std::clamp(guess, a, b);
  if (!std::isfinite(x)) x = std::isfinite(a) ? a : (std::isfinite(b) ? b : 0.0);
  step = std::isfinite(step) && step > 0.0 ? step : 1.0;
  auto H = [&](double t) {
    ++evals;
    const double v = h(t);
    return std::isnan(v) ? -kInf : v;
  };
  double fx = H(x);
  // choose the ascending direction
  double dir = 0.0;
  for (int k = 0; k < 60 && dir == 0.0; ++k) {
    const double up = std::min(b, x + step), dn = std::max(a, x - step);
    const double fu = up > x ? H(up) : -kInf;
    const double fd = dn < x ? H(dn) : -kInf;
    if (fu > fx && fu >= fd) {
      dir = 1.0;
    } else if (fd > fx) {
      dir = -1.0;
    } else if (fx == -kInf) {
      step *= 2.0;  // lost in a region where the integrand vanishes
    } else {
      // x beats both neighbours at this step: bracket found
      double lo = dn, hi = up;
      step = hi - lo;
      const double g = 0.5 * (3.0 - std::sqrt(5.0));
      double x1 = lo + g * (hi - lo), x2 = hi - g * (hi - lo);
      double f1 = H(x1), f2 = H(x2);
      for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(x)); ++it) {
        if (f1 >= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = lo + g * (hi - lo);
          f1 = H(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = hi - g * (hi - lo);
          f2 = H(x2);
        }
      }
      const double mid = 0.5 * (lo + hi);
      const double fm = H(mid);
      return fm >= fx ? mid : x;
    }
  }
  if (dir == 0.0) return x;
  // walk uphill with doubling steps
  double prev = x, fprev = fx;
  for (int k = 0; k < 2000; ++k) {
    const double nx = std::clamp(prev + dir * step, a, b);
    if (nx == prev) return prev;  // pinned at the boundary
    const double fn = H(nx);
    if (fn <= fprev) return locate_peak(h, a, b, prev, step, evals);
    prev = nx;
    fprev = fn;
    step *= 2.0;
  }
  throw DivergenceError("integrand keeps increasing; no peak found");
}

// Distance from c at which h has dropped by one unit (the larger side).
inline double drop_width(const LogFn& h, double a, double b, double c, double guess, long& evals) {
  const double hc = h(c);
  double best = 0.0;
  for (double dir : {-1.0, 1.0}) {
    const double room = dir > 0 ? b - c : c - a;
    if (!(room > 0.0)) continue;
    double t = std::min(guess > 0.0 && std::isfinite(guess) ? guess : 1.0, room);
    auto dropped = [&](double s) {
      ++evals;
      return !(h(c + dir * s) > hc - 1.0);
    };
    if (dropped(t)) {
      for (int k = 0; k < 200 && dropped(0.5 * t) && t > 1e-300; ++k) t *= 0.5;
    } else {
      for (int k = 0; k < 200 && !dropped(t) && t < room; ++k) t = std::min(2.0 * t, room);
    }
    best = std::max(best, t);
  }
  return best > 0.0 ? best : 1.0;
}

struct LineResult {
  double log_value;
  double log_error;
  bool converged;
};

// Integral of exp(h) over [a, b] (ends may be infinite), windowed around the
// peak. Throws DivergenceError after max_doublings without tail decay.
inline LineResult integrate_line(const LogFn& h, double a, double b, double guess, double scale,
                                 const QuadratureOptions& opt, long& evals) {
  if (!(a < b)) return {-kInf, -kInf, true};
  const double c = locate_peak(h, a, b, guess, scale, evals);
  const double s = drop_width(h, a, b, c, scale, evals);
  double w = 8.0;
  double lo = std::max(a, c - w * s), hi = std::min(b, c + w * s);
  std::vector<double> cuts = {lo};
  for (double k : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
    const double t = c + k * s;
    if (t > cuts.back() && t < hi) cuts.push_back(t);
  }
  cuts.push_back(hi);
  Adapted core = adapt(h, cuts, opt.rel_tol, -kInf, opt.max_panels, evals);
  double total = core.log_value, err = core.log_error;
  bool ok = core.converged;
  const double log_tail_tol = std::log(opt.rel_tol);
  for (int k = 0; k <= opt.max_doublings; ++k) {
    if (lo <= a && hi >= b) return {total, err, ok};
    if (k == opt.max_doublings) break;
    w *= 2.0;
    const double nlo = std::max(a, c - w * s), nhi = std::min(b, c + w * s);
    double tails = -kInf;
    for (auto [u, v] : {std::pair{nlo, lo}, std::pair{hi, nhi}}) {
      if (!(v > u)) continue;
      const Adapted t = adapt(h, {u, v}, opt.rel_tol, total + log_tail_tol, opt.max_panels, evals);
      tails = log_add(tails, t.log_value);
      err = log_add(err, t.log_error);
      ok = ok && t.converged;
    }
    const double next = log_add(total, tails);
    lo = nlo;
    hi = nhi;
    const bool small = tails == -kInf || (next > -kInf && tails - next <= log_tail_tol);
    total = next;
    if (small && total > -kInf) return {total, err, ok};
  }
  throw DivergenceError("integral does not converge: tails still significant after " +
                        std::to_string(opt.max_doublings) + " window doublings");
}

// 1D integral of exp(h(x)) |x|^alpha M(|x|) over [a, b]. Ranges touching the
// origin with alpha < 0 are mapped by x = t^p, p = 1/(1 + alpha), which turns
// |x|^alpha dx into p dt.
inline LineResult integrate_weighted_line(const LogFn& h, double a, double b, const WeightedMeasure& mu,
                                          double guess, double scale, const QuadratureOptions& opt,
                                          long& evals) {
  if (mu.is_lebesgue()) return integrate_line(h, a, b, guess, scale, opt, evals);
  mu.validate(1);
  auto side = [&](double u, double v, double sign) -> LineResult {
    // integral over sign * [u, v], 0 <= u < v
    if (mu.alpha < 0.0 && u == 0.0) {
      const double p = 1.0 / (1.0 + mu.alpha);
      const double logp = std::log(p);
      auto ht = [&](double t) {
        const double x = std::pow(t, p);
        return h(sign * x) + logp + (mu.M.is_one() ? 0.0 : std::log(mu.M(x)));
      };
      const double gt = std::pow(std::abs(guess), 1.0 / p);
      const double st = std::pow(std::abs(guess) + scale, 1.0 / p) - gt;
      return integrate_line(ht, 0.0, std::pow(v, 1.0 / p), gt, st > 0.0 ? st : 1.0, opt, evals);
    }
    auto hx = [&](double x) { return h(sign * x) + mu.log_density(x); };
    return integrate_line(hx, u, v, std::abs(guess), scale, opt, evals);
  };
  if (a >= 0.0) {
    if (a > 0.0) {
      auto hx = [&](double x) { return h(x) + mu.log_density(x); };
      return integrate_line(hx, a, b, guess, scale, opt, evals);
    }
    return side(0.0, b, 1.0);
  }
  if (b <= 0.0) {
    if (b < 0.0) {
      auto hx = [&](double x) { return h(x) + mu.log_density(-x); };
      return integrate_line(hx, a, b, guess, scale, opt, evals);
    }
    return side(0.0, -a, -1.0);
  }
  const LineResult r = side(0.0, b, 1.0), l = side(0.0, -a, -1.0);
  return {log_add(r.log_value, l.log_value), log_add(r.log_error, l.log_error), r.converged && l.converged};
}

}  // namespace detail

/// exp(H(x)) on a box, with whatever structure the caller can certify.
struct LogIntegrand {
  int dim = 1;
  Vec lo, hi;                                         // integration box (ends may be infinite)
  std::function<double(const Vec&)> log_f;            // H
  std::vector<std::function<double(double)>> axis_terms;  // H = sum_i axis_terms[i](x_i)
  std::function<double(double)> radial;              // H = radial(|x|)
  std::optional<DomainKind> whole_domain;            // box is all of an orthant / R^d
  std::vector<std::vector<double>> breakpoints;      // piecewise-smooth cells (grid sources)
  Vec peak_guess;
  Vec scale_guess;
  bool saddle_fallback = false;
};

namespace detail {

inline LogIntegralResult finish(double log_value, double log_error, long evals, IntegralMethod m, bool ok) {
  LogIntegralResult r;
  r.log_value = log_value;
  r.abs_error_log = log_value == -kInf ? 0.0 : std::exp(log_error - log_value);
  if (!std::isfinite(r.abs_error_log)) r.abs_error_log = 0.0;
  r.evaluations = evals;
  r.method = m;
  r.tolerance_met = ok;
  return r;
}

inline LogIntegralResult radial_path(const LogIntegrand& g, const WeightedMeasure& mu, const QuadratureOptions& opt) {
  const int d = g.dim;
  double log_c = std::log(unit_sphere_area(d));
  if (*g.whole_domain == DomainKind::orthant) log_c -= d * std::numbers::ln2;
  WeightedMeasure radial_mu = mu;
  radial_mu.alpha = mu.alpha + d - 1;
  long evals = 0;
  const double guess = g.peak_guess.size() ? g.peak_guess.norm() : 0.0;
  const double scale = g.scale_guess.size() ? g.scale_guess.maxCoeff() : 1.0;
  const LineResult r = integrate_weighted_line(g.radial, 0.0, kInf, radial_mu, guess, scale, opt, evals);
  return finish(r.log_value + log_c, r.log_error + log_c, evals, IntegralMethod::radial, r.converged);
}

inline LogIntegralResult product_path(const LogIntegrand& g, const QuadratureOptions& opt) {
  long evals = 0;
  double total = 0.0, rel_err = 0.0;
  bool ok = true;
  for (int i = 0; i < g.dim; ++i) {
    const LineResult r = integrate_line(g.axis_terms[i], g.lo[i], g.hi[i], g.peak_guess[i],
                                        g.scale_guess[i], opt, evals);
    if (r.log_value == -kInf) return finish(-kInf, -kInf, evals, IntegralMethod::factorized, r.converged);
    total += r.log_value;
    rel_err += std::exp(r.log_error - r.log_value);
    ok = ok && r.converged;
  }
  LogIntegralResult out = finish(total, -kInf, evals, IntegralMethod::factorized, ok);
  out.abs_error_log = rel_err;
  return out;
}

// Nested lines: axis k is integrated for every abscissa of the axes before it.
inline LogIntegralResult nested_path(const LogIntegrand& g, const WeightedMeasure& mu, const QuadratureOptions& opt) {
  const int d = g.dim;
  long evals = 0;
  double worst_inner = 0.0;
  bool ok = true;
  Vec x = g.peak_guess;
  std::function<LineResult(int)> level = [&](int k) -> LineResult {
    auto h = [&, k](double t) {
      x[k] = t;
      if (k + 1 == d) {
        ++evals;
        const double v = g.log_f(x);
        return mu.is_lebesgue() ? v : v + mu.log_density(x.norm());
      }
      const LineResult r = level(k + 1);
      ok = ok && r.converged;
      if (r.log_value > -kInf) worst_inner = std::max(worst_inner, std::exp(r.log_error - r.log_value));
      return r.log_value;
    };
    return integrate_line(h, g.lo[k], g.hi[k], g.peak_guess[k], g.scale_guess[k], opt, evals);
  };
  const LineResult r = level(0);
  LogIntegralResult out = finish(r.log_value, r.log_error, evals, IntegralMethod::tensor_adaptive, ok && r.converged);
  out.abs_error_log += worst_inner;
  return out;
}

// Tensor 6-point Gauss-Legendre on the cells of the breakpoint grid, for
// integrands that are smooth inside each cell; 1D tails beyond the outer
// breakpoints go through the windowed engine.
inline LogIntegralResult cell_path(const LogIntegrand& g, const WeightedMeasure& mu, const QuadratureOptions& opt) {
  const int d = g.dim;
  std::vector<std::vector<double>> cuts(d);
  for (int a = 0; a < d; ++a) {
    auto& c = cuts[a];
    const double lo = g.lo[a], hi = g.hi[a];
    if (std::isfinite(lo)) c.push_back(lo);
    for (double t : g.breakpoints[a]) {
      if (t > lo && t < hi) c.push_back(t);
    }
    if (std::isfinite(hi)) c.push_back(hi);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) throw InputError("integration box has no interior cells");
    if (d > 1 && (!std::isfinite(lo) || !std::isfinite(hi))) {
      throw UsageError("grid integrands in d >= 2 need a bounded integration box");
    }
  }
  long evals = 0;
  double total = -kInf;
  Vec x(d);
  auto logw = [&](const Vec& p) { return mu.is_lebesgue() ? 0.0 : mu.log_density(p.norm()); };
  std::vector<std::size_t> cell(d, 0), node(d, 0);
  std::vector<double> terms;
  terms.reserve(64);
  while (true) {
    double log_vol = 0.0;
    for (int a = 0; a < d; ++a) log_vol += std::log(0.5 * (cuts[a][cell[a] + 1] - cuts[a][cell[a]]));
    std::fill(node.begin(), node.end(), 0);
    double acc = -kInf;
    while (true) {
      double lw = log_vol;
      for (int a = 0; a < d; ++a) {
        const double u = cuts[a][cell[a]], v = cuts[a][cell[a] + 1];
        x[a] = 0.5 * (u + v) + 0.5 * (v - u) * kGl6x[node[a]];
        lw += std::log(kGl6w[node[a]]);
      }
      ++evals;
      acc = log_add(acc, checked(g.log_f(x)) + logw(x) + lw);
      int a = d - 1;
      while (a >= 0 && ++node[a] == 6) node[a--] = 0;
      if (a < 0) break;
    }
    total = log_add(total, acc);
    int a = d - 1;
    while (a >= 0 && ++cell[a] + 1 == cuts[a].size()) cell[a--] = 0;
    if (a < 0) break;
  }
  double err = total + std::log(1e-13);
  bool ok = true;
  if (d == 1) {
    auto h = [&](double t) { return g.log_f(make_vec({t})); };
    const double first = cuts[0].front(), last = cuts[0].back();
    const double step = cuts[0].size() > 1 ? cuts[0][1] - cuts[0][0] : 1.0;
    for (auto [u, v] : {std::pair{g.lo[0], first}, std::pair{last, g.hi[0]}}) {
      if (!(v > u)) continue;
      const double guess = std::isfinite(u) ? u : v;
      const LineResult r = integrate_weighted_line(h, u, v, mu, guess, step, opt, evals);
      total = log_add(total, r.log_value);
      err = log_add(err, r.log_error);
      ok = ok && r.converged;
    }
  }
  return finish(total, err, evals, IntegralMethod::cell_gauss, ok);
}

// Importance sampling from a Gaussian fitted at the peak (covariance inflated
// by 1.5^2). Draw i depends only on (seed, i); batches merge in index order.
inline LogIntegralResult monte_carlo_path(const LogIntegrand& g, const WeightedMeasure& mu,
                                          const QuadratureOptions& opt) {
  const int d = g.dim;
  long evals = 0;
  auto H = [&](const Vec& p) {
    for (int a = 0; a < d; ++a) {
      if (p[a] < g.lo[a] || p[a] > g.hi[a]) return -kInf;
    }
    const double v = g.log_f(p);
    return mu.is_lebesgue() ? v : v + mu.log_density(p.norm());
  };
  // refine the peak coordinatewise
  Vec c = g.peak_guess;
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int a = 0; a < d; ++a) {
      auto h1 = [&](double t) {
        Vec p = c;
        p[a] = t;
        return H(p);
      };
      c[a] = locate_peak(h1, g.lo[a], g.hi[a], c[a], g.scale_guess[a], evals);
    }
  }
  // curvature of -H by central differences
  Mat Hm(d, d);
  Vec step(d);
  for (int a = 0; a < d; ++a) step[a] = 1e-3 * std::max(g.scale_guess[a], 1e-6);
  const double h0 = H(c);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      Vec pp = c, pm = c, mp = c, mm = c;
      pp[a] += step[a]; pp[b] += step[b];
      pm[a] += step[a]; pm[b] -= step[b];
      mp[a] -= step[a]; mp[b] += step[b];
      mm[a] -= step[a]; mm[b] -= step[b];
      double v;
      if (a == b) {
        Vec p1 = c, m1 = c;
        p1[a] += step[a];
        m1[a] -= step[a];
        v = (H(p1) - 2.0 * h0 + H(m1)) / (step[a] * step[a]);
      } else {
        v = (H(pp) - H(pm) - H(mp) + H(mm)) / (4.0 * step[a] * step[b]);
      }
      Hm(a, b) = Hm(b, a) = -v;
    }
  }
  Mat cov;
  Eigen::SelfAdjointEigenSolver<Mat> eig(Hm);
  if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0 && Hm.allFinite()) {
    cov = Hm.inverse();
  } else {
    cov = Mat::Zero(d, d);
    for (int a = 0; a < d; ++a) cov(a, a) = g.scale_guess[a] * g.scale_guess[a];
  }
  cov *= 2.25;
  const Mat Lc = Eigen::LLT<Mat>(cov).matrixL();
  const double log_det = 2.0 * Lc.diagonal().array().log().sum();
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  const CounterRng rng(opt.seed);
  const long n = opt.mc_samples;
  const long batch = 4096;
  const std::size_t nb = static_cast<std::size_t>((n + batch - 1) / batch);
  std::vector<double> b_max(nb), b_sum(nb), b_sq(nb);
  parallel_for(nb, [&](std::size_t k) {
    std::vector<double> lw;
    const long from = static_cast<long>(k) * batch, to = std::min(n, from + batch);
    Vec z(d);
    for (long i = from; i < to; ++i) {
      for (int a = 0; a < d; ++a) z[a] = rng.normal(static_cast<std::uint64_t>(i) * d + a);
      const Vec p = c + Lc * z;
      lw.push_back(H(p) - (log_norm - 0.5 * z.squaredNorm()));
    }
    const double m = *std::max_element(lw.begin(), lw.end());
    double s = 0.0, q = 0.0;
    if (m > -kInf) {
      for (double v : lw) {
        const double e = std::exp(v - m);
        s += e;
        q += e * e;
      }
    }
    b_max[k] = m;
    b_sum[k] = s;
    b_sq[k] = q;
  });
  double m = -kInf;
  for (double v : b_max) m = std::max(m, v);
  if (m == -kInf) throw NumericalError("Monte Carlo integrand vanished on every sample");
  double s = 0.0, q = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    if (b_max[k] == -kInf) continue;
    s += b_sum[k] * std::exp(b_max[k] - m);
    q += b_sq[k] * std::exp(2.0 * (b_max[k] - m));
  }
  const double mean = s / n;
  const double var = std::max(q / n - mean * mean, 0.0);
  LogIntegralResult out;
  out.log_value = m + std::log(mean);
  out.std_error = std::sqrt(var / n) / mean;
  out.abs_error_log = out.std_error;
  out.evaluations = evals + n;
  out.method = IntegralMethod::monte_carlo;
  return out;
}

}  // namespace detail

/// ln of the integral of exp(H) over the integrand's box against mu.
inline LogIntegralResult integrate(const LogIntegrand& g, const WeightedMeasure& mu,
                                   const QuadratureOptions& opt = {}) {
  mu.validate(g.dim);
  require(g.lo.size() == g.dim && g.hi.size() == g.dim, "integration box has the wrong dimension");
  LogIntegrand h = g;
  if (h.peak_guess.size() != h.dim) h.peak_guess = Vec::Zero(h.dim);
  if (h.scale_guess.size() != h.dim) h.scale_guess = Vec::Ones(h.dim);
  for (int a = 0; a < h.dim; ++a) {
    if (!std::isfinite(h.peak_guess[a])) h.peak_guess[a] = 0.0;
    h.peak_guess[a] = std::clamp(h.peak_guess[a], h.lo[a], h.hi[a]);
    if (!(h.scale_guess[a] > 0.0) || !std::isfinite(h.scale_guess[a])) h.scale_guess[a] = 1.0;
  }
  LogIntegralResult out;
  if (!h.breakpoints.empty()) {
    out = detail::cell_path(h, mu, opt);
  } else if (h.dim == 1) {
    long evals = 0;
    auto line = [&](double t) { return h.log_f(make_vec({t})); };
    const auto r = detail::integrate_weighted_line(line, h.lo[0], h.hi[0], mu, h.peak_guess[0],
                                                   h.scale_guess[0], opt, evals);
    out = detail::finish(r.log_value, r.log_error, evals, IntegralMethod::tensor_adaptive, r.converged);
  } else if (h.radial && h.whole_domain && *h.whole_domain != DomainKind::box) {
    out = detail::radial_path(h, mu, opt);
  } else if (!h.axis_terms.empty() && mu.is_lebesgue()) {
    out = detail::product_path(h, opt);
  } else if (h.dim <= 3) {
    out = detail::nested_path(h, mu, opt);
  } else if (h.dim <= 6) {
    out = detail::monte_carlo_path(h, mu, opt);
  } else {
    throw InputError("integrals are supported for d <= 6");
  }
  out.saddle_fallback = h.saddle_fallback;
  return out;
}

namespace detail {

// Pieces of H that depend only on one axis (separable analytic objectives).
inline std::function<double(double)> axis_profile_fn(const Objective& f, int axis) {
  const auto& ps = f.profiles();
  const Profile p = ps.size() == 1 ? ps.front() : ps[axis];
  const double s = f.scale();
  return [p, s](double t) { return s * p.value(t); };
}

inline LogIntegrand base_integrand(const Objective& f, const std::optional<Vec>& lo, const std::optional<Vec>& hi) {
  const Domain& dom = f.domain();
  LogIntegrand g;
  g.dim = f.dim();
  const Bounds b = Bounds::of(dom);
  g.lo = lo ? b.lo.cwiseMax(*lo) : b.lo;
  g.hi = hi ? b.hi.cwiseMin(*hi) : b.hi;
  if ((g.lo.array() > g.hi.array()).any()) throw InputError("integration region does not meet the domain");
  if (!lo && !hi) g.whole_domain = dom.kind;
  if (f.family() == Family::grid) {
    const GridFn& gf = *f.grid_fn();
    const bool bounded_grid = gf.extension() == Extension::plus_infinity;
    for (int a = 0; a < g.dim; ++a) {
      g.breakpoints.push_back(gf.nodes(a));
      if (bounded_grid) {
        g.lo[a] = std::max(g.lo[a], gf.nodes(a).front());
        g.hi[a] = std::min(g.hi[a], gf.nodes(a).back());
      }
    }
  }
  return g;
}

inline Vec peak_scale_from_hessian(const Objective& f, const Vec& x, double factor) {
  Vec s = Vec::Ones(f.dim());
  try {
    const Mat H = f.hessian(x).value;
    for (int a = 0; a < f.dim(); ++a) {
      const double c = factor * H(a, a);
      s[a] = c > 0.0 ? 1.0 / std::sqrt(c) : 1.0;
    }
  } catch (const NumericalError&) {
  }
  return s;
}

}  // namespace detail

/// ln I(lambda) = ln of the integral of exp((lambda, x) - zeta(x)) mu(dx),
/// optionally restricted to the box [lo, hi].
inline LogIntegralResult log_laplace_integral(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                              const QuadratureOptions& opt = {},
                                              const std::optional<Vec>& lo = std::nullopt,
                                              const std::optional<Vec>& hi = std::nullopt) {
  require(lambda.size() == f.dim(), "dimension mismatch in Laplace integral");
  require(lambda.allFinite(), "lambda must be finite");
  LogIntegrand g = detail::base_integrand(f, lo, hi);
  g.log_f = [&f, lambda](const Vec& x) { return lambda.dot(x) - f.eval(x); };
  if (f.is_separable() && f.family() != Family::grid && f.family() != Family::custom) {
    for (int a = 0; a < f.dim(); ++a) {
      auto prof = detail::axis_profile_fn(f, a);
      const double l = lambda[a];
      g.axis_terms.push_back([prof, l](double t) { return l * t - prof(t); });
    }
  }
  if (f.family() != Family::grid) {
    const SaddleResult sr = find_saddle(f, lambda);
    if (sr.converged) {
      g.peak_guess = sr.x0;
    } else {
      g.peak_guess = f.default_saddle_start(lambda);
      g.saddle_fallback = true;
    }
    g.scale_guess = detail::peak_scale_from_hessian(f, g.peak_guess, 1.0);
  }
  return integrate(g, mu, opt);
}

/// ln K(eps), K(eps) = integral of exp(-eps zeta) mu(dx).
inline LogIntegralResult k_integral(const Objective& f, const WeightedMeasure& mu, double eps,
                                    const QuadratureOptions& opt = {},
                                    const std::optional<Vec>& lo = std::nullopt,
                                    const std::optional<Vec>& hi = std::nullopt) {
  require(eps > 0.0 && std::isfinite(eps), "eps must be positive");
  LogIntegrand g = detail::base_integrand(f, lo, hi);
  g.log_f = [&f, eps](const Vec& x) { return -eps * f.eval(x); };
  if (f.is_analytic()) {
    if (f.is_separable()) {
      for (int a = 0; a < f.dim(); ++a) {
        auto prof = detail::axis_profile_fn(f, a);
        g.axis_terms.push_back([prof, eps](double t) { return -eps * prof(t); });
      }
    }
    if (f.coupling() == Coupling::radial || f.dim() == 1) {
      const Profile p = f.profiles().front();
      const double s = f.scale();
      g.radial = [p, s, eps](double r) { return -eps * s * p.value(r); };
    }
  }
  if (f.family() != Family::grid) {
    const SaddleResult sr = find_saddle(f, Vec::Zero(f.dim()));
    g.peak_guess = sr.x0;
    g.saddle_fallback = !sr.converged;
    g.scale_guess = detail::peak_scale_from_hessian(f, g.peak_guess, eps);
  }
  return integrate(g, mu, opt);
}

/// ln Z(eps), Z(eps) = integral of exp(zeta((1 - eps) x) - zeta(x)) mu(dx).
inline LogIntegralResult z_integral(const Objective& f, const WeightedMeasure& mu, double eps,
                                    const QuadratureOptions& opt = {},
                                    const std::optional<Vec>& lo = std::nullopt,
                                    const std::optional<Vec>& hi = std::nullopt) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const double c = 1.0 - eps;
  LogIntegrand g = detail::base_integrand(f, lo, hi);
  g.log_f = [&f, c](const Vec& x) {
    const double outer = f.eval(x);
    return outer == kInf ? -kInf : f.eval(c * x) - outer;
  };
  if (f.is_analytic()) {
    if (f.is_separable()) {
      for (int a = 0; a < f.dim(); ++a) {
        auto prof = detail::axis_profile_fn(f, a);
        g.axis_terms.push_back([prof, c](double t) { return prof(c * t) - prof(t); });
      }
    }
    if (f.coupling() == Coupling::radial || f.dim() == 1) {
      const Profile p = f.profiles().front();
      const double s = f.scale();
      g.radial = [p, s, c](double r) { return s * (p.value(c * r) - p.value(r)); };
    }
  }
  if (f.family() == Family::grid) {
    for (int a = 0; a < f.dim(); ++a) {
      auto& bp = g.breakpoints[a];
      const std::size_t n = bp.size();
      for (std::size_t i = 0; i < n; ++i) bp.push_back(bp[i] / c);
      std::sort(bp.begin(), bp.end());
    }
  } else {
    const SaddleResult sr = find_saddle(f, Vec::Zero(f.dim()));
    g.peak_guess = sr.x0;
    g.saddle_fallback = !sr.converged;
    g.scale_guess = detail::peak_scale_from_hessian(f, g.peak_guess, 1.0 - c * c);
  }
  return integrate(g, mu, opt);
}

enum class RBranch { k, z };

struct RIntegralResult {
  LogIntegralResult value;
  RBranch branch = RBranch::k;
  std::optional<LogIntegralResult> k, z;
};

/// ln R(eps) = min(ln K(eps), ln Z(eps)); a divergent branch is skipped.
inline RIntegralResult r_integral(const Objective& f, const WeightedMeasure& mu, double eps,
                                  const QuadratureOptions& opt = {},
                                  const std::optional<Vec>& lo = std::nullopt,
                                  const std::optional<Vec>& hi = std::nullopt) {
  RIntegralResult out;
  std::string why;
  try {
    out.k = k_integral(f, mu, eps, opt, lo, hi);
  } catch (const DivergenceError& e) {
    why = e.what();
  }
  try {
    if (eps < 1.0) out.z = z_integral(f, mu, eps, opt, lo, hi);
  } catch (const DivergenceError& e) {
    why = e.what();
  }
  if (!out.k && !out.z) throw DivergenceError("both K(eps) and Z(eps) diverge: " + why);
  if (out.k && (!out.z || out.k->log_value <= out.z->log_value)) {
    out.value = *out.k;
    out.branch = RBranch::k;
  } else {
    out.value = *out.z;
    out.branch = RBranch::z;
  }
  return out;
}

/// ln mu(X) for a box domain.
inline double log_total_mass(const Domain& dom, const WeightedMeasure& mu, const QuadratureOptions& opt = {}) {
  if (dom.kind != DomainKind::box) throw UsageError("mu(X) is infinite on unbounded domains; use methods B-D");
  if (mu.is_lebesgue()) return std::log(dom.volume());
  LogIntegrand g;
  g.dim = dom.dim;
  g.lo = dom.lower;
  g.hi = dom.upper;
  g.log_f = [](const Vec&) { return 0.0; };
  g.peak_guess = 0.5 * (dom.lower + dom.upper);
  g.scale_guess = dom.upper - dom.lower;
  return integrate(g, mu, opt).log_value;
}

/// Threshold above which K(eps) is finite given a finite moment generating
/// function at lambda0: max_i 1 / lambda0(i).
inline double cramer_epsilon_threshold(const Vec& lambda0) {
  require(lambda0.size() >= 1, "lambda0 must be nonempty");
  if (!((lambda0.array() > 0.0).all())) throw InputError("lambda0 must be componentwise positive");
  return (1.0 / lambda0.array()).maxCoeff();
}

enum class AngularConstant { sphere_area, ball_volume };

/// Predicted K-bar(eps) as eps -> 0 for zeta = |x|^m L(|x|) on R^d with
/// mu(dx) = |x|^alpha M(|x|) dx:
///   (c_d / m) eps^{-(alpha+d)/m} Gamma((alpha+d)/m) M(eps^{-1/m}) / L(eps^{-1/m})^{(alpha+d)/m}.
/// c_d is the area of the unit sphere (the polar-coordinates Jacobian); the
/// ball volume is available for comparison.
inline double k_asymptotic_regular(double alpha, double m, int d, const SlowVary& L, const SlowVary& M, double eps,
                                   AngularConstant c = AngularConstant::sphere_area) {
  require(d >= 1, "dimension must be >= 1");
  require(alpha > -d, "alpha must exceed -d");
  require(m > 0.0, "m must be positive");
  require(eps > 0.0, "eps must be positive");
  const double k = (alpha + d) / m;
  const double r = std::pow(eps, -1.0 / m);
  const double cd = c == AngularConstant::sphere_area ? unit_sphere_area(d) : unit_ball_volume(d);
  return cd / m * std::pow(eps, -k) * std::tgamma(k) * M(r) / std::pow(L(r), k);
}

enum class LevelSetMethod { ellipsoid, exact, monte_carlo };

inline const char* method_name(LevelSetMethod m) {
  switch (m) {
    case LevelSetMethod::ellipsoid: return "ellipsoid";
    case LevelSetMethod::exact: return "exact";
    case LevelSetMethod::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

struct LevelSetResult {
  double measure = 0.0;
  double std_error = 0.0;  // Monte Carlo only, absolute
  double gap = 0.0;        // delta = zeta*(lambda) - zeta*(lambda (1 - eps))
  double threshold = kNaN;
  LevelSetMethod method = LevelSetMethod::exact;
  double proxy_gap = kNaN;  // eps (lambda, x0), the first-order threshold variant
};

namespace detail {

// Ends of {t in [a, b] : s(t) >= thr} for concave s with s(c) >= thr.
inline std::pair<double, double> superlevel_interval(const LogFn& s, double a, double b, double c, double thr,
                                                     double scale) {
  auto edge = [&](double dir) {
    const double limit = dir > 0 ? b : a;
    double inside = c;
    double step = scale > 0.0 && std::isfinite(scale) ? scale : 1.0;
    double out = c;
    for (int k = 0; k < 2000; ++k) {
      out = dir > 0 ? std::min(limit, inside + step) : std::max(limit, inside - step);
      if (s(out) < thr) break;
      if (out == limit) return limit;
      inside = out;
      step *= 2.0;
    }
    for (int k = 0; k < 200 && std::abs(out - inside) > 1e-15 * (1.0 + std::abs(inside)); ++k) {
      const double mid = 0.5 * (inside + out);
      (s(mid) >= thr ? inside : out) = mid;
    }
    return 0.5 * (inside + out);
  };
  return {edge(-1.0), edge(1.0)};
}

// Plain adaptive Gauss-Kronrod for a bounded nonnegative integrand.
inline double plain_integral(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  long evals = 0;
  auto lf = [&](double t) {
    const double v = f(t);
    return v > 0.0 ? std::log(v) : -kInf;
  };
  const Adapted r = adapt(lf, {a, 0.5 * (a + b), b}, rel_tol, -kInf, 4000, evals);
  return r.log_value == -kInf ? 0.0 : std::exp(r.log_value);
}

// Weighted length of an interval on a coordinate line.
inline double line_measure(const WeightedMeasure& mu, double u, double v, const std::function<double(double)>& radius) {
  if (!(v > u)) return 0.0;
  if (mu.is_lebesgue()) return v - u;
  return plain_integral([&](double t) { return std::exp(mu.log_density(radius(t))); }, u, v, 1e-10);
}

}  // namespace detail

/// U(eps, lambda) = mu{x in X : S(lambda, x) >= zeta*(lambda (1 - eps))}.
inline LevelSetResult level_set_measure(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                        LevelSetMethod method, const QuadratureOptions& opt = {}) {
  require(lambda.size() == f.dim(), "dimension mismatch in level set");
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
  mu.validate(f.dim());
  LevelSetResult out;
  out.method = method;
  if (eps == 0.0) return out;
  const ConjugateValue top = conjugate_value(f, lambda);
  out.threshold = conjugate_value(f, (1.0 - eps) * lambda).value;
  out.gap = top.value - out.threshold;
  out.proxy_gap = eps * lambda.dot(top.argmax);
  if (!(out.gap > 0.0)) return out;
  const int d = f.dim();
  const Vec& x0 = top.argmax;
  auto S = [&](const Vec& x) { return lambda.dot(x) - f.eval(x); };

  switch (method) {
    case LevelSetMethod::ellipsoid: {
      if (!mu.is_lebesgue()) throw UsageError("the ellipsoid level set is for Lebesgue measure");
      const HessianResult h = f.hessian(x0);
      if (!h.positive_definite) throw PreconditionError("ellipsoid level set needs a positive-definite Hessian at x0");
      out.measure = unit_ball_volume(d) * std::pow(2.0 * out.gap, 0.5 * d) / std::sqrt(h.value.determinant());
      return out;
    }
    case LevelSetMethod::exact: {
      const detail::Bounds b = detail::Bounds::of(f.domain());
      const double thr = out.threshold;
      const Vec sc = detail::peak_scale_from_hessian(f, x0, 1.0);
      if (d == 1) {
        auto s1 = [&](double t) { return S(make_vec({t})); };
        const auto [u, v] = detail::superlevel_interval(s1, b.lo[0], b.hi[0], x0[0], thr, sc[0]);
        out.measure = detail::line_measure(mu, u, v, [](double t) { return std::abs(t); });
        return out;
      }
      if (d == 2) {
        long evals = 0;
        // inner max over x2 for fixed x1 (concave in x1)
        auto inner_peak = [&](double t1, double guess) {
          auto h = [&](double t2) { return S(make_vec({t1, t2})); };
          const double c2 = detail::locate_peak(h, b.lo[1], b.hi[1], guess, sc[1], evals);
          return std::pair{c2, h(c2)};
        };
        auto p1 = [&](double t1) { return inner_peak(t1, x0[1]).second; };
        const auto [u1, v1] = detail::superlevel_interval(p1, b.lo[0], b.hi[0], x0[0], thr, sc[0]);
        auto slice = [&](double t1) {
          const auto [c2, top2] = inner_peak(t1, x0[1]);
          if (top2 < thr) return 0.0;
          auto h = [&](double t2) { return S(make_vec({t1, t2})); };
          const auto [u2, v2] = detail::superlevel_interval(h, b.lo[1], b.hi[1], c2, thr, sc[1]);
          return detail::line_measure(mu, u2, v2, [t1](double t2) { return std::hypot(t1, t2); });
        };
        // t1 = mid + half sin(theta) absorbs the square-root ends of the slice length
        const double mid = 0.5 * (u1 + v1), half = 0.5 * (v1 - u1);
        out.measure = detail::plain_integral(
            [&](double th) { return slice(mid + half * std::sin(th)) * half * std::cos(th); },
            -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, 1e-10);
        return out;
      }
      throw UsageError("exact level sets are implemented for d <= 2; use ellipsoid or monte_carlo");
    }
    case LevelSetMethod::monte_carlo: {
      const HessianResult h = f.hessian(x0);
      if (!h.positive_definite) throw PreconditionError("Monte Carlo level set needs a positive-definite Hessian at x0");
      const Mat inv = h.value.inverse();
      const detail::Bounds b = detail::Bounds::of(f.domain());
      Vec lo(d), hi(d);
      for (int a = 0; a < d; ++a) {
        const double half = 3.0 * std::sqrt(2.0 * out.gap * inv(a, a));
        lo[a] = std::max(b.lo[a], x0[a] - half);
        hi[a] = std::min(b.hi[a], x0[a] + half);
      }
      const double box = (hi - lo).prod();
      const CounterRng rng(opt.seed);
      const long n = opt.mc_samples;
      const long batch = 8192;
      const std::size_t nb = static_cast<std::size_t>((n + batch - 1) / batch);
      std::vector<double> s1(nb), s2(nb);
      const double thr = out.threshold;
      parallel_for(nb, [&](std::size_t k) {
        const long from = static_cast<long>(k) * batch, to = std::min(n, from + batch);
        Vec x(d);
        double a1 = 0.0, a2 = 0.0;
        for (long i = from; i < to; ++i) {
          for (int a = 0; a < d; ++a) {
            x[a] = lo[a] + (hi[a] - lo[a]) * rng.uniform(static_cast<std::uint64_t>(i) * d + a);
          }
          if (S(x) >= thr) {
            const double w = mu.is_lebesgue() ? 1.0 : std::exp(mu.log_density(x.norm()));
            a1 += w;
            a2 += w * w;
          }
        }
        s1[k] = a1;
        s2[k] = a2;
      });
      double a1 = 0.0, a2 = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        a1 += s1[k];
        a2 += s2[k];
      }
      const double mean = a1 / n;
      out.measure = box * mean;
      out.std_error = box * std::sqrt(std::max(a2 / n - mean * mean, 0.0) / n);
      return out;
    }
  }
  return out;
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_QUADRATURE_HPP_
