#ifndef LAPLACE_BOUNDS_BOUNDS_HPP_
#define LAPLACE_BOUNDS_BOUNDS_HPP_

// Upper and lower estimates for ln I(lambda). Every bound is returned as a
// logarithm together with the parameters that produced it.
//
// Upper:  A  mu(X) exp(zeta*(lambda))                         (finite mass)
//         B  K(eps) exp((1 - eps) zeta*(lambda / (1 - eps)))
//         C  Z(eps) exp(zeta*(lambda / (1 - eps)))
//         D  R(eps) exp(zeta*(lambda / (1 - eps))), R = min(K, Z)
//         E  partition X = X0 + X1 with regional conjugates
//         T  e^{C(phi)} R(pi_kappa(lambda)) exp(zeta*(lambda))
// Lower:  U(eps, lambda) exp(zeta*(lambda (1 - eps)))  and its kappa form
//         V(lambda) exp(zeta*(lambda)).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "laplace_bounds/conjugate.hpp"
#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/quadrature.hpp"
#include "laplace_bounds/saddle.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

inline std::vector<double> log_spaced(double a, double b, std::size_t n) {
  require(a > 0.0 && b > a && n >= 2, "log-spaced grid needs 0 < a < b and n >= 2");
  std::vector<double> out(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = i + 1 == n ? b : std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = a;
  return out;
}

struct EpsilonPolicy {
  enum class Kind { fixed, pi_kappa, grid };
  Kind kind = Kind::grid;
  double eps = kNaN;
  double kappa = kNaN;
  std::vector<double> grid;

  static EpsilonPolicy fixed(double eps) {
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    EpsilonPolicy p;
    p.kind = Kind::fixed;
    p.eps = eps;
    return p;
  }
  static EpsilonPolicy from_pi_kappa(double kappa) {
    require(kappa > 0.0 && std::isfinite(kappa), "kappa must be positive");
    EpsilonPolicy p;
    p.kind = Kind::pi_kappa;
    p.kappa = kappa;
    return p;
  }
  static EpsilonPolicy from_grid(std::vector<double> grid) {
    require(!grid.empty(), "eps grid must be nonempty");
    std::sort(grid.begin(), grid.end());
    for (double e : grid) require(e > 0.0 && e < 1.0, "eps grid values must lie in (0, 1)");
    EpsilonPolicy p;
    p.kind = Kind::grid;
    p.grid = std::move(grid);
    return p;
  }
  /// 25 log-spaced points in [1e-4, 0.5].
  static EpsilonPolicy default_grid() { return from_grid(log_spaced(1e-4, 0.5, 25)); }
};

enum class UpperMethod { A, B, C, D, E, R };
enum class LowerMethod { U, V };

inline const char* method_name(UpperMethod m) {
  switch (m) {
    case UpperMethod::A: return "A";
    case UpperMethod::B: return "B";
    case UpperMethod::C: return "C";
    case UpperMethod::D: return "D";
    case UpperMethod::E: return "E";
    case UpperMethod::R: return "R";
  }
  return "?";
}
inline const char* method_name(LowerMethod m) { return m == LowerMethod::U ? "U" : "V"; }

struct UpperBound {
  double log_value = kInf;
  UpperMethod method = UpperMethod::B;
  double eps = kNaN;
  double kappa = kNaN;
  double log_prefactor = kNaN;  // ln mu(X), ln K, ln Z or ln R
  double exponent = kNaN;       // the conjugate term
  double c_phi_used = kNaN;
  double c_phi_estimate = kNaN;
  bool pi_clamped = false;
  std::vector<std::string> flags;
};

struct LowerBound {
  double log_value = -kInf;  // -inf: vacuous (empty level set)
  LowerMethod method = LowerMethod::U;
  double eps = kNaN;
  double kappa = kNaN;
  double log_measure = -kInf;  // ln U
  double exponent = kNaN;
  LevelSetMethod level_set = LevelSetMethod::exact;
};

inline LevelSetMethod default_level_set_method(int d) {
  return d <= 2 ? LevelSetMethod::exact : LevelSetMethod::ellipsoid;
}

// ---------------------------------------------------------------- upper

/// ln mu(X) + zeta*(lambda).
inline UpperBound upper_bound_a(double log_mass, const Objective& f, const Vec& lambda) {
  if (!std::isfinite(log_mass)) throw UsageError("method A needs a finite total mass; use methods B-D");
  UpperBound out;
  out.method = UpperMethod::A;
  out.log_prefactor = log_mass;
  out.exponent = conjugate_value(f, lambda).value;
  out.log_value = log_mass + out.exponent;
  return out;
}

inline UpperBound upper_bound_a(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                const QuadratureOptions& opt = {}) {
  return upper_bound_a(log_total_mass(f.domain(), mu, opt), f, lambda);
}

/// ln K(eps) + (1 - eps) zeta*(lambda / (1 - eps)).
inline UpperBound upper_bound_b(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                const QuadratureOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  UpperBound out;
  out.method = UpperMethod::B;
  out.eps = eps;
  out.log_prefactor = k_integral(f, mu, eps, opt).log_value;
  out.exponent = dilated_conjugate(f, lambda, 1.0 - eps);
  out.log_value = out.log_prefactor + out.exponent;
  return out;
}

/// ln Z(eps) + zeta*(lambda / (1 - eps)).
inline UpperBound upper_bound_c(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                const QuadratureOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  UpperBound out;
  out.method = UpperMethod::C;
  out.eps = eps;
  out.log_prefactor = z_integral(f, mu, eps, opt).log_value;
  out.exponent = conjugate_value(f, lambda / (1.0 - eps)).value;
  out.log_value = out.log_prefactor + out.exponent;
  return out;
}

/// ln R(eps) + zeta*(lambda / (1 - eps)).
inline UpperBound upper_bound_d(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                const QuadratureOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  UpperBound out;
  out.method = UpperMethod::D;
  out.eps = eps;
  const RIntegralResult r = r_integral(f, mu, eps, opt);
  out.log_prefactor = r.value.log_value;
  out.flags.push_back(r.branch == RBranch::k ? "R=K" : "R=Z");
  out.exponent = conjugate_value(f, lambda / (1.0 - eps)).value;
  out.log_value = out.log_prefactor + out.exponent;
  return out;
}

namespace detail {

// min(B, C) at one eps; +inf when both diverge.
inline UpperBound best_of_bc(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                             const QuadratureOptions& opt) {
  UpperBound best;
  for (auto method : {UpperMethod::B, UpperMethod::C}) {
    try {
      UpperBound u = method == UpperMethod::B ? upper_bound_b(f, mu, lambda, eps, opt)
                                              : upper_bound_c(f, mu, lambda, eps, opt);
      if (u.log_value < best.log_value) best = u;
    } catch (const DivergenceError&) {
    }
  }
  return best;
}

}  // namespace detail

/// Smallest of B and C over the policy's eps values, refined by three
/// golden-section steps (in ln eps) around the best grid point.
inline UpperBound upper_bound_best(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                   const EpsilonPolicy& policy, const QuadratureOptions& opt = {}) {
  std::vector<double> eps;
  switch (policy.kind) {
    case EpsilonPolicy::Kind::fixed: eps = {policy.eps}; break;
    case EpsilonPolicy::Kind::pi_kappa: eps = {pi_kappa(f, lambda, policy.kappa).value}; break;
    case EpsilonPolicy::Kind::grid: eps = policy.grid; break;
  }
  std::vector<UpperBound> scan;
  for (double e : eps) scan.push_back(detail::best_of_bc(f, mu, lambda, e, opt));
  std::size_t k = 0;
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].log_value < scan[k].log_value) k = i;
  }
  if (!std::isfinite(scan[k].log_value)) throw DivergenceError("every eps in the policy gives a divergent bound");
  UpperBound best = scan[k];
  if (scan.size() >= 3) {
    double a = std::log(eps[k == 0 ? 0 : k - 1]);
    double b = std::log(eps[k + 1 == eps.size() ? k : k + 1]);
    const double g = 0.5 * (3.0 - std::sqrt(5.0));
    auto eval = [&](double le) {
      UpperBound u = detail::best_of_bc(f, mu, lambda, std::exp(le), opt);
      if (u.log_value < best.log_value) best = u;
      return u.log_value;
    };
    double x1 = a + g * (b - a), x2 = b - g * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 3; ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = a + g * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = b - g * (b - a);
        f2 = eval(x2);
      }
    }
  }
  return best;
}

/// Empirical C(phi) for phi = zeta* along the ray through lambda, on s lambda
/// with s log-spaced in [1, 1000].
inline CPhiEstimate c_phi_on_ray(const Objective& f, const Vec& lambda, double kappa) {
  std::vector<Vec> grid;
  for (double s : log_spaced(1.0, 1000.0, 31)) grid.push_back(s * lambda);
  return estimate_c_phi(f, grid, kappa);
}

/// c + ln R(pi_kappa(lambda)) + zeta*(lambda) with
/// c = max(1.1 C(phi)-estimate, zeta*(lambda / (1 - pi)) - zeta*(lambda)).
/// The second term makes the value dominate method D at eps = pi, so the
/// bound stays valid whatever the estimate.
inline UpperBound upper_bound_r(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double kappa,
                                    std::optional<double> c_phi = std::nullopt, const QuadratureOptions& opt = {}) {
  if (!f.domain().meets_growth_condition()) throw UsageError("this bound needs an unbounded domain");
  const PiKappa pk = pi_kappa(f, lambda, kappa);
  UpperBound out;
  out.method = UpperMethod::R;
  out.kappa = kappa;
  out.eps = pk.value;
  out.pi_clamped = pk.clamped;
  if (pk.clamped) out.flags.push_back("pi_kappa clamped to 1/2");
  if (!c_phi) {
    try {
      c_phi = c_phi_on_ray(f, lambda, kappa).value;
    } catch (const InputError&) {
      c_phi = 0.0;
      out.flags.push_back("no ray point with pi_kappa <= 1/2; C(phi) from the local shift");
    }
  }
  out.c_phi_estimate = *c_phi;
  const double phi = conjugate_value(f, lambda).value;
  const double local = conjugate_value(f, lambda / (1.0 - pk.value)).value - phi;
  out.c_phi_used = std::max(1.1 * *c_phi, local);
  if (local > 1.1 * *c_phi) out.flags.push_back("local shift exceeds 1.1 C(phi) estimate");
  const RIntegralResult r = r_integral(f, mu, pk.value, opt);
  out.log_prefactor = r.value.log_value;
  out.exponent = phi;
  out.log_value = out.c_phi_used + out.log_prefactor + phi;
  return out;
}

/// Axis-aligned box X0 = [lo, hi] (inside the domain) and X1 = X \ X0:
///   W = mu(X0) e^{zeta*[X0](lambda)} + min over branches of
///       K[X1](eps) e^{(1-eps) zeta*[X1](lambda/(1-eps))}  and
///       Z[X1](eps) e^{zeta*[(1-eps) X1](lambda/(1-eps))}.
/// The Z branch takes its supremum over (1 - eps) X1, the set that y = (1 - eps) x
/// ranges over.
inline UpperBound partition_bound(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                  const Vec& lo, const Vec& hi, const QuadratureOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const int d = f.dim();
  require(lo.size() == d && hi.size() == d, "partition box has the wrong dimension");
  require((lo.array() < hi.array()).all(), "partition box needs lo < hi");
  const detail::Bounds dom = detail::Bounds::of(f.domain());
  const Vec blo = lo.cwiseMax(dom.lo), bhi = hi.cwiseMin(dom.hi);
  if (!(blo.array() < bhi.array()).all()) throw InputError("partition box does not meet the domain");
  if (!(bhi.array().isFinite().all() && blo.array().isFinite().all())) throw InputError("X0 must be bounded");

  UpperBound out;
  out.method = UpperMethod::E;
  out.eps = eps;
  double log_mass;
  if (mu.is_lebesgue()) {
    log_mass = std::log((bhi - blo).prod());
  } else {
    LogIntegrand g;
    g.dim = d;
    g.lo = blo;
    g.hi = bhi;
    g.log_f = [](const Vec&) { return 0.0; };
    g.peak_guess = 0.5 * (blo + bhi);
    g.scale_guess = bhi - blo;
    log_mass = integrate(g, mu, opt).log_value;
  }
  const double first = log_mass + regional_conjugate(f, lambda, blo, bhi);

  // X1 as disjoint slabs: axes before i inside [lo, hi], axis i outside
  std::vector<std::pair<Vec, Vec>> pieces;
  for (int i = 0; i < d; ++i) {
    for (int side = 0; side < 2; ++side) {
      Vec plo = dom.lo, phi = dom.hi;
      for (int j = 0; j < i; ++j) {
        plo[j] = blo[j];
        phi[j] = bhi[j];
      }
      if (side == 0) {
        phi[i] = blo[i];
      } else {
        plo[i] = bhi[i];
      }
      if ((plo.array() < phi.array()).all()) pieces.emplace_back(plo, phi);
    }
  }
  double second = -kInf;
  if (!pieces.empty()) {
    const Vec y = lambda / (1.0 - eps);
    double log_k = -kInf, log_z = -kInf, sup_k = -kInf, sup_z = -kInf;
    bool k_ok = true, z_ok = true;
    for (const auto& [plo, phi] : pieces) {
      try {
        log_k = log_add(log_k, k_integral(f, mu, eps, opt, plo, phi).log_value);
      } catch (const DivergenceError&) {
        k_ok = false;
      }
      try {
        log_z = log_add(log_z, z_integral(f, mu, eps, opt, plo, phi).log_value);
      } catch (const DivergenceError&) {
        z_ok = false;
      }
      sup_k = std::max(sup_k, regional_conjugate(f, y, plo, phi));
      sup_z = std::max(sup_z, regional_conjugate(f, y, (1.0 - eps) * plo, (1.0 - eps) * phi));
    }
    const double kb = k_ok ? log_k + (1.0 - eps) * sup_k : kInf;
    const double zb = z_ok ? log_z + sup_z : kInf;
    second = std::min(kb, zb);
    if (!std::isfinite(second) && second > 0.0) throw DivergenceError("both X1 branches diverge");
    out.flags.push_back(kb <= zb ? "X1 via K" : "X1 via Z");
  }
  out.log_prefactor = log_mass;
  out.exponent = first - log_mass;
  out.log_value = log_add(first, second);
  return out;
}

/// Bound on ln K(eps) from the affine minorant zeta(x) >= (x, y0) - zeta*(y0)
/// on the positive orthant with Lebesgue measure:
///   eps zeta*(y0) - sum_i ln(eps y0(i)).
inline double affine_minorant_k_bound(const Objective& f, const Vec& y0, double eps) {
  require(y0.size() == f.dim(), "dimension mismatch in y0");
  if (!(y0.array() > 0.0).all()) throw InputError("y0 must be componentwise positive");
  require(eps > 0.0, "eps must be positive");
  if (f.domain().kind != DomainKind::orthant) throw UsageError("the affine minorant bound is for the positive orthant");
  return eps * conjugate_value(f, y0).value - (eps * y0.array()).log().sum();
}

// ---------------------------------------------------------------- lower

/// ln U(eps, lambda) + zeta*(lambda (1 - eps)); -inf when the level set is empty.
inline LowerBound lower_bound_u(const Objective& f, const WeightedMeasure& mu, const Vec& lambda, double eps,
                                    std::optional<LevelSetMethod> method = std::nullopt,
                                    const QuadratureOptions& opt = {}) {
  LowerBound out;
  out.method = LowerMethod::U;
  out.eps = eps;
  out.level_set = method.value_or(default_level_set_method(f.dim()));
  if (eps == 0.0) return out;
  const LevelSetResult u = level_set_measure(f, mu, lambda, eps, out.level_set, opt);
  out.exponent = u.threshold;
  if (!(u.measure > 0.0)) return out;
  out.log_measure = std::log(u.measure);
  out.log_value = out.log_measure + u.threshold;
  return out;
}

/// Largest level-set bound over an eps grid, refined by three golden-section
/// steps (in ln eps) around the best grid point.
inline LowerBound lower_bound_sup(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                  std::vector<double> eps_grid, std::optional<LevelSetMethod> method = std::nullopt,
                                  const QuadratureOptions& opt = {}) {
  require(!eps_grid.empty(), "eps grid must be nonempty");
  std::sort(eps_grid.begin(), eps_grid.end());
  std::vector<LowerBound> scan;
  for (double e : eps_grid) scan.push_back(lower_bound_u(f, mu, lambda, e, method, opt));
  std::size_t k = 0;
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].log_value > scan[k].log_value) k = i;
  }
  LowerBound best = scan[k];
  if (scan.size() >= 3 && best.log_value > -kInf && eps_grid.front() > 0.0) {
    double a = std::log(eps_grid[k == 0 ? 0 : k - 1]);
    double b = std::log(eps_grid[k + 1 == eps_grid.size() ? k : k + 1]);
    const double g = 0.5 * (3.0 - std::sqrt(5.0));
    auto eval = [&](double le) {
      LowerBound l = lower_bound_u(f, mu, lambda, std::exp(le), method, opt);
      if (l.log_value > best.log_value) best = l;
      return l.log_value;
    };
    double x1 = a + g * (b - a), x2 = b - g * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 3; ++it) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = a + g * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = b - g * (b - a);
        f2 = eval(x2);
      }
    }
  }
  return best;
}

/// max over kappa of ln U(pi_kappa(lambda), lambda) - kappa, plus zeta*(lambda).
inline LowerBound lower_bound_v(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                const std::vector<double>& kappa_grid,
                                std::optional<LevelSetMethod> method = std::nullopt,
                                const QuadratureOptions& opt = {}) {
  require(!kappa_grid.empty(), "kappa grid must be nonempty");
  LowerBound best;
  best.method = LowerMethod::V;
  best.level_set = method.value_or(default_level_set_method(f.dim()));
  const double phi = conjugate_value(f, lambda).value;
  const Vec grad = grad_conjugate(f, lambda);
  for (double kappa : kappa_grid) {
    require(kappa > 0.0, "kappa grid values must be positive");
    const PiKappa pk = pi_kappa_from_gradient(lambda, grad, kappa);
    const LevelSetResult u = level_set_measure(f, mu, lambda, pk.value, best.level_set, opt);
    if (!(u.measure > 0.0)) continue;
    // with eps = pi_kappa, eps (lambda, grad zeta*) = kappa only before clamping
    const double drop = pk.value * lambda.dot(grad);
    const double v = std::log(u.measure) - drop + phi;
    if (v > best.log_value) {
      best.log_value = v;
      best.kappa = kappa;
      best.eps = pk.value;
      best.log_measure = std::log(u.measure);
      best.exponent = phi - drop;
    }
  }
  return best;
}

// ---------------------------------------------------------------- constants

/// lambda_0(m): 2 for m <= 2, else 2 ((m - 2) / (2m - 2))^{(m - 1)/m}.
inline double lambda0(double m) {
  require(m > 1.0, "m must exceed 1");
  return m <= 2.0 ? 2.0 : 2.0 * std::pow((m - 2.0) / (2.0 * m - 2.0), (m - 1.0) / m);
}

struct PowerConstants {
  double log_lower;   // (2.5/(m-1))^{1/2} lambda^{(2-m)/(2m-2)} e^{lambda^{m'}/m'}
  double log_exact;   // sqrt(2 pi/(m-1)) lambda^{(2-m)/(2m-2)} e^{lambda^{m'}/m'}
  double log_upper;   // m^{2/m-1} e^{1/m} Gamma(1/m) lambda^{1/(m-1)} e^{lambda^{m'}/m'}
};

/// Closed-form two-sided estimates and the saddle-point asymptotic for
/// I_m(lambda) = int_0^inf exp(lambda x - x^m/m) dx, all as logarithms.
inline PowerConstants power_family_constants(double m, double lambda) {
  const double l0 = lambda0(m);
  if (!(lambda >= l0)) {
    throw PreconditionError("lambda must be >= lambda_0(m) = " + std::to_string(l0));
  }
  const double mp = m / (m - 1.0);
  const double main = std::pow(lambda, mp) / mp;
  const double slope = (2.0 - m) / (2.0 * m - 2.0) * std::log(lambda);
  PowerConstants c;
  c.log_lower = 0.5 * std::log(2.5 / (m - 1.0)) + slope + main;
  c.log_exact = 0.5 * std::log(2.0 * std::numbers::pi / (m - 1.0)) + slope + main;
  c.log_upper = (2.0 / m - 1.0) * std::log(m) + 1.0 / m + std::lgamma(1.0 / m) + std::log(lambda) / (m - 1.0) + main;
  return c;
}

// ---------------------------------------------------------------- report

struct UpperPolicy {
  EpsilonPolicy eps = EpsilonPolicy::default_grid();
  std::optional<double> kappa = 1.0;  // R-integral candidate; nullopt skips it
};

struct LowerPolicy {
  std::vector<double> eps_grid = log_spaced(1e-4, 0.5, 25);
  std::vector<double> kappa_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::optional<LevelSetMethod> level_set;
};

struct BoundReport {
  Vec lambda;
  double log_lower = -kInf;
  double log_oracle = kNaN;
  double oracle_error = 0.0;
  double log_upper = kInf;
  UpperBound upper;
  LowerBound lower;
  std::vector<UpperBound> upper_candidates;
  std::vector<LowerBound> lower_candidates;
  std::string oracle_method;
  std::vector<std::string> flags;
};

/// Oracle, best upper and best lower bound at one lambda. Throws
/// ConsistencyError if the sandwich fails beyond the oracle's error.
inline BoundReport bound_report(const Objective& f, const WeightedMeasure& mu, const Vec& lambda,
                                const UpperPolicy& up = {}, const LowerPolicy& low = {},
                                const QuadratureOptions& opt = {}) {
  BoundReport r;
  r.lambda = lambda;
  const LogIntegralResult oracle = log_laplace_integral(f, mu, lambda, opt);
  r.log_oracle = oracle.log_value;
  r.oracle_error = oracle.abs_error_log;
  r.oracle_method = method_name(oracle.method);
  if (oracle.saddle_fallback) r.flags.push_back("oracle peak by scan");
  if (!oracle.tolerance_met) r.flags.push_back("oracle tolerance not met");

  if (f.domain().finite_volume()) {
    r.upper_candidates.push_back(upper_bound_a(f, mu, lambda, opt));
  } else {
    r.upper_candidates.push_back(upper_bound_best(f, mu, lambda, up.eps, opt));
    if (up.kappa) {
      try {
        r.upper_candidates.push_back(upper_bound_r(f, mu, lambda, *up.kappa, std::nullopt, opt));
      } catch (const DivergenceError&) {
        r.flags.push_back("R candidate diverged");
      }
    }
  }
  if (r.upper_candidates.empty()) throw UsageError("no upper bound applies");
  r.upper = *std::min_element(r.upper_candidates.begin(), r.upper_candidates.end(),
                              [](const UpperBound& a, const UpperBound& b) { return a.log_value < b.log_value; });
  r.log_upper = r.upper.log_value;

  r.lower_candidates.push_back(lower_bound_sup(f, mu, lambda, low.eps_grid, low.level_set, opt));
  if (!low.kappa_grid.empty()) {
    r.lower_candidates.push_back(lower_bound_v(f, mu, lambda, low.kappa_grid, low.level_set, opt));
  }
  r.lower = *std::max_element(r.lower_candidates.begin(), r.lower_candidates.end(),
                              [](const LowerBound& a, const LowerBound& b) { return a.log_value < b.log_value; });
  r.log_lower = r.lower.log_value;

  const double slack = r.oracle_error + 1e-9 * (1.0 + std::abs(r.log_oracle));
  if (r.log_lower > r.log_oracle + slack || r.log_oracle > r.log_upper + slack) {
    throw ConsistencyError("bound sandwich violated: lower " + std::to_string(r.log_lower) + ", oracle " +
                           std::to_string(r.log_oracle) + ", upper " + std::to_string(r.log_upper));
  }
  return r;
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_BOUNDS_HPP_
