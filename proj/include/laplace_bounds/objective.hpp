#ifndef LAPLACE_BOUNDS_OBJECTIVE_HPP_
#define LAPLACE_BOUNDS_OBJECTIVE_HPP_

// Source functions zeta: analytic families, tensor grids and user callables,
// with gradients, Hessians and the closed-form conjugates that exist.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "laplace_bounds/types.hpp"

namespace laplace_bounds {

enum class DomainKind { orthant, full, box };

/// The integration set X: the closed positive orthant, all of R^d, or a box.
struct Domain {
  int dim = 1;
  DomainKind kind = DomainKind::orthant;
  Vec lower;  // box only
  Vec upper;  // box only
  double z_threshold = 1.0;

  static Domain orthant(int d) { return make(d, DomainKind::orthant); }
  static Domain full(int d) { return make(d, DomainKind::full); }
  static Domain box(const Vec& lo, const Vec& hi) {
    Domain dom = make(static_cast<int>(lo.size()), DomainKind::box);
    require(lo.size() == hi.size(), "box bounds differ in dimension");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      require(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i],
              "box bounds must satisfy a < b componentwise");
    }
    dom.lower = lo;
    dom.upper = hi;
    return dom;
  }

  double axis_lower(int i) const {
    switch (kind) {
      case DomainKind::orthant: return 0.0;
      case DomainKind::full: return -kInf;
      case DomainKind::box: return lower[i];
    }
    return -kInf;
  }
  double axis_upper(int i) const {
    return kind == DomainKind::box ? upper[i] : kInf;
  }

  bool contains(const Vec& x) const {
    if (x.size() != dim) return false;
    for (int i = 0; i < dim; ++i) {
      if (x[i] < axis_lower(i) || x[i] > axis_upper(i)) return false;
    }
    return true;
  }

  Vec project(const Vec& x) const {
    Vec y = x;
    for (int i = 0; i < dim; ++i) y[i] = std::clamp(y[i], axis_lower(i), axis_upper(i));
    return y;
  }

  /// Whether X meets {min_i x(i) >= Z} for every Z >= z_threshold.
  /// Unbounded kinds always do; a bounded box never does.
  bool meets_growth_condition() const { return kind != DomainKind::box; }

  bool finite_volume() const { return kind == DomainKind::box; }

  double volume() const {
    if (kind != DomainKind::box) return kInf;
    return (upper - lower).prod();
  }

 private:
  static Domain make(int d, DomainKind kind) {
    require(d >= 1, "domain dimension must be >= 1");
    Domain dom;
    dom.dim = d;
    dom.kind = kind;
    return dom;
  }
};

/// Slowly varying factor L(r) or M(r): either identically one or
/// (ln r)^p for r >= e and 1 below e.
struct SlowVary {
  enum class Kind { constant_one, log_power };
  Kind kind = Kind::constant_one;
  double p = 0.0;

  static SlowVary one() { return {}; }
  static SlowVary log_power(double p) {
    require(std::isfinite(p), "slowly varying exponent must be finite");
    return {Kind::log_power, p};
  }

  bool is_one() const { return kind == Kind::constant_one || p == 0.0; }

  double operator()(double r) const {
    if (is_one() || r < std::numbers::e) return 1.0;
    return std::pow(std::log(r), p);
  }
  double d1(double r) const {
    if (is_one() || r < std::numbers::e) return 0.0;
    return p * std::pow(std::log(r), p - 1.0) / r;
  }
  double d2(double r) const {
    if (is_one() || r < std::numbers::e) return 0.0;
    const double l = std::log(r);
    return (p * (p - 1.0) * std::pow(l, p - 2.0) - p * std::pow(l, p - 1.0)) / (r * r);
  }
};

/// One-dimensional profile g(s), s >= 0, evaluated on |x|.
struct Profile {
  enum class Kind { power, power_log, slow_vary };
  Kind kind = Kind::power;
  double m = 2.0;      // power, power_log
  double r = 0.0;      // power_log
  double kappa = 2.0;  // slow_vary
  SlowVary L;          // slow_vary

  static Profile power(double m) {
    require(std::isfinite(m) && m > 1.0, "power family requires m > 1");
    Profile p;
    p.m = m;
    return p;
  }
  static Profile power_log(double m, double r) {
    require(std::isfinite(m) && m > 1.0, "power-log family requires m > 1");
    require(std::isfinite(r), "power-log exponent r must be finite");
    require(m + r > 0.0, "power-log family requires m + r > 0");
    Profile p;
    p.kind = Kind::power_log;
    p.m = m;
    p.r = r;
    return p;
  }
  static Profile slow_vary(double kappa, SlowVary L) {
    require(std::isfinite(kappa) && kappa > 1.0, "slow-vary family requires kappa > 1");
    Profile p;
    p.kind = Kind::slow_vary;
    p.kappa = kappa;
    p.L = L;
    return p;
  }

  double theta() const { return kappa / (kappa - 1.0); }

  /// Coefficient of the |s| < e branch of the slow-vary family; makes the
  /// branches meet continuously at s = e when L is identically one.
  double slow_vary_inner_coefficient() const {
    return std::exp(kappa - 2.0) / kappa;
  }

  double value(double s) const { return eval(std::abs(s), 0); }
  double d1(double s) const {
    const double v = eval(std::abs(s), 1);
    return s < 0.0 ? -v : v;
  }
  double d2(double s) const { return eval(std::abs(s), 2); }

 private:
  // Power-log below e: v + g (s - e) + c (s - e)^2 with c = g^2 / (4 v),
  // which matches value and slope at e and stays nonnegative.
  void power_log_junction(double& v, double& g, double& c) const {
    const double e = std::numbers::e;
    v = std::pow(e, m) / m;
    g = std::pow(e, m - 1.0) * (1.0 + r / m);
    c = g * g / (4.0 * v);
  }

  double eval(double s, int order) const {
    switch (kind) {
      case Kind::power:
        if (order == 0) return std::pow(s, m) / m;
        if (order == 1) return std::pow(s, m - 1.0);
        if (s == 0.0) return m < 2.0 ? kInf : (m == 2.0 ? 1.0 : 0.0);
        return (m - 1.0) * std::pow(s, m - 2.0);
      case Kind::power_log: {
        const double e = std::numbers::e;
        if (s < e) {
          double v, g, c;
          power_log_junction(v, g, c);
          const double u = s - e;
          if (order == 0) return v + g * u + c * u * u;
          if (order == 1) return g + 2.0 * c * u;
          return 2.0 * c;
        }
        const double l = std::log(s);
        if (order == 0) return std::pow(s, m) * std::pow(l, r) / m;
        const double w = std::pow(l, r) + (r / m) * std::pow(l, r - 1.0);
        if (order == 1) return std::pow(s, m - 1.0) * w;
        const double dw = (r * std::pow(l, r - 1.0) + r * (r - 1.0) / m * std::pow(l, r - 2.0)) / s;
        return (m - 1.0) * std::pow(s, m - 2.0) * w + std::pow(s, m - 1.0) * dw;
      }
      case Kind::slow_vary: {
        if (s < std::numbers::e) {
          const double c = slow_vary_inner_coefficient();
          if (order == 0) return c * s * s;
          if (order == 1) return 2.0 * c * s;
          return 2.0 * c;
        }
        // g(s) = F(s^kappa) with F(y) = y L(y)^a / kappa, a = 1/theta.
        const double a = 1.0 / theta();
        const double y = std::pow(s, kappa);
        const double Lv = L(y), L1 = L.d1(y), L2 = L.d2(y);
        const double La = std::pow(Lv, a);
        if (order == 0) return y * La / kappa;
        const double F1 = (La + a * y * std::pow(Lv, a - 1.0) * L1) / kappa;
        const double dy = kappa * std::pow(s, kappa - 1.0);
        if (order == 1) return F1 * dy;
        const double F2 = (2.0 * a * std::pow(Lv, a - 1.0) * L1 +
                           a * (a - 1.0) * y * std::pow(Lv, a - 2.0) * L1 * L1 +
                           a * y * std::pow(Lv, a - 1.0) * L2) /
                          kappa;
        const double d2y = kappa * (kappa - 1.0) * std::pow(s, kappa - 2.0);
        return F2 * dy * dy + F1 * d2y;
      }
    }
    return kNaN;
  }
};

enum class Extension { plus_infinity, linear };

/// Samples of a function on a tensor grid (d <= 3), multilinear in between.
class GridFn {
 public:
  GridFn() = default;

  GridFn(std::vector<double> nodes, std::vector<double> values,
         Extension extension = Extension::plus_infinity, bool convex = false)
      : GridFn(std::vector<std::vector<double>>{std::move(nodes)}, std::move(values), extension,
               convex) {}

  GridFn(std::vector<std::vector<double>> axes, std::vector<double> values,
         Extension extension = Extension::plus_infinity, bool convex = false)
      : axes_(std::move(axes)), values_(std::move(values)), extension_(extension), convex_(convex) {
    require(!axes_.empty() && axes_.size() <= 3, "grid dimension must be 1, 2 or 3");
    std::size_t total = 1;
    for (const auto& ax : axes_) {
      require(ax.size() >= 3, "grid needs at least 3 nodes per axis");
      for (std::size_t i = 1; i < ax.size(); ++i) {
        require(ax[i] > ax[i - 1], "grid nodes must be strictly increasing");
      }
      total *= ax.size();
    }
    require(values_.size() == total, "grid value count does not match node counts");
    for (double v : values_) require(std::isfinite(v), "grid values must be finite");
    if (convex_) require(discretely_convex(), "grid flagged convex fails the divided-difference check");
  }

  /// Samples f on the given 1D nodes.
  template <typename F>
  static GridFn sample(std::vector<double> nodes, F&& f, Extension ext = Extension::plus_infinity) {
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = f(nodes[i]);
    return GridFn(std::move(nodes), std::move(vals), ext);
  }

  static std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = (i + 1 == n) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size(int axis = 0) const { return axes_[axis].size(); }
  std::size_t total_size() const { return values_.size(); }
  const std::vector<double>& nodes(int axis = 0) const { return axes_[axis]; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }
  Extension extension() const { return extension_; }
  bool flagged_convex() const { return convex_; }

  std::size_t flat_index(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) flat = flat * axes_[a].size() + idx[a];
    return flat;
  }
  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t a = axes_.size(); a-- > 0;) {
      idx[a] = flat % axes_[a].size();
      flat /= axes_[a].size();
    }
    return idx;
  }
  Vec node_point(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Vec x(dim());
    for (int a = 0; a < dim(); ++a) x[a] = axes_[a][idx[a]];
    return x;
  }

  /// Second divided differences >= -1e-12 along every axis line.
  bool discretely_convex(double tol = 1e-12) const {
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
      auto idx = multi_index(flat);
      for (int a = 0; a < dim(); ++a) {
        const std::size_t i = idx[a];
        if (i == 0 || i + 1 >= axes_[a].size()) continue;
        const auto& x = axes_[a];
        auto at = [&](std::size_t j) {
          auto k = idx;
          k[a] = j;
          return values_[flat_index(k)];
        };
        const double s0 = (at(i) - at(i - 1)) / (x[i] - x[i - 1]);
        const double s1 = (at(i + 1) - at(i)) / (x[i + 1] - x[i]);
        if ((s1 - s0) / (x[i + 1] - x[i - 1]) < -tol) return false;
      }
    }
    return true;
  }

  bool inside(const Vec& x) const {
    for (int a = 0; a < dim(); ++a) {
      if (x[a] < axes_[a].front() || x[a] > axes_[a].back()) return false;
    }
    return true;
  }

  /// Multilinear interpolation; outside the nodes either +inf or the
  /// multilinear extension of the boundary cell.
  double operator()(const Vec& x) const {
    require(x.size() == dim(), "dimension mismatch evaluating grid function");
    if (!inside(x) && extension_ == Extension::plus_infinity) return kInf;
    std::vector<std::size_t> base(dim());
    std::vector<double> frac(dim());
    for (int a = 0; a < dim(); ++a) {
      const auto& ax = axes_[a];
      std::size_t i = cell(a, x[a]);
      base[a] = i;
      frac[a] = (x[a] - ax[i]) / (ax[i + 1] - ax[i]);
    }
    double acc = 0.0;
    const std::size_t corners = std::size_t{1} << dim();
    for (std::size_t c = 0; c < corners; ++c) {
      double w = 1.0;
      auto idx = base;
      for (int a = 0; a < dim(); ++a) {
        const bool hi = (c >> a) & 1U;
        idx[a] += hi ? 1 : 0;
        w *= hi ? frac[a] : 1.0 - frac[a];
      }
      if (w != 0.0) acc += w * values_[flat_index(idx)];
    }
    return acc;
  }

  /// Index i of the cell [x_i, x_{i+1}] used for coordinate t on an axis.
  std::size_t cell(int axis, double t) const {
    const auto& ax = axes_[axis];
    auto it = std::upper_bound(ax.begin(), ax.end(), t);
    std::size_t i = it == ax.begin() ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
    return std::min(i, ax.size() - 2);
  }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  Extension extension_ = Extension::plus_infinity;
  bool convex_ = false;
};

enum class Family { power, power_log, slow_vary, separable_sum, grid, custom };
enum class Coupling { separable, radial };

struct GradientResult {
  Vec value;
  bool one_sided = false;  // grid boundary: one-sided differences used
};

struct HessianResult {
  Mat value;
  double min_eigenvalue = kNaN;
  bool positive_definite = false;
};

struct ClosedConjugate {
  double value = kNaN;
  bool asymptotic = false;  // large-argument approximation, not exact
};

/// A source function zeta on a domain X.
class Objective {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  /// zeta(x) = scale * sum_i |x_i|^m / m (separable) or scale * |x|^m / m (radial).
  static Objective power(double m, const Domain& domain, Coupling coupling = Coupling::separable,
                         double scale = 1.0) {
    return analytic(Family::power, Profile::power(m), domain, coupling, scale);
  }
  /// zeta(x) = |x|^m ln^r|x| / m for |x| >= e.
  static Objective power_log(double m, double r, const Domain& domain,
                             Coupling coupling = Coupling::radial, double scale = 1.0) {
    return analytic(Family::power_log, Profile::power_log(m, r), domain, coupling, scale);
  }
  /// zeta(x) = |x|^kappa L^{1/theta}(|x|^kappa) / kappa for |x| >= e.
  static Objective slow_vary(double kappa, SlowVary L, const Domain& domain,
                             Coupling coupling = Coupling::radial, double scale = 1.0) {
    return analytic(Family::slow_vary, Profile::slow_vary(kappa, L), domain, coupling, scale);
  }
  /// zeta(x) = scale * sum_i g_i(x_i) with one profile per axis.
  static Objective separable(std::vector<Profile> profiles, const Domain& domain, double scale = 1.0) {
    require(static_cast<int>(profiles.size()) == domain.dim,
            "separable objective needs one profile per axis");
    Objective f = analytic(Family::separable_sum, profiles.front(), domain, Coupling::separable, scale);
    f.profiles_ = std::move(profiles);
    return f;
  }
  /// Grid-backed zeta. Without an explicit domain, the grid box (plus-infinity
  /// extension) or the whole space (linear extension) is used.
  static Objective grid(GridFn g, std::optional<Domain> domain = std::nullopt) {
    Objective f;
    f.family_ = Family::grid;
    if (domain) {
      f.domain_ = *domain;
    } else if (g.extension() == Extension::plus_infinity) {
      Vec lo(g.dim()), hi(g.dim());
      for (int a = 0; a < g.dim(); ++a) {
        lo[a] = g.nodes(a).front();
        hi[a] = g.nodes(a).back();
      }
      f.domain_ = Domain::box(lo, hi);
    } else {
      f.domain_ = Domain::full(g.dim());
    }
    require(f.domain_.dim == g.dim(), "grid and domain dimensions differ");
    f.grid_ = std::make_shared<const GridFn>(std::move(g));
    return f;
  }
  /// User callable; derivatives fall back to central differences.
  static Objective custom(const Domain& domain, ValueFn value, GradFn grad = {}, HessFn hess = {}) {
    require(static_cast<bool>(value), "custom objective needs a value function");
    Objective f;
    f.family_ = Family::custom;
    f.domain_ = domain;
    f.custom_value_ = std::move(value);
    f.custom_grad_ = std::move(grad);
    f.custom_hess_ = std::move(hess);
    return f;
  }

  Family family() const { return family_; }
  Coupling coupling() const { return coupling_; }
  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  double scale() const { return scale_; }
  const std::vector<Profile>& profiles() const { return profiles_; }
  const GridFn* grid_fn() const { return grid_.get(); }

  bool is_analytic() const {
    return family_ != Family::grid && family_ != Family::custom;
  }
  /// Sum of per-axis terms (always true in d = 1).
  bool is_separable() const {
    if (dim() == 1) return true;
    return is_analytic() && coupling_ == Coupling::separable;
  }
  /// Exponent m when every axis is a pure power profile with the same m.
  std::optional<double> power_exponent() const {
    if (!is_analytic()) return std::nullopt;
    for (const auto& p : profiles_) {
      if (p.kind != Profile::Kind::power || p.m != profiles_.front().m) return std::nullopt;
    }
    return profiles_.front().m;
  }

  double operator()(const Vec& x) const { return eval(x); }

  double eval(const Vec& x) const {
    check_point(x);
    switch (family_) {
      case Family::grid: return (*grid_)(x);
      case Family::custom: return custom_value_(x);
      default: break;
    }
    if (coupling_ == Coupling::radial) return scale_ * profiles_.front().value(x.norm());
    double acc = 0.0;
    for (int i = 0; i < dim(); ++i) acc += profile(i).value(x[i]);
    return scale_ * acc;
  }

  GradientResult gradient(const Vec& x) const {
    check_point(x);
    GradientResult out;
    switch (family_) {
      case Family::grid: return grid_gradient(x);
      case Family::custom:
        out.value = custom_grad_ ? custom_grad_(x) : central_gradient(x);
        return out;
      default: break;
    }
    out.value = Vec::Zero(dim());
    if (coupling_ == Coupling::radial) {
      const double r = x.norm();
      if (r > 0.0) out.value = scale_ * profiles_.front().d1(r) / r * x;
    } else {
      for (int i = 0; i < dim(); ++i) out.value[i] = scale_ * profile(i).d1(x[i]);
    }
    return out;
  }

  HessianResult hessian(const Vec& x) const {
    check_point(x);
    Mat h;
    switch (family_) {
      case Family::grid: h = grid_hessian(x); break;
      case Family::custom: h = custom_hess_ ? custom_hess_(x) : central_hessian(x); break;
      default:
        h = Mat::Zero(dim(), dim());
        if (coupling_ == Coupling::radial) {
          const auto& p = profiles_.front();
          const double r = x.norm();
          if (r == 0.0) {
            h = p.d2(0.0) * Mat::Identity(dim(), dim());
          } else {
            const Vec u = x / r;
            const Mat uu = u * u.transpose();
            h = p.d2(r) * uu + (p.d1(r) / r) * (Mat::Identity(dim(), dim()) - uu);
          }
        } else {
          for (int i = 0; i < dim(); ++i) h(i, i) = profile(i).d2(x[i]);
        }
        h *= scale_;
    }
    if (!h.allFinite()) throw NumericalError("Hessian has non-finite entries");
    HessianResult out;
    out.value = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(out.value, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    out.positive_definite = out.min_eigenvalue > 0.0;
    return out;
  }

  /// Analytic conjugate where one is known; absent for grid/custom kinds and
  /// for orthant radial objectives queried outside the orthant.
  std::optional<ClosedConjugate> closed_conjugate(const Vec& lambda) const {
    require(lambda.size() == dim(), "dimension mismatch in conjugate argument");
    if (!is_analytic() || domain_.kind == DomainKind::box) return std::nullopt;
    const bool orthant = domain_.kind == DomainKind::orthant;
    const Vec y = lambda / scale_;  // (c g)^*(l) = c g^*(l / c)
    auto profile_conj = [&](const Profile& p, double t, bool& asym) -> std::optional<double> {
      const double at = std::abs(t);
      switch (p.kind) {
        case Profile::Kind::power: {
          const double mp = p.m / (p.m - 1.0);
          return std::pow(at, mp) / mp;
        }
        case Profile::Kind::power_log: {
          if (at <= std::numbers::e) return std::nullopt;
          asym = true;
          const double mp = p.m / (p.m - 1.0);
          return std::pow(p.m - 1.0, p.r / (p.m - 1.0)) * std::pow(at, mp) *
                 std::pow(std::log(at), -p.r / (p.m - 1.0)) / mp;
        }
        case Profile::Kind::slow_vary: {
          if (at <= std::numbers::e) return std::nullopt;
          asym = true;
          const double th = p.theta();
          return std::pow(at, th) * std::pow(p.L(at), 1.0 / th) / th;
        }
      }
      return std::nullopt;
    };
    bool asym = false;
    double acc = 0.0;
    if (coupling_ == Coupling::radial) {
      if (orthant && (y.array() < 0.0).any()) return std::nullopt;
      auto v = profile_conj(profiles_.front(), y.norm(), asym);
      if (!v) return std::nullopt;
      acc = *v;
    } else {
      for (int i = 0; i < dim(); ++i) {
        const Profile& p = profile(i);
        if (orthant && y[i] < 0.0) {
          // sup over x >= 0 of y x - g(x) for increasing g sits at x = 0.
          if (p.kind != Profile::Kind::power) return std::nullopt;
          acc += -p.value(0.0);
          continue;
        }
        auto v = profile_conj(p, y[i], asym);
        if (!v) return std::nullopt;
        acc += *v;
      }
    }
    return ClosedConjugate{scale_ * acc, asym};
  }

  /// Newton starting point: lambda^{1/(m-1)} per axis for power kinds.
  Vec default_saddle_start(const Vec& lambda) const {
    Vec x = Vec::Ones(dim());
    if (auto m = power_exponent()) {
      const Vec y = lambda / scale_;
      if (coupling_ == Coupling::radial && dim() > 1) {
        const double n = y.norm();
        if (n > 0.0) x = y * (std::pow(n, 1.0 / (*m - 1.0)) / n);
      } else {
        for (int i = 0; i < dim(); ++i) {
          x[i] = std::copysign(std::pow(std::abs(y[i]), 1.0 / (*m - 1.0)), y[i]);
        }
      }
    } else if (grid_) {
      for (int a = 0; a < dim(); ++a) {
        x[a] = 0.5 * (grid_->nodes(a).front() + grid_->nodes(a).back());
      }
    }
    return domain_.project(x);
  }

 private:
  static Objective analytic(Family family, const Profile& p, const Domain& domain,
                            Coupling coupling, double scale) {
    require(std::isfinite(scale) && scale > 0.0, "objective scale must be positive");
    Objective f;
    f.family_ = family;
    f.domain_ = domain;
    f.coupling_ = domain.dim == 1 ? Coupling::separable : coupling;
    f.scale_ = scale;
    f.profiles_ = {p};
    return f;
  }

  const Profile& profile(int axis) const {
    return profiles_.size() == 1 ? profiles_.front() : profiles_[axis];
  }

  void check_point(const Vec& x) const {
    if (x.size() != dim()) throw InputError("dimension mismatch: expected a point in R^" + std::to_string(dim()));
    if (x.hasNaN()) throw InputError("NaN coordinate in evaluation point");
  }

  static double fd_step(double t) { return 1e-5 * (1.0 + std::abs(t)); }

  Vec central_gradient(const Vec& x) const {
    Vec g(dim());
    for (int i = 0; i < dim(); ++i) {
      const double h = fd_step(x[i]);
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (eval(xp) - eval(xm)) / (2.0 * h);
    }
    return g;
  }

  Mat central_hessian(const Vec& x) const {
    Mat h(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
      const double s = fd_step(x[j]);
      Vec xp = x, xm = x;
      xp[j] += s;
      xm[j] -= s;
      const Vec gp = custom_grad_ ? custom_grad_(xp) : central_gradient(xp);
      const Vec gm = custom_grad_ ? custom_grad_(xm) : central_gradient(xm);
      h.col(j) = (gp - gm) / (2.0 * s);
    }
    return h;
  }

  // Quadratic through the three nodes nearest to t on one axis line; returns
  // first and second derivatives at t. Flags nodes at (or past) the grid edge.
  void grid_axis_derivatives(const Vec& x, int axis, double& d1, double& d2, bool& one_sided) const {
    const auto& ax = grid_->nodes(axis);
    const std::size_t n = ax.size();
    const double t = x[axis];
    std::size_t i = grid_->cell(axis, t);
    // center node c with neighbours c-1, c+1
    std::size_t c = (t - ax[i] <= ax[i + 1] - t) ? i : i + 1;
    if (c == 0 || c == n - 1 || t <= ax.front() || t >= ax.back()) one_sided = true;
    c = std::clamp<std::size_t>(c, 1, n - 2);
    auto val = [&](std::size_t j) {
      Vec p = x;
      p[axis] = ax[j];
      return (*grid_)(p);
    };
    const double x0 = ax[c - 1], x1 = ax[c], x2 = ax[c + 1];
    const double f0 = val(c - 1), f1 = val(c), f2 = val(c + 1);
    const double s01 = (f1 - f0) / (x1 - x0);
    const double s12 = (f2 - f1) / (x2 - x1);
    const double curv = (s12 - s01) / (x2 - x0);  // half the second derivative
    d2 = 2.0 * curv;
    d1 = s01 + curv * ((t - x0) + (t - x1));
  }

  GradientResult grid_gradient(const Vec& x) const {
    GradientResult out;
    out.value = Vec(dim());
    for (int a = 0; a < dim(); ++a) {
      double d1, d2;
      grid_axis_derivatives(x, a, d1, d2, out.one_sided);
      out.value[a] = d1;
    }
    return out;
  }

  Mat grid_hessian(const Vec& x) const {
    Mat h = Mat::Zero(dim(), dim());
    bool flag = false;
    for (int a = 0; a < dim(); ++a) {
      double d1, d2;
      grid_axis_derivatives(x, a, d1, d2, flag);
      h(a, a) = d2;
    }
    for (int a = 0; a < dim(); ++a) {
      for (int b = a + 1; b < dim(); ++b) {
        const auto& ax = grid_->nodes(b);
        const std::size_t i = grid_->cell(b, x[b]);
        Vec xp = x, xm = x;
        xp[b] = ax[i + 1];
        xm[b] = ax[i];
        double gp, gm, dummy;
        grid_axis_derivatives(xp, a, gp, dummy, flag);
        grid_axis_derivatives(xm, a, gm, dummy, flag);
        h(a, b) = h(b, a) = (gp - gm) / (ax[i + 1] - ax[i]);
      }
    }
    return h;
  }

  Family family_ = Family::power;
  Coupling coupling_ = Coupling::separable;
  Domain domain_ = Domain::orthant(1);
  double scale_ = 1.0;
  std::vector<Profile> profiles_;
  std::shared_ptr<const GridFn> grid_;
  ValueFn custom_value_;
  GradFn custom_grad_;
  HessFn custom_hess_;
};

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_OBJECTIVE_HPP_
