#ifndef LAPLACE_BOUNDS_CLI_HPP_
#define LAPLACE_BOUNDS_CLI_HPP_

// Config-driven runs: a JSON document in, a CSV table and a JSON sidecar out.
// The schema is documented in README.md.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "laplace_bounds/bounds.hpp"
#include "laplace_bounds/conjugate.hpp"
#include "laplace_bounds/objective.hpp"
#include "laplace_bounds/parallel.hpp"
#include "laplace_bounds/quadrature.hpp"
#include "laplace_bounds/saddle.hpp"
#include "laplace_bounds/tauberian.hpp"
#include "laplace_bounds/types.hpp"

namespace laplace_bounds::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDivergence = 3;

/// A config value that is missing, mistyped or out of range.
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : InputError("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// ---------------------------------------------------------------- reading

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(join(path, key), "required");
  return j.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return number(j.at(key), join(path, key));
}

inline std::string string_or(const json& j, const std::string& key, const std::string& path,
                             const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(join(path, key), "expected a string");
  return j.at(key).get<std::string>();
}

inline bool bool_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

inline int integer(const json& v, const std::string& field, int lo, int hi) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) throw ConfigError(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

/// A list of reals: [a, b, ...], {"linspace": [a, b, n]} or {"logspace": [a, b, n]}.
inline std::vector<double> reals(const json& v, const std::string& field) {
  if (v.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (v.is_object() && v.size() == 1 && (v.contains("linspace") || v.contains("logspace"))) {
    const bool lin = v.contains("linspace");
    const json& a = v.at(lin ? "linspace" : "logspace");
    const std::string sub = field + (lin ? ".linspace" : ".logspace");
    if (!a.is_array() || a.size() != 3) throw ConfigError(sub, "expected [start, stop, count]");
    const double lo = number(a[0], sub + "[0]"), hi = number(a[1], sub + "[1]");
    const int n = integer(a[2], sub + "[2]", 2, 10000000);
    if (!(hi > lo)) throw ConfigError(sub, "stop must exceed start");
    if (lin) return GridFn::linspace(lo, hi, static_cast<std::size_t>(n));
    if (!(lo > 0.0)) throw ConfigError(sub, "logspace needs a positive start");
    return log_spaced(lo, hi, static_cast<std::size_t>(n));
  }
  throw ConfigError(field, "expected an array of numbers or {\"linspace\"|\"logspace\": [start, stop, count]}");
}

inline std::vector<double> increasing(const json& v, const std::string& field) {
  std::vector<double> out = reals(v, field);
  if (out.empty()) throw ConfigError(field, "must be nonempty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) throw ConfigError(field, "must be strictly increasing");
  }
  return out;
}

/// One point: a number (broadcast to every axis) or an array of d numbers.
inline Vec point(const json& v, int d, const std::string& field) {
  if (v.is_number()) return constant_vec(d, number(v, field));
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != d) throw ConfigError(field, "expected " + std::to_string(d) + " components");
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = number(v[i], field + "[" + std::to_string(i) + "]");
    return out;
  }
  throw ConfigError(field, "expected a number or an array");
}

/// A list of points; {"linspace"/"logspace"} lists are broadcast.
inline std::vector<Vec> points(const json& v, int d, const std::string& field) {
  std::vector<Vec> out;
  if (v.is_object()) {
    for (double x : reals(v, field)) out.push_back(constant_vec(d, x));
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(point(v[i], d, field + "[" + std::to_string(i) + "]"));
  } else {
    throw ConfigError(field, "expected a list of points");
  }
  if (out.empty()) throw ConfigError(field, "must be nonempty");
  return out;
}

inline Domain parse_domain(const json& j, int d, const std::string& field) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "orthant") return Domain::orthant(d);
    if (s == "full") return Domain::full(d);
    throw ConfigError(field, "unknown domain '" + s + "' (orthant, full or {\"box\": ...})");
  }
  if (j.is_object() && j.contains("box")) {
    const json& b = j.at("box");
    const Vec lo = point(need(b, "lower", field + ".box"), d, field + ".box.lower");
    const Vec hi = point(need(b, "upper", field + ".box"), d, field + ".box.upper");
    if (!(lo.array() < hi.array()).all()) throw ConfigError(field + ".box", "needs lower < upper on every axis");
    return Domain::box(lo, hi);
  }
  throw ConfigError(field, "expected \"orthant\", \"full\" or {\"box\": {\"lower\", \"upper\"}}");
}

inline SlowVary parse_slow_vary(const json& j, const std::string& field) {
  if (j.is_string() && j.get<std::string>() == "one") return SlowVary::one();
  if (j.is_object() && j.contains("log_power")) return SlowVary::log_power(number(j.at("log_power"), field + ".log_power"));
  throw ConfigError(field, "expected \"one\" or {\"log_power\": p}");
}

inline Coupling parse_coupling(const json& j, const std::string& path, Coupling fallback) {
  const std::string s = string_or(j, "coupling", path, fallback == Coupling::radial ? "radial" : "separable");
  if (s == "radial") return Coupling::radial;
  if (s == "separable") return Coupling::separable;
  throw ConfigError(join(path, "coupling"), "expected \"separable\" or \"radial\"");
}

inline double parse_m(const json& j, const std::string& path) {
  const double m = number(need(j, "m", path), join(path, "m"));
  if (!(m > 1.0)) throw ConfigError(join(path, "m"), "must exceed 1");
  return m;
}

inline double parse_kappa_family(const json& j, const std::string& path) {
  const double k = number(need(j, "kappa", path), join(path, "kappa"));
  if (!(k > 1.0)) throw ConfigError(join(path, "kappa"), "must exceed 1");
  return k;
}

inline Profile parse_profile(const json& j, const std::string& path) {
  const std::string fam = string_or(j, "family", path, "");
  if (fam == "power") return Profile::power(parse_m(j, path));
  if (fam == "power_log") {
    const double m = parse_m(j, path), r = number(need(j, "r", path), join(path, "r"));
    if (!(m + r > 0.0)) throw ConfigError(join(path, "r"), "needs m + r > 0");
    return Profile::power_log(m, r);
  }
  if (fam == "slow_vary") {
    const SlowVary L = j.contains("L") ? parse_slow_vary(j.at("L"), join(path, "L")) : SlowVary::one();
    return Profile::slow_vary(parse_kappa_family(j, path), L);
  }
  throw ConfigError(join(path, "family"), "unknown profile family '" + fam + "' (power, power_log, slow_vary)");
}

inline Objective parse_objective(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::string fam = string_or(j, "family", path, "");
  if (fam.empty()) throw ConfigError(join(path, "family"), "required");
  if (fam == "grid") {
    const std::string ext = string_or(j, "extension", path, "plus_infinity");
    if (ext != "plus_infinity" && ext != "linear") {
      throw ConfigError(join(path, "extension"), "expected \"plus_infinity\" or \"linear\"");
    }
    std::vector<std::vector<double>> axes;
    if (j.contains("axes")) {
      const json& a = j.at("axes");
      if (!a.is_array() || a.empty() || a.size() > 3) throw ConfigError(join(path, "axes"), "expected 1 to 3 node lists");
      for (std::size_t i = 0; i < a.size(); ++i) {
        axes.push_back(increasing(a[i], join(path, "axes") + "[" + std::to_string(i) + "]"));
      }
    } else {
      axes.push_back(increasing(need(j, "nodes", path), join(path, "nodes")));
    }
    std::size_t total = 1;
    for (const auto& ax : axes) {
      if (ax.size() < 3) throw ConfigError(join(path, "nodes"), "needs at least 3 nodes per axis");
      total *= ax.size();
    }
    const std::vector<double> values = reals(need(j, "values", path), join(path, "values"));
    if (values.size() != total) {
      throw ConfigError(join(path, "values"), "expected " + std::to_string(total) + " values (row-major)");
    }
    GridFn g(std::move(axes), values, ext == "linear" ? Extension::linear : Extension::plus_infinity,
             bool_or(j, "convex", path, false));
    std::optional<Domain> dom;
    if (j.contains("domain")) dom = parse_domain(j.at("domain"), g.dim(), join(path, "domain"));
    return Objective::grid(std::move(g), dom);
  }
  const int d = j.contains("dim") ? integer(j.at("dim"), join(path, "dim"), 1, 64) : 1;
  const Domain dom = j.contains("domain") ? parse_domain(j.at("domain"), d, join(path, "domain")) : Domain::orthant(d);
  const double scale = number_or(j, "scale", path, 1.0);
  if (!(scale > 0.0)) throw ConfigError(join(path, "scale"), "must be positive");
  if (fam == "power") return Objective::power(parse_m(j, path), dom, parse_coupling(j, path, Coupling::separable), scale);
  if (fam == "power_log") {
    const double m = parse_m(j, path), r = number(need(j, "r", path), join(path, "r"));
    if (!(m + r > 0.0)) throw ConfigError(join(path, "r"), "needs m + r > 0");
    return Objective::power_log(m, r, dom, parse_coupling(j, path, Coupling::radial), scale);
  }
  if (fam == "slow_vary") {
    const SlowVary L = j.contains("L") ? parse_slow_vary(j.at("L"), join(path, "L")) : SlowVary::one();
    return Objective::slow_vary(parse_kappa_family(j, path), L, dom, parse_coupling(j, path, Coupling::radial), scale);
  }
  if (fam == "separable") {
    const json& ps = need(j, "profiles", path);
    if (!ps.is_array() || static_cast<int>(ps.size()) != d) {
      throw ConfigError(join(path, "profiles"), "expected one profile per axis (" + std::to_string(d) + ")");
    }
    std::vector<Profile> profiles;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      profiles.push_back(parse_profile(ps[i], join(path, "profiles") + "[" + std::to_string(i) + "]"));
    }
    return Objective::separable(std::move(profiles), dom, scale);
  }
  throw ConfigError(join(path, "family"),
                    "unknown family '" + fam + "' (power, power_log, slow_vary, separable, grid)");
}

inline WeightedMeasure parse_measure(const json& root, int d) {
  if (!root.contains("measure")) return WeightedMeasure::lebesgue();
  const json& j = root.at("measure");
  if (j.is_string() && j.get<std::string>() == "lebesgue") return WeightedMeasure::lebesgue();
  if (!j.is_object()) throw ConfigError("measure", "expected \"lebesgue\" or {\"alpha\", \"M\"}");
  const double alpha = number_or(j, "alpha", "measure", 0.0);
  if (!(alpha > -d)) throw ConfigError("measure.alpha", "must exceed -d = " + std::to_string(-d));
  const SlowVary M = j.contains("M") ? parse_slow_vary(j.at("M"), "measure.M") : SlowVary::one();
  return WeightedMeasure::power(alpha, M);
}

inline QuadratureOptions parse_quadrature(const json& root, std::uint64_t seed) {
  QuadratureOptions q;
  q.seed = seed;
  if (!root.contains("quadrature")) return q;
  const json& j = root.at("quadrature");
  q.rel_tol = number_or(j, "rel_tol", "quadrature", q.rel_tol);
  if (!(q.rel_tol > 0.0 && q.rel_tol < 1.0)) throw ConfigError("quadrature.rel_tol", "must lie in (0, 1)");
  if (j.contains("mc_samples")) q.mc_samples = integer(j.at("mc_samples"), "quadrature.mc_samples", 1000, 100000000);
  if (j.contains("max_panels")) q.max_panels = integer(j.at("max_panels"), "quadrature.max_panels", 10, 1000000);
  return q;
}

inline EpsilonPolicy parse_eps(const json& root) {
  if (!root.contains("eps")) return EpsilonPolicy::default_grid();
  const json& j = root.at("eps");
  if (j.is_number()) {
    const double e = number(j, "eps");
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps", "must lie in (0, 1)");
    return EpsilonPolicy::fixed(e);
  }
  const std::string kind = string_or(j, "kind", "eps", "grid");
  if (kind == "fixed") {
    const double e = number(need(j, "value", "eps"), "eps.value");
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps.value", "must lie in (0, 1)");
    return EpsilonPolicy::fixed(e);
  }
  if (kind == "pi_kappa") {
    const double k = number(need(j, "kappa", "eps"), "eps.kappa");
    if (!(k > 0.0)) throw ConfigError("eps.kappa", "must be positive");
    return EpsilonPolicy::from_pi_kappa(k);
  }
  if (kind == "grid") {
    if (!j.contains("grid")) return EpsilonPolicy::default_grid();
    const std::vector<double> g = reals(j.at("grid"), "eps.grid");
    if (g.empty()) throw ConfigError("eps.grid", "must be nonempty");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] > 0.0 && g[i] < 1.0)) throw ConfigError("eps.grid[" + std::to_string(i) + "]", "must lie in (0, 1)");
    }
    return EpsilonPolicy::from_grid(g);
  }
  throw ConfigError("eps.kind", "expected fixed, pi_kappa or grid");
}

inline std::vector<double> parse_kappa_grid(const json& root) {
  if (!root.contains("kappa_grid")) return {0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> g = reals(root.at("kappa_grid"), "kappa_grid");
  if (g.empty()) throw ConfigError("kappa_grid", "must be nonempty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) throw ConfigError("kappa_grid[" + std::to_string(i) + "]", "must be positive");
  }
  return g;
}

inline std::optional<LevelSetMethod> parse_level_set(const json& root) {
  const std::string s = string_or(root, "level_set", "", "");
  if (s.empty()) return std::nullopt;
  if (s == "exact") return LevelSetMethod::exact;
  if (s == "ellipsoid") return LevelSetMethod::ellipsoid;
  if (s == "monte_carlo") return LevelSetMethod::monte_carlo;
  throw ConfigError("level_set", "expected exact, ellipsoid or monte_carlo");
}

/// kappa for the R-integral bound and pi_kappa columns; null disables the candidate.
inline std::optional<double> parse_kappa(const json& root) {
  if (root.contains("kappa") && root.at("kappa").is_null()) return std::nullopt;
  const double k = number_or(root, "kappa", "", 1.0);
  if (!(k > 0.0)) throw ConfigError("kappa", "must be positive");
  return k;
}

}  // namespace detail

// ---------------------------------------------------------------- output

/// Fixed-column table; floats as %.17g.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
          os << '"';
          for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
          os << '"';
        } else {
          os << c;
        }
      }
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }
};

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt(v[i]);
  }
  return out;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

// JSON has no inf/nan; they are written as strings.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

struct RunResult {
  Table table;
  json sidecar;
};

// ---------------------------------------------------------------- commands

namespace detail {

inline RunResult run_conjugate(const json& cfg) {
  const Objective f = parse_objective(need(cfg, "objective", ""), "objective");
  const std::vector<Vec> lambdas = points(need(cfg, "lambda", ""), f.dim(), "lambda");
  const double kappa = parse_kappa(cfg).value_or(1.0);
  RunResult out;
  out.table.header = {"lambda", "zeta_star", "argmax", "source", "boundary", "pi_kappa", "flags"};
  out.table.rows.resize(lambdas.size());
  std::vector<json> diag(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const ConjugateValue c = conjugate_value(f, lambdas[i]);
    std::vector<std::string> flags;
    double pi = kNaN;
    try {
      const PiKappa pk = pi_kappa_from_gradient(lambdas[i], c.argmax, kappa);
      pi = pk.value;
      if (pk.clamped) flags.push_back("pi_kappa clamped");
    } catch (const InputError&) {
      flags.push_back("pi_kappa undefined");
    }
    const char* src = c.source == ConjugateSource::closed ? "closed"
                      : c.source == ConjugateSource::saddle ? "saddle"
                                                            : "discrete";
    out.table.rows[i] = {fmt(lambdas[i]), fmt(c.value), fmt(c.argmax), src, c.boundary ? "1" : "0", fmt(pi),
                         join_flags(flags)};
    diag[i] = {{"lambda", vec_json(lambdas[i])}, {"zeta_star", num(c.value)}, {"source", src},
               {"pi_kappa", num(pi)}, {"flags", flags}};
  });
  out.sidecar["rows"] = diag;
  out.sidecar["kappa"] = kappa;
  return out;
}

inline RunResult run_bound(const json& cfg, const QuadratureOptions& q) {
  const Objective f = parse_objective(need(cfg, "objective", ""), "objective");
  const WeightedMeasure mu = parse_measure(cfg, f.dim());
  const std::vector<Vec> lambdas = points(need(cfg, "lambda", ""), f.dim(), "lambda");
  UpperPolicy up;
  up.eps = parse_eps(cfg);
  up.kappa = parse_kappa(cfg);
  LowerPolicy low;
  if (cfg.contains("lower_eps_grid")) {
    low.eps_grid = reals(cfg.at("lower_eps_grid"), "lower_eps_grid");
    for (std::size_t i = 0; i < low.eps_grid.size(); ++i) {
      if (!(low.eps_grid[i] > 0.0 && low.eps_grid[i] < 1.0)) {
        throw ConfigError("lower_eps_grid[" + std::to_string(i) + "]", "must lie in (0, 1)");
      }
    }
    if (low.eps_grid.empty()) throw ConfigError("lower_eps_grid", "must be nonempty");
  }
  low.kappa_grid = parse_kappa_grid(cfg);
  low.level_set = parse_level_set(cfg);

  std::vector<BoundReport> reports(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) { reports[i] = bound_report(f, mu, lambdas[i], up, low, q); });

  RunResult out;
  out.table.header = {"lambda",     "log_lower",   "log_oracle", "log_upper",  "oracle_error",
                      "upper_method", "lower_method", "eps_upper", "eps_lower", "kappa_upper",
                      "kappa_lower", "c_phi_used",  "oracle_method", "flags"};
  json diag = json::array();
  for (const BoundReport& r : reports) {
    std::vector<std::string> flags = r.flags;
    for (const auto& fl : r.upper.flags) flags.push_back(fl);
    out.table.rows.push_back({fmt(r.lambda), fmt(r.log_lower), fmt(r.log_oracle), fmt(r.log_upper),
                              fmt(r.oracle_error), method_name(r.upper.method), method_name(r.lower.method),
                              fmt(r.upper.eps), fmt(r.lower.eps), fmt(r.upper.kappa), fmt(r.lower.kappa),
                              fmt(r.upper.c_phi_used), r.oracle_method, join_flags(flags)});
    json cands = json::array();
    for (const auto& u : r.upper_candidates) {
      cands.push_back({{"method", method_name(u.method)}, {"log_value", num(u.log_value)}, {"eps", num(u.eps)},
                       {"log_prefactor", num(u.log_prefactor)}, {"exponent", num(u.exponent)},
                       {"c_phi_estimate", num(u.c_phi_estimate)}, {"c_phi_used", num(u.c_phi_used)},
                       {"pi_clamped", u.pi_clamped}, {"flags", u.flags}});
    }
    json lows = json::array();
    for (const auto& l : r.lower_candidates) {
      lows.push_back({{"method", method_name(l.method)}, {"log_value", num(l.log_value)}, {"eps", num(l.eps)},
                      {"kappa", num(l.kappa)}, {"log_measure", num(l.log_measure)}, {"exponent", num(l.exponent)},
                      {"level_set", method_name(l.level_set)}});
    }
    diag.push_back({{"lambda", vec_json(r.lambda)}, {"log_oracle", num(r.log_oracle)},
                    {"oracle_error", num(r.oracle_error)}, {"upper_candidates", cands},
                    {"lower_candidates", lows}, {"flags", flags}});
  }
  out.sidecar["rows"] = diag;
  return out;
}

inline RunResult run_scan(const json& cfg, const QuadratureOptions& q) {
  const Objective f = parse_objective(need(cfg, "objective", ""), "objective");
  const WeightedMeasure mu = parse_measure(cfg, f.dim());
  const json& ray = need(cfg, "ray", "");
  const Vec dir = point(need(ray, "direction", "ray"), f.dim(), "ray.direction");
  if (!(dir.array() > 0.0).all()) throw ConfigError("ray.direction", "must be componentwise positive");
  const std::vector<double> t = increasing(need(ray, "t", "ray"), "ray.t");
  if (!(t.front() > 0.0)) throw ConfigError("ray.t", "values must be positive");
  RatioScanOptions opt;
  opt.diagnostics = bool_or(cfg, "diagnostics", "", true);
  opt.kappa = parse_kappa(cfg).value_or(1.0);
  opt.kappa_grid = parse_kappa_grid(cfg);
  opt.quadrature = q;
  const TauberianScan s = ratio_scan(f, mu, dir, t, opt);

  RunResult out;
  out.table.header = {"t", "lambda_min", "log_I", "zeta_star", "ratio", "log_r_ratio", "log_v_ratio", "ok", "flags"};
  for (const auto& r : s.records) {
    out.table.rows.push_back({fmt(r.t), fmt(r.lambda_min), fmt(r.log_i), fmt(r.phi), fmt(r.ratio),
                              fmt(r.log_r_ratio), fmt(r.log_v_ratio), r.ok ? "1" : "0", r.flag});
  }
  out.sidecar["summary"] = {{"last_decade_max_abs_deviation", num(s.last_decade_deviation)},
                            {"lim_sup_proxy", num(s.last_decade_max)},
                            {"lim_inf_proxy", num(s.last_decade_min)},
                            {"proxy_note", "lim sup / lim inf reported as last-decade max / min of finite data"},
                            {"partial", s.partial}};
  return out;
}

inline RunResult run_inverse(const json& cfg, const QuadratureOptions& q) {
  std::optional<Objective> f;
  if (cfg.contains("objective")) f = parse_objective(cfg.at("objective"), "objective");
  if (f && f->dim() != 1) throw ConfigError("objective", "the inverse command is one-dimensional");
  const json& cmp = need(cfg, "comparison", "");
  const std::string source = string_or(cmp, "source", "comparison", "samples");
  const std::vector<double> lam = increasing(need(cmp, "lambda", "comparison"), "comparison.lambda");
  if (lam.size() < 3) throw ConfigError("comparison.lambda", "needs at least 3 nodes");
  std::vector<double> vals(lam.size());
  if (source == "samples") {
    vals = reals(need(cmp, "values", "comparison"), "comparison.values");
    if (vals.size() != lam.size()) throw ConfigError("comparison.values", "must match comparison.lambda in length");
  } else if (source == "oracle" || source == "conjugate") {
    if (!f) throw ConfigError("objective", "required when comparison.source is " + source);
    const WeightedMeasure mu = parse_measure(cfg, 1);
    parallel_for(lam.size(), [&](std::size_t i) {
      const Vec l = make_vec({lam[i]});
      vals[i] = source == "oracle" ? log_laplace_integral(*f, mu, l, q).log_value : conjugate_value(*f, l).value;
    });
  } else {
    throw ConfigError("comparison.source", "expected samples, oracle or conjugate");
  }
  const std::vector<double> x = increasing(need(cfg, "x", ""), "x");
  const double c12 = number_or(cfg, "c12", "", 1.0);
  const double c13 = number_or(cfg, "c13", "", 1.0);
  if (!(c12 >= 1.0)) throw ConfigError("c12", "must be >= 1");
  if (!(c13 > 0.0 && c13 <= 1.0)) throw ConfigError("c13", "must lie in (0, 1]");
  const InverseBound up = inverse_upper(ComparisonFn::from_samples(lam, vals, c12), x);
  const InverseBound lo = inverse_lower(ComparisonFn::from_samples(lam, vals, c13), x);

  RunResult out;
  out.table.header = {"x", "zeta", "upper_bound", "lower_bound", "upper_edge", "lower_edge", "flags"};
  std::vector<double> truth(x.size(), kNaN);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (f) truth[i] = f->eval(make_vec({x[i]}));
    std::vector<std::string> flags;
    if (up.edge[i] || lo.edge[i]) flags.push_back("maximizer on lambda-grid edge");
    out.table.rows.push_back({fmt(x[i]), fmt(truth[i]), fmt(up.bound[i]), fmt(lo.bound[i]), up.edge[i] ? "1" : "0",
                              lo.edge[i] ? "1" : "0", join_flags(flags)});
  }
  out.sidecar["c12"] = c12;
  out.sidecar["c13"] = c13;
  out.sidecar["source"] = source;
  out.sidecar["extrapolated"] = up.extrapolated || lo.extrapolated;

  // smallest C12 (largest C13) in the candidate list bracketing the known zeta
  if (cfg.contains("c_scan")) {
    if (!f) throw ConfigError("c_scan", "needs an objective to compare against");
    std::vector<double> cs = reals(cfg.at("c_scan"), "c_scan");
    std::sort(cs.begin(), cs.end());
    json best12 = nullptr, best13 = nullptr;
    for (double c : cs) {
      if (c >= 1.0 && best12.is_null()) {
        const InverseBound b = inverse_upper(ComparisonFn::from_samples(lam, vals, c), x);
        bool ok = true;
        for (std::size_t i = 0; i < x.size(); ++i) ok = ok && b.bound[i] >= truth[i] - 1e-12 * (1.0 + std::abs(truth[i]));
        if (ok) best12 = c;
      }
    }
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
      const double c = *it;
      if (c > 0.0 && c <= 1.0 && best13.is_null()) {
        const InverseBound b = inverse_lower(ComparisonFn::from_samples(lam, vals, c), x);
        bool ok = true;
        for (std::size_t i = 0; i < x.size(); ++i) ok = ok && b.bound[i] <= truth[i] + 1e-12 * (1.0 + std::abs(truth[i]));
        if (ok) best13 = c;
      }
    }
    out.sidecar["c_scan"] = {{"candidates", cs}, {"smallest_c12", best12}, {"largest_c13", best13}};
  }
  return out;
}

inline RunResult run_chernoff(const json& cfg) {
  std::optional<Objective> phi;
  std::optional<ComparisonFn> samples;
  int d = 1;
  if (cfg.contains("phi_samples")) {
    const json& s = cfg.at("phi_samples");
    const std::vector<double> lam = increasing(need(s, "lambda", "phi_samples"), "phi_samples.lambda");
    const std::vector<double> vals = reals(need(s, "values", "phi_samples"), "phi_samples.values");
    if (lam.size() < 3) throw ConfigError("phi_samples.lambda", "needs at least 3 nodes");
    if (vals.size() != lam.size()) throw ConfigError("phi_samples.values", "must match phi_samples.lambda in length");
    samples = ComparisonFn::from_samples(lam, vals);
  } else {
    phi = parse_objective(need(cfg, "phi", ""), "phi");
    d = phi->dim();
  }
  const std::vector<Vec> xs = points(need(cfg, "x", ""), d, "x");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if ((xs[i].array() < 0.0).any()) throw ConfigError("x[" + std::to_string(i) + "]", "must be componentwise >= 0");
  }
  RunResult out;
  out.table.header = {"x", "phi_star", "bound", "clipped", "edge"};
  for (const Vec& x : xs) {
    const ChernoffBound b = samples ? chernoff_tail(*samples, x) : chernoff_tail(*phi, x);
    out.table.rows.push_back({fmt(x), fmt(b.phi_star), fmt(b.value), b.clipped ? "1" : "0", b.edge ? "1" : "0"});
  }
  out.sidecar["phi_source"] = samples ? "samples" : "objective";
  return out;
}

inline RunResult run_asympt(const json& cfg, const QuadratureOptions& q) {
  const std::vector<double> ms = reals(need(cfg, "m", ""), "m");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!(ms[i] > 1.0)) throw ConfigError("m[" + std::to_string(i) + "]", "must exceed 1");
  }
  const std::vector<double> lams = reals(need(cfg, "lambda", ""), "lambda");
  for (std::size_t i = 0; i < lams.size(); ++i) {
    if (!(lams[i] > 0.0)) throw ConfigError("lambda[" + std::to_string(i) + "]", "must be positive");
  }
  struct Cell {
    double m, lambda, l0, oracle = kNaN, err = kNaN;
    PowerConstants c{kNaN, kNaN, kNaN};
    bool applies = false;
  };
  std::vector<Cell> cells;
  for (double m : ms) {
    for (double l : lams) cells.push_back({m, l, lambda0(m)});
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    Cell& c = cells[i];
    const Objective f = Objective::power(c.m, Domain::orthant(1));
    const LogIntegralResult r = log_laplace_integral(f, WeightedMeasure::lebesgue(), make_vec({c.lambda}), q);
    c.oracle = r.log_value;
    c.err = r.abs_error_log;
    c.applies = c.lambda >= c.l0;
    if (c.applies) c.c = power_family_constants(c.m, c.lambda);
  });
  RunResult out;
  out.table.header = {"m",          "lambda",        "lambda0",         "log_oracle",   "oracle_error",
                      "log_closed_lower", "log_fedoryuk", "log_closed_upper", "fedoryuk_ratio", "bracket", "flags"};
  int violations = 0;
  for (const Cell& c : cells) {
    std::string bracket = "na", flag;
    double ratio = kNaN;
    if (c.applies) {
      const bool ok = c.oracle >= c.c.log_lower - c.err && c.oracle <= c.c.log_upper + c.err;
      bracket = ok ? "1" : "0";
      if (!ok) ++violations;
      ratio = std::exp(c.oracle - c.c.log_exact);
    } else {
      flag = "lambda below lambda0";
    }
    out.table.rows.push_back({fmt(c.m), fmt(c.lambda), fmt(c.l0), fmt(c.oracle), fmt(c.err), fmt(c.c.log_lower),
                              fmt(c.c.log_exact), fmt(c.c.log_upper), fmt(ratio), bracket, flag});
  }
  out.sidecar["bracket_violations"] = violations;
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"conjugate", "bound", "scan", "inverse", "chernoff", "asympt"};
  return names;
}

/// Runs one command on a parsed config. Throws InputError (exit 2) or
/// NumericalError (exit 3).
inline RunResult run(const std::string& command, const json& cfg, std::uint64_t seed) {
  if (!cfg.is_object()) throw ConfigError("(root)", "config must be a JSON object");
  const QuadratureOptions q = detail::parse_quadrature(cfg, seed);
  RunResult r;
  if (command == "conjugate") {
    r = detail::run_conjugate(cfg);
  } else if (command == "bound") {
    r = detail::run_bound(cfg, q);
  } else if (command == "scan") {
    r = detail::run_scan(cfg, q);
  } else if (command == "inverse") {
    r = detail::run_inverse(cfg, q);
  } else if (command == "chernoff") {
    r = detail::run_chernoff(cfg);
  } else if (command == "asympt") {
    r = detail::run_asympt(cfg, q);
  } else {
    throw UsageError("unknown command '" + command + "'");
  }
  r.sidecar["command"] = command;
  r.sidecar["seed"] = seed;
  r.sidecar["config"] = cfg;
  r.sidecar["columns"] = r.table.header;
  return r;
}

/// Seed precedence: command line, then the config's "seed", then 42.
inline std::uint64_t resolve_seed(const json& cfg, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  if (cfg.is_object() && cfg.contains("seed")) {
    const json& s = cfg.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    return s.get<std::uint64_t>();
  }
  return 42;
}

inline json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Sidecar path: the CSV path with its extension replaced by .json.
inline std::string sidecar_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv_path.substr(0, dot) + ".json";
  }
  return csv_path + ".json";
}

/// Whole tool: run, write outputs, map errors to exit codes. An out path
/// of "-" sends the CSV to stdout and skips the sidecar.
inline int execute(const std::string& command, const std::string& config_path, const std::string& out_path,
                   std::optional<std::uint64_t> cli_seed, std::ostream& out, std::ostream& err) {
  try {
    const json cfg = read_config(config_path);
    const RunResult r = run(command, cfg, resolve_seed(cfg, cli_seed));
    const std::string csv = r.table.csv();
    if (out_path == "-") {
      out << csv;
      return kExitOk;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + out_path + "'");
    f << csv;
    std::ofstream s(sidecar_path(out_path), std::ios::binary);
    if (!s) throw InputError("cannot write '" + sidecar_path(out_path) + "'");
    s << r.sidecar.dump(2) << '\n';
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace laplace_bounds::cli

#endif  // LAPLACE_BOUNDS_CLI_HPP_
