// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "laplace_bounds/bounds.hpp"
#include "laplace_bounds/conjugate.hpp"
#include "laplace_bounds/tauberian.hpp"
#include "oracles.hpp"

using namespace laplace_bounds;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string str(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const WeightedMeasure kLeb = WeightedMeasure::lebesgue();
const std::vector<double> kMs = {1.5, 2.0, 3.0, 4.0};

std::vector<double> matrix_lambdas(double m) { return {lambda0(m), 5.0, 10.0, 20.0, 50.0}; }

void gaussian_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = Objective::power(2.0, Domain::full(1));
  double worst = 0.0;
  for (int l = 0; l <= 10; ++l) {
    const double got = log_laplace_integral(f, kLeb, make_vec({double(l)})).log_value;
    worst = std::max(worst, std::abs(got - (0.5 * l * l + 0.5 * std::log(2.0 * std::numbers::pi))));
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-8 && secs < 1.0, str("max |ln I - exact| = %.3g (<= 1e-8), runtime %.3f s (< 1 s)", worst, secs));
}

void saddle_prefactor() {
  const auto t0 = std::chrono::steady_clock::now();
  const double l = 100.0;
  double lo = kInf, hi = -kInf;
  std::string cells;
  for (double m : kMs) {
    const double ln_i = log_laplace_integral(Objective::power(m, Domain::orthant(1)), kLeb, make_vec({l})).log_value;
    const double mp = m / (m - 1.0);
    const double ratio = std::exp(ln_i - std::pow(l, mp) / mp + (m - 2.0) / (2.0 * m - 2.0) * std::log(l)) /
                         std::sqrt(2.0 * std::numbers::pi / (m - 1.0));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    cells += str(" m=%g:%.6f", m, ratio);
  }
  const double secs = seconds_since(t0);
  report(2, lo >= 0.95 && hi <= 1.05 && secs < 10.0,
         str("ratios at lambda=100%s in [0.95, 1.05], runtime %.3f s (< 10 s)", cells.c_str(), secs));
}

void constants_bracket() {
  int points = 0, violations = 0;
  for (double m : kMs) {
    const auto f = Objective::power(m, Domain::orthant(1));
    for (double l : matrix_lambdas(m)) {
      const auto r = log_laplace_integral(f, kLeb, make_vec({l}));
      const auto c = power_family_constants(m, l);
      ++points;
      if (!(r.log_value >= c.log_lower - r.abs_error_log && r.log_value <= c.log_upper + r.abs_error_log)) ++violations;
    }
  }
  report(3, violations == 0, str("%d of %d (m, lambda) points outside the closed-form bracket", violations, points));
}

void sandwich() {
  int points = 0, violations = 0;
  double worst = kInf;
  for (int d = 1; d <= 2; ++d) {
    for (double m : kMs) {
      const auto f = Objective::power(m, Domain::orthant(d));
      for (double l : matrix_lambdas(m)) {
        ++points;
        try {
          const BoundReport r = bound_report(f, kLeb, constant_vec(d, l));
          const double slack = std::min(r.log_oracle - r.log_lower, r.log_upper - r.log_oracle);
          worst = std::min(worst, slack);
          if (!(slack >= -1e-6)) ++violations;
        } catch (const std::exception& e) {
          ++violations;
          std::printf("  d=%d m=%g lambda=%g: %s\n", d, m, l, e.what());
        }
      }
    }
  }
  report(4, violations == 0,
         str("%d of %d points violate lower <= oracle <= upper, smallest slack %.3g (>= -1e-6)", violations, points,
             worst));
}

void tauberian_limit() {
  RatioScanOptions opt;
  const auto scan = ratio_scan(Objective::power(2.0, Domain::orthant(1)), kLeb, make_vec({1.0}),
                               log_spaced(5.0, 50.0, 7), opt);
  const RatioRecord& r = scan.records.back();
  const double dev = std::abs(r.ratio - 1.0);
  const bool pass = r.ok && dev <= 0.01 && r.log_r_ratio <= 0.05 && r.log_v_ratio <= 0.05;
  report(5, pass,
         str("t=50: |ln I/zeta* - 1| = %.3g (<= 0.01), |ln r|/zeta* = %.3g, |ln V|/zeta* = %.3g (<= 0.05)", dev,
             r.log_r_ratio, r.log_v_ratio));
}

void conjugation() {
  // biconjugates of convex samples, n = 4097
  double bic = 0.0;
  const std::vector<std::pair<double (*)(double), std::pair<double, double>>> convex = {
      {[](double x) { return 0.5 * x * x; }, {-5.0, 5.0}},
      {[](double x) { return x * x * x * x / 4.0; }, {0.0, 5.0}},
      {[](double x) { return std::exp(x); }, {-3.0, 3.0}},
      {[](double x) { return std::abs(x); }, {-5.0, 5.0}},
  };
  for (const auto& [fn, ab] : convex) {
    const GridFn g = GridFn::sample(GridFn::linspace(ab.first, ab.second, 4097), fn);
    const GridFn gg = biconjugate(g);
    for (std::size_t i = 0; i < g.size(); ++i) bic = std::max(bic, std::abs(gg.values()[i] - g.values()[i]));
  }

  // linear-time transform against the O(n m) scan
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 40 + 53 * trial;
    std::vector<double> x(n), f(n);
    double t = -4.0;
    for (std::size_t i = 0; i < n; ++i) {
      t += 0.005 + std::abs(u(rng));
      x[i] = t;
      f[i] = 2.0 * u(rng) + 0.2 * t * t;
    }
    std::vector<double> ls;
    for (double l = -25.0; l <= 25.0; l += 0.0917) ls.push_back(l);
    const GridFn g(x, f);
    const ConjugateFn c = llt_1d(g, ls);
    const auto brute = oracles::brute_conjugate(x, f, ls);
    for (std::size_t j = 0; j < ls.size(); ++j) {
      if (c.values[j] != brute.values[j]) ++mismatches;
    }
  }

  // radial lift in 2D
  double radial = 0.0;
  const auto s = GridFn::linspace(0.0, 5.0, 5001);
  for (double (*prof)(double) : {+[](double t) { return 0.5 * t * t; }, +[](double t) { return t * t * t * t / 4.0; }}) {
    const GridFn p = GridFn::sample(s, prof);
    for (double rho : {0.5, 1.0, 2.0}) {
      radial = std::max(radial, std::abs(radial_conjugate(p, rho, 2) - oracles::radial_brute_2d(prof, rho, 5.0, 801)));
    }
  }
  report(6, bic <= 1e-5 && mismatches == 0 && radial <= 2e-3,
         str("biconjugate max error %.3g (<= 1e-5), %d llt/brute mismatches on 20 grids, radial 2D error %.3g (<= 2e-3)",
             bic, mismatches, radial));
}

void k_bar_asymptotic() {
  const double eps = 1e-3;
  double lo = kInf, hi = -kInf, printed_lo = kInf, printed_hi = -kInf;
  for (int d = 1; d <= 2; ++d) {
    for (double m : kMs) {
      // zeta(x) = |x|^m
      const auto f = Objective::power(m, Domain::full(d), Coupling::radial, m);
      const double num = std::exp(k_integral(f, kLeb, eps).log_value);
      const double corrected = num / k_asymptotic_regular(0.0, m, d, SlowVary::one(), SlowVary::one(), eps);
      const double printed = num / k_asymptotic_regular(0.0, m, d, SlowVary::one(), SlowVary::one(), eps,
                                                        AngularConstant::ball_volume);
      lo = std::min(lo, corrected);
      hi = std::max(hi, corrected);
      printed_lo = std::min(printed_lo, printed);
      printed_hi = std::max(printed_hi, printed);
    }
  }
  report(7, lo >= 0.95 && hi <= 1.05,
         str("eps=1e-3, d in {1,2}, m in {1.5,2,3,4}: numerical/predicted in [%.6f, %.6f] with the sphere-area "
             "constant (judged, [0.95, 1.05]); with the unit-ball constant as printed [%.6f, %.6f]",
             lo, hi, printed_lo, printed_hi));
}

void inverse_recovery() {
  const auto f = Objective::power(2.0, Domain::orthant(1));
  const auto lam = GridFn::linspace(-5.0, 20.0, 2501);
  auto sampler = [&](double l) { return conjugate_value(f, make_vec({l})).value; };
  const auto x = GridFn::linspace(0.0, 10.0, 1001);
  const InverseBound up = inverse_upper(ComparisonFn::sample(lam, sampler, 1.0), x);
  const InverseBound lo = inverse_lower(ComparisonFn::sample(lam, sampler, 0.5), x);
  double err = 0.0;
  int above = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double truth = 0.5 * x[i] * x[i];
    err = std::max(err, std::abs(up.bound[i] - truth));
    if (lo.bound[i] > truth) ++above;
  }
  report(8, err <= 1e-4 && above == 0,
         str("C12=1 sup-norm error %.3g on [0, 10] (<= 1e-4); C13=0.5 above truth at %d of %zu points", err, above,
             x.size()));
}

void chernoff() {
  int violations = 0, points = 0;
  const auto phi1 = Objective::power(2.0, Domain::full(1));
  const auto phi2 = Objective::power(2.0, Domain::full(2));
  for (int i = 0; i < 50; ++i) {
    const double x = 0.1 * i;
    ++points;
    if (!(chernoff_tail(phi1, make_vec({x})).value >= oracles::normal_tail(x))) ++violations;
    const Vec y = make_vec({0.08 * i, 0.05 * i});
    ++points;
    if (!(chernoff_tail(phi2, y).value >= oracles::normal_tail(y[0]) * oracles::normal_tail(y[1]))) ++violations;
  }
  report(9, violations == 0, str("%d of %d points where the bound falls below the Gaussian tail", violations, points));
}

void ellipsoid_vs_monte_carlo() {
  QuadratureOptions opt;
  opt.mc_samples = 1000000;
  opt.seed = 42;
  double lo = kInf, hi = -kInf;
  std::string cells;
  for (int d = 1; d <= 2; ++d) {
    const auto f = Objective::power(2.0, Domain::full(d));
    const Vec l = constant_vec(d, 10.0);
    const auto mc = level_set_measure(f, kLeb, l, 1e-3, LevelSetMethod::monte_carlo, opt);
    const auto el = level_set_measure(f, kLeb, l, 1e-3, LevelSetMethod::ellipsoid, opt);
    const double ratio = mc.measure / el.measure;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    cells += str(" d=%d:%.5f(se %.2g)", d, ratio, mc.std_error / el.measure);
  }
  report(10, lo >= 0.9 && hi <= 1.1, str("eps=1e-3, 1e6 samples, seed 42, MC/ellipsoid%s in [0.9, 1.1]", cells.c_str()));
}

}  // namespace

int main() {
  const std::vector<void (*)()> criteria = {gaussian_exactness, saddle_prefactor, constants_bracket,
                                             sandwich,           tauberian_limit,  conjugation,
                                             k_bar_asymptotic,   inverse_recovery, chernoff,
                                             ellipsoid_vs_monte_carlo};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
    }
  }
  return failures;
}
