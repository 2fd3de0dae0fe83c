#ifndef LAPLACE_BOUNDS_TESTS_ORACLES_HPP_
#define LAPLACE_BOUNDS_TESTS_ORACLES_HPP_

// Slow, independent reference computations. Nothing here calls into the
// library's algorithms; only plain loops and closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracles {

struct Sup {
  std::vector<double> values;
  std::vector<std::size_t> argmax;
};

/// O(n m) scan; ties keep the first index.
inline Sup brute_conjugate(const std::vector<double>& x, const std::vector<double>& f,
                           const std::vector<double>& lambda) {
  Sup out;
  for (double l : lambda) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = l * x[i] - f[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    out.values.push_back(best);
    out.argmax.push_back(arg);
  }
  return out;
}

/// Convex envelope at the nodes: min over all chords spanning each node.
inline std::vector<double> convex_envelope(const std::vector<double>& x, const std::vector<double>& f) {
  const std::size_t n = x.size();
  std::vector<double> env(f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a <= i; ++a) {
      for (std::size_t b = i; b < n; ++b) {
        if (a == b) continue;
        const double t = (x[i] - x[a]) / (x[b] - x[a]);
        env[i] = std::min(env[i], (1.0 - t) * f[a] + t * f[b]);
      }
    }
  }
  return env;
}

/// sup over a square grid of (rho x) - g0(|(x, y)|), i.e. the conjugate at (rho, 0).
inline double radial_brute_2d(const std::function<double(double)>& g0, double rho, double half, int n) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = -half + 2.0 * half * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = -half + 2.0 * half * j / (n - 1);
      best = std::max(best, rho * x - g0(std::hypot(x, y)));
    }
  }
  return best;
}

inline double radial_brute_3d(const std::function<double(double)>& g0, double rho, double half, int n) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = -half + 2.0 * half * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = -half + 2.0 * half * j / (n - 1);
      for (int k = 0; k < n; ++k) {
        const double z = -half + 2.0 * half * k / (n - 1);
        best = std::max(best, rho * x - g0(std::sqrt(x * x + y * y + z * z)));
      }
    }
  }
  return best;
}

/// ln of the composite midpoint rule for exp(h(x)) on [a, b], shifted by the
/// sample maximum.
inline double log_midpoint(const std::function<double(double)>& h, double a, double b, long n) {
  const double dx = (b - a) / static_cast<double>(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < n; ++i) peak = std::max(peak, h(a + (i + 0.5) * dx));
  double acc = 0.0;
  for (long i = 0; i < n; ++i) acc += std::exp(h(a + (i + 0.5) * dx) - peak);
  return peak + std::log(acc * dx);
}

/// ln of the composite midpoint rule for exp(h(x, y)) on [a, b]^2.
inline double log_midpoint_2d(const std::function<double(double, double)>& h, double a, double b, long n) {
  const double dx = (b - a) / static_cast<double>(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) peak = std::max(peak, h(a + (i + 0.5) * dx, a + (j + 0.5) * dx));
  }
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) acc += std::exp(h(a + (i + 0.5) * dx, a + (j + 0.5) * dx) - peak);
  }
  return peak + std::log(acc * dx * dx);
}

/// ln of the integral of exp(lambda x - x^2 / 2) over x >= 0.
inline double log_gaussian_half_line(double lambda) {
  return 0.5 * lambda * lambda + std::log(std::sqrt(std::numbers::pi / 2.0) * std::erfc(-lambda / std::numbers::sqrt2));
}

/// Upper tail of the standard normal.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace oracles

#endif  // LAPLACE_BOUNDS_TESTS_ORACLES_HPP_
