#ifndef LAPLACE_BOUNDS_TYPES_HPP_
#define LAPLACE_BOUNDS_TYPES_HPP_

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace laplace_bounds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Error taxonomy. The CLI maps InputError to exit status 2 and
// NumericalError (including divergence) to exit status 3.

/// Malformed or out-of-range arguments.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A call that is well-formed but not applicable to the given object.
class UsageError : public InputError {
 public:
  using InputError::InputError;
};

/// A documented precondition (e.g. lambda >= lambda_0(m)) is violated.
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integral or conjugate that should be finite is not.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Internal invariant broken (e.g. a bound sandwich that does not hold).
class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vec constant_vec(Eigen::Index d, double value) {
  return Vec::Constant(d, value);
}

/// ln(exp(a) + exp(b)) without overflow; -inf is the additive identity.
inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double unit_sphere_area(int d) {
  return d * unit_ball_volume(d);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_TYPES_HPP_
