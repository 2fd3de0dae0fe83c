#ifndef LAPLACE_BOUNDS_RANDOM_HPP_
#define LAPLACE_BOUNDS_RANDOM_HPP_

// Counter-based generator: draw k of stream `seed` is a pure function of
// (seed, k), so samples can be produced in any order on any thread.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace laplace_bounds {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter));
  }
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  /// Standard normal from two consecutive counters (Box-Muller).
  double normal(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace laplace_bounds

#endif  // LAPLACE_BOUNDS_RANDOM_HPP_
