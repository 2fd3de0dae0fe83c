#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "laplace_bounds/conjugate.hpp"
#include "oracles.hpp"

using namespace laplace_bounds;

namespace {

GridFn sample(double a, double b, std::size_t n, double (*f)(double)) {
  return GridFn::sample(GridFn::linspace(a, b, n), f);
}

double half_square(double x) { return 0.5 * x * x; }
double quartic(double x) { return x * x * x * x / 4.0; }
double absval(double x) { return std::abs(x); }
double double_well(double x) { return std::min(x * x, (x - 2.0) * (x - 2.0)); }

}  // namespace

TEST(Llt, HalfSquareIsSelfConjugate) {
  const auto g = sample(-5, 5, 4097, half_square);
  const double l = 1.0;
  EXPECT_NEAR(llt_1d(g, {&l, 1}).values[0], 0.5, 5e-6);
}

TEST(Llt, AbsoluteValue) {
  const auto g = sample(-5, 5, 1001, absval);
  const std::vector<double> ls = {0.5, 2.0};
  const auto c = llt_1d(g, ls);
  EXPECT_NEAR(c.values[0], 0.0, 1e-15);
  EXPECT_NEAR(c.values[1], 5.0, 1e-12);
  EXPECT_FALSE(c.boundary[0]);
  EXPECT_TRUE(c.boundary[1]);
  EXPECT_TRUE(c.extrapolated[1]);
}

TEST(Llt, QuarticOnHalfLine) {
  const auto g = sample(0, 5, 4097, quartic);
  const double l = 1.0;
  EXPECT_NEAR(llt_1d(g, {&l, 1}).values[0], 0.75, 1e-4);
}

TEST(Llt, EqualsBruteForceOnRandomGrids) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 50 + 37 * trial;
    std::vector<double> x(n), f(n);
    double t = -3.0;
    for (std::size_t i = 0; i < n; ++i) {
      t += 0.01 + std::abs(u(rng));
      x[i] = t;
      f[i] = 3.0 * u(rng) + 0.1 * t * t;
    }
    std::vector<double> ls;
    for (double l = -20.0; l <= 20.0; l += 0.173) ls.push_back(l);
    const auto c = legendre_transform(x, f, ls);
    const auto brute = oracles::brute_conjugate(x, f, ls);
    for (std::size_t j = 0; j < ls.size(); ++j) {
      EXPECT_EQ(c.values[j], brute.values[j]) << trial << " " << ls[j];
      EXPECT_EQ(c.argmax[j], brute.argmax[j]) << trial << " " << ls[j];
    }
    EXPECT_TRUE(c.convex());
    EXPECT_TRUE(c.argmax_monotone());
  }
}

TEST(Llt, EmptyGridIsAnError) {
  std::vector<double> none;
  const double l = 0.0;
  EXPECT_THROW(legendre_transform(none, none, {&l, 1}), InputError);
}

TEST(Llt, OrderReversal) {
  const auto f = sample(-4, 4, 801, half_square);
  const auto g = GridFn::sample(f.nodes(), [](double x) { return 0.5 * x * x + 0.1 + 0.05 * std::sin(x); });
  const auto ls = default_lambda_nodes(f, 301);
  const auto cf = llt_1d(f, ls), cg = llt_1d(g, ls);
  for (std::size_t j = 0; j < ls.size(); ++j) EXPECT_GE(cf.values[j], cg.values[j]);
}

TEST(Llt, DilationIdentityOnGrid) {
  const auto x = GridFn::linspace(-6, 6, 6001);
  for (double eps : {0.1, 0.5}) {
    const auto g = GridFn::sample(x, [&](double t) { return (1.0 - eps) * 0.5 * t * t; });
    const auto f = GridFn::sample(x, half_square);
    for (double l : {0.5, 1.0, 2.0}) {
      const double lhs = llt_1d(g, {&l, 1}).values[0];
      const double arg = l / (1.0 - eps);
      const double rhs = (1.0 - eps) * llt_1d(f, {&arg, 1}).values[0];
      EXPECT_NEAR(lhs, rhs, 1e-5);
    }
  }
}

TEST(Biconjugate, ConvexGridIsRecovered) {
  const auto f = sample(-5, 5, 4097, half_square);
  const auto ff = biconjugate(f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(ff.values()[i], f.values()[i], 1e-5);
  const auto a = sample(-5, 5, 1001, absval);
  const auto aa = biconjugate(a);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(aa.values()[i], a.values()[i], 1e-12);
}

TEST(Biconjugate, DoubleWellGivesConvexEnvelope) {
  const auto f = sample(-3, 5, 801, double_well);
  const auto env = biconjugate(f);
  const auto oracle = oracles::convex_envelope(f.nodes(), f.values());
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(env.values()[i], oracle[i], 1e-9);
    const double x = f.nodes()[i];
    if (x >= 0.0 && x <= 2.0) {
      EXPECT_NEAR(env.values()[i], 0.0, 1e-9);
    }
  }
}

TEST(Regional, MaskedSup) {
  const auto f = sample(-5, 5, 1001, half_square);
  const Vec l = make_vec({3.0});
  const auto unit = RegionMask::where(f, [](const Vec& x) { return x[0] >= -1e-12 && x[0] <= 1.0 + 1e-12; });
  EXPECT_NEAR(regional_conjugate(f, unit, l).value, 2.5, 1e-12);
  const auto all = RegionMask::all(f);
  const double ll = 3.0;
  EXPECT_EQ(regional_conjugate(f, all, l).value, llt_1d(f, {&ll, 1}).values[0]);
  const auto zero = RegionMask::where(f, [](const Vec& x) { return std::abs(x[0]) < 1e-12; });
  EXPECT_NEAR(regional_conjugate(f, zero, make_vec({-7.0})).value, 0.0, 1e-15);
  RegionMask empty{std::vector<bool>(f.total_size(), false)};
  EXPECT_THROW(regional_conjugate(f, empty, l), InputError);
}

TEST(Tensor, FactorizedSweepMatchesBruteForce) {
  const auto ax = GridFn::linspace(-5, 5, 201);
  std::vector<double> vals;
  for (double x : ax)
    for (double y : ax) vals.push_back(0.5 * (x * x + y * y) + 0.3 * std::cos(x * y));
  const GridFn g({ax, ax}, vals);
  for (const Vec& l : {make_vec({1.0, 1.0}), make_vec({-2.0, 0.5}), make_vec({4.0, -3.0})}) {
    const auto fast = factorized_conjugate(g, l);
    const auto slow = regional_conjugate(g, RegionMask::all(g), l);
    EXPECT_DOUBLE_EQ(fast.value, slow.value);
  }
  std::vector<double> q;
  for (double x : ax)
    for (double y : ax) q.push_back(0.5 * (x * x + y * y));
  EXPECT_NEAR(conjugate_nd(GridFn({ax, ax}, q), make_vec({1.0, 1.0})), 1.0, 1e-4);
}

TEST(Tensor, ThreeAxisSweep) {
  const auto ax = GridFn::linspace(-3, 3, 61);
  std::vector<double> vals;
  for (double x : ax)
    for (double y : ax)
      for (double z : ax) vals.push_back(0.5 * x * x + y * y + 0.25 * z * z * z * z + 0.1 * x * z);
  const GridFn g({ax, ax, ax}, vals);
  const Vec l = make_vec({0.7, -1.2, 2.0});
  EXPECT_DOUBLE_EQ(factorized_conjugate(g, l).value, regional_conjugate(g, RegionMask::all(g), l).value);
}

TEST(Radial, ProfilesLiftToTheirOneDimensionalConjugate) {
  const auto s = GridFn::linspace(0, 8, 8001);
  EXPECT_NEAR(radial_conjugate(GridFn::sample(s, half_square), 2.0, 2), 2.0, 1e-6);
  EXPECT_NEAR(radial_conjugate(GridFn::sample(s, quartic), 1.0, 3), 0.75, 1e-6);
  EXPECT_NEAR(radial_conjugate(GridFn::sample(s, [](double t) { return t; }), 0.5, 2), 0.0, 1e-15);
  EXPECT_THROW(radial_conjugate(GridFn::sample(s, half_square), -1.0, 2), InputError);
}

TEST(Radial, AgreesWithDenseTwoDimensionalSup) {
  const auto s = GridFn::linspace(0, 5, 5001);
  for (auto prof : {half_square, quartic}) {
    const auto p = GridFn::sample(s, prof);
    for (double rho : {0.5, 1.0, 2.0}) {
      const double brute = oracles::radial_brute_2d(prof, rho, 5.0, 801);
      EXPECT_NEAR(radial_conjugate(p, rho, 2), brute, 2e-3);
    }
  }
  const auto s3 = GridFn::linspace(0, 5, 5001);
  EXPECT_NEAR(radial_conjugate(GridFn::sample(s3, quartic), 1.0, 3), oracles::radial_brute_3d(quartic, 1.0, 5.0, 101), 1e-3);
}

TEST(ConjugateNd, SeparableSums) {
  EXPECT_NEAR(conjugate_nd(Objective::power(2.0, Domain::full(2)), make_vec({3.0, 4.0})), 12.5, 1e-12);
  const auto f = Objective::separable({Profile::power(4.0), Profile::power(2.0)}, Domain::orthant(2));
  EXPECT_NEAR(conjugate_nd(f, make_vec({1.0, 2.0})), 2.75, 1e-12);
  const auto radial = Objective::power(3.0, Domain::full(2), Coupling::radial);
  EXPECT_THROW(conjugate_nd(radial, make_vec({1.0, 1.0})), UsageError);
}

TEST(YoungGap, ZeroAtMaximizerAndPositiveElsewhere) {
  const auto p2 = Objective::power(2.0, Domain::orthant(1));
  const auto p4 = Objective::power(4.0, Domain::orthant(1));
  EXPECT_NEAR(young_gap(p2, make_vec({3.0}), make_vec({3.0})), 0.0, 1e-12);
  EXPECT_NEAR(young_gap(p2, make_vec({1.0}), make_vec({3.0})), 2.0, 1e-12);
  EXPECT_NEAR(young_gap(p4, make_vec({2.0}), make_vec({8.0})), 0.0, 1e-12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  const std::vector<Objective> fams = {p2, p4, Objective::power(1.5, Domain::orthant(2)),
                                       Objective::power_log(2.0, 1.0, Domain::orthant(1))};
  for (const auto& f : fams) {
    for (int k = 0; k < 1000; ++k) {
      Vec x(f.dim()), l(f.dim());
      for (int i = 0; i < f.dim(); ++i) {
        x[i] = u(rng);
        l[i] = u(rng) + 3.0;
      }
      EXPECT_GE(young_gap(f, x, l), -1e-10 * (1.0 + std::abs(l.dot(x))));
    }
  }
}
