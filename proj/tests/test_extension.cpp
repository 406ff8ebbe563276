#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonloc/extension.hpp"
#include "nonloc/functional.hpp"

using namespace nonloc;

namespace {

GridSet full(const Grid& g) {
  GridSet s(g);
  std::fill(s.cells.begin(), s.cells.end(), 1);
  return s;
}

// Bump of the given radius and height centred at c; zero outside the ball.
GridFunction bump(const Grid& g, const std::vector<double>& c, double radius, double height) {
  GridFunction u(g);
  std::vector<double> x(g.d);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.center(f, x.data());
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    double t = 1.0 - r2 / (radius * radius);
    u.values[f] = t > 0.0 ? height * t * t : 0.0;
  }
  return u;
}

template <class F>
GridFunction sample(const Grid& g, F fn) {
  GridFunction u(g);
  std::vector<double> x(g.d);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.center(f, x.data());
    u.values[f] = fn(x);
  }
  return u;
}

}  // namespace

TEST(ZeroExtend, ZeroStaysZero) {
  Grid g = Grid::centered_cube(2, 0.1, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  GridSet v = rasterize(g, Shape::ball(0.4, {0.0, 0.0}));
  GridFunction ext = zero_extend(GridFunction(g), omega, v, 3);
  EXPECT_EQ(ext.grid.n[0], g.n[0] + 6);
  for (double x : ext.values) EXPECT_EQ(x, 0.0);
}

TEST(ZeroExtend, PreservesLpNorm) {
  Grid g = Grid::centered_cube(2, 0.05, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  GridSet v = rasterize(g, Shape::ball(0.5, {0.1, 0.0}));
  GridFunction u = bump(g, {0.1, 0.0}, 0.45, 2.0);
  GridFunction ext = zero_extend(u, omega, v, 4);
  for (double p : {1.0, 2.0, 3.5}) EXPECT_EQ(ext.lp_norm(p), u.lp_norm(p));
}

TEST(ZeroExtend, RejectsMissingStandoff) {
  Grid g = Grid::centered_cube(1, 0.1, 1.0);
  GridSet omega = full(g);
  GridSet v = full(g);
  EXPECT_THROW(zero_extend(GridFunction(g, 1.0), omega, v, 1), std::invalid_argument);
}

TEST(ZeroExtend, VanishingInequalityOnRandomBumps) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> c(-0.3, 0.3), rad(0.1, 0.35), amp(0.2, 3.0);
  Grid g = Grid::centered_cube(2, 1.0 / 20, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  Kernel k = kernels::fractional(2, 0.5);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> centre{c(rng), c(rng)};
    double r = rad(rng);
    GridSet v = rasterize(g, Shape::ball(r + 0.05, centre));
    LemmaCheck chk = vanishing_check(bump(g, centre, r, amp(rng)), omega, v, k, 1.0 + (i % 2));
    EXPECT_TRUE(chk.holds) << "bump " << i << " slack " << chk.slack;
    EXPECT_GE(chk.slack, 0.0);
  }
}

TEST(Reflect, OnesStayOnes) {
  Grid g(2, 0.1, {5, 4}, {0.0, 0.0});
  GridFunction r = reflect_even(GridFunction(g, 1.0), 1);
  EXPECT_EQ(r.grid.n[1], 8);
  EXPECT_NEAR(r.grid.origin[1], -0.4, 1e-15);
  for (double v : r.values) EXPECT_EQ(v, 1.0);
}

TEST(Reflect, DoublesLpExactly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  Grid g(2, 0.05, {12, 9}, {0.0, 0.0});
  GridFunction u(g);
  for (double& v : u.values) v = d(rng);
  for (int axis : {0, 1}) {
    GridFunction r = reflect_even(u, axis);
    // Every value appears exactly twice, so the p-th power sums double exactly.
    std::vector<double> once = u.values, twice = r.values;
    once.insert(once.end(), u.values.begin(), u.values.end());
    std::sort(once.begin(), once.end());
    std::sort(twice.begin(), twice.end());
    EXPECT_EQ(once, twice);
    for (double p : {1.0, 2.0}) EXPECT_NEAR(std::pow(r.lp_norm(p), p), 2.0 * std::pow(u.lp_norm(p), p), 1e-12 * std::pow(r.lp_norm(p), p));
  }
  EXPECT_THROW(reflect_even(u, 2), std::invalid_argument);
}

TEST(Reflect, SeminormRatioStableUnderRefinement) {
  Kernel k = kernels::fractional(1, 0.5);
  std::vector<double> ratios;
  for (int n : {32, 64, 128}) {
    Grid g(1, 1.0 / n, {n}, {0.0});
    GridFunction u = sample(g, [](const std::vector<double>& x) { return 1.0 + x[0] * x[0]; });
    GridFunction r = reflect_even(u, 0);
    GridSet om = full(g), om2 = full(r.grid);
    ratios.push_back(seminorm(r, k, 1.0, &om2).value / seminorm(u, k, 1.0, &om).value);
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    double q = ratios[i] / ratios[i - 1];
    EXPECT_LT(std::max(q, 1.0 / q), 2.0);
  }
}

TEST(Cutoff, IdentityAndZero) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Grid g = Grid::centered_cube(2, 0.1, 1.0);
  GridFunction u(g);
  for (double& v : u.values) v = d(rng);
  EXPECT_EQ(apply_cutoff(u, GridFunction(g, 1.0)).values, u.values);
  for (double v : apply_cutoff(u, GridFunction(g, 0.0)).values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(apply_cutoff(u, GridFunction(g, 1.5)), std::invalid_argument);
}

TEST(Cutoff, LemmaBoundHolds) {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Grid g = Grid::centered_cube(2, 1.0 / 16, 1.0);
  const double width = 0.8;
  GridFunction psi = sample(g, [width](const std::vector<double>& x) {
    return std::max(0.0, 1.0 - std::hypot(x[0], x[1]) / width);
  });
  Kernel k = kernels::fractional(2, 0.5);
  for (int i = 0; i < 20; ++i) {
    GridFunction u(g);
    for (double& v : u.values) v = d(rng);
    double p = i % 2 == 0 ? 1.0 : 2.0;
    LemmaCheck c = cutoff_check(u, psi, 1.0 / width, k, p);
    EXPECT_TRUE(c.holds) << "function " << i;
    GridFunction v = apply_cutoff(u, psi);
    EXPECT_LE(v.lp_norm(p), u.lp_norm(p));
  }
}

TEST(Extend, RestrictsToInput) {
  Grid g(2, 1.0 / 16, {16, 16}, {0.0, 0.0});
  GridFunction u(g, 1.0);
  auto [ext, rep] = extend(u, kernels::fractional(2, 0.5), 1.0);
  GridFunction back(g);
  const long pad = std::lround((g.origin[0] - ext.grid.origin[0]) / g.h);
  long idx[2];
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    long j[2] = {idx[0] + pad, idx[1] + pad};
    EXPECT_EQ(ext.values[ext.grid.ravel(j)], 1.0);
  }
  EXPECT_FALSE(rep.warnings.empty());
  EXPECT_EQ(rep.stages.size(), 3u);
  EXPECT_GT(rep.ratio, 0.0);
}

TEST(Extend, InteriorSupportMatchesZeroExtension) {
  Grid g(2, 1.0 / 16, {16, 16}, {0.0, 0.0});
  GridFunction u = bump(g, {0.5, 0.5}, 0.3, 1.0);
  // The support keeps 0.2 from the boundary; a narrower collar only reflects zeros.
  auto [ext, rep] = extend(u, kernels::fractional(2, 0.5), 1.0, {0.125, true});
  const long pad = std::lround((g.origin[0] - ext.grid.origin[0]) / g.h);
  GridSet v = rasterize(g, Shape::ball(0.35, {0.5, 0.5}));
  GridFunction z = zero_extend(u, full(g), v, pad);
  ASSERT_TRUE(z.grid.same_as(ext.grid));
  EXPECT_EQ(z.values, ext.values);
}

TEST(Extend, RatioStableUnderRefinement) {
  Kernel k = kernels::fractional(2, 0.5);
  std::vector<double> ratios;
  for (int n : {8, 16, 32}) {
    Grid g(2, 1.0 / n, {n, n}, {0.0, 0.0});
    GridFunction u = sample(g, [](const std::vector<double>& x) { return 1.0 + x[0] * x[1]; });
    ratios.push_back(extend(u, k, 1.0, {0.0, true}).second.ratio);
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    double q = ratios[i] / ratios[i - 1];
    EXPECT_LT(std::max(q, 1.0 / q), 2.0);
  }
}

TEST(Extend, ReportJson) {
  Grid g(1, 1.0 / 16, {16}, {0.0});
  auto [ext, rep] = extend(GridFunction(g, 1.0), kernels::fractional(1, 0.5), 2.0);
  nlohmann::json j = rep.to_json();
  for (const char* key : {"lp_in", "semi_in", "lp_out", "semi_out", "ratio", "stages"}) EXPECT_TRUE(j.contains(key)) << key;
}
