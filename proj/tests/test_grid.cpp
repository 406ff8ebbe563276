#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nonloc/grid.hpp"

using namespace nonloc;

namespace {

GridFunction random_function(const Grid& g, std::uint64_t seed) {
  GridFunction u(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : u.values) v = d(rng);
  return u;
}

}  // namespace

TEST(Rasterize, IntervalLength) {
  Grid g = Grid::centered_cube(1, 0.01, 1.0);
  GridSet s = rasterize(g, Shape::ball(0.5, {0.0}));
  EXPECT_NEAR(s.volume(), 1.0, 0.01);
}

TEST(Rasterize, DiscArea) {
  Grid g = Grid::centered_cube(2, 0.02, 1.2);
  GridSet s = rasterize(g, Shape::ball(1.0, {0.0, 0.0}));
  EXPECT_NEAR(s.volume(), std::numbers::pi, 5 * 0.02);
}

TEST(Rasterize, DisjointBoxesAdd) {
  Grid g = Grid::centered_cube(2, 0.05, 2.0);
  Shape a = Shape::box({-1.5, -1.0}, {-0.5, 0.5});
  Shape b = Shape::box({0.25, 0.0}, {1.5, 1.75});
  double va = rasterize(g, a).volume(), vb = rasterize(g, b).volume();
  EXPECT_NEAR(rasterize(g, Shape::union_of({a, b})).volume(), va + vb, 1e-12);
}

TEST(Rasterize, FlagsEmptyResult) {
  Grid g = Grid::centered_cube(1, 0.1, 1.0);
  bool empty = false;
  GridSet s = rasterize(g, Shape::ball(0.01, {5.0}), &empty);
  EXPECT_TRUE(empty);
  EXPECT_EQ(s.count(), 0u);
}

TEST(ForwardDifference, ZeroShift) {
  GridFunction u = random_function(Grid::centered_cube(2, 0.1, 1.0), 1);
  GridFunction du = forward_difference(u, {0, 0});
  for (double v : du.values) EXPECT_EQ(v, 0.0);
}

TEST(ForwardDifference, LinearFunction) {
  Grid g = Grid::centered_cube(1, 0.125, 1.0);
  GridFunction u(g);
  const double a = 3.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x;
    g.center(i, &x);
    u.values[i] = a * x;
  }
  GridFunction du = forward_difference(u, {2});
  for (std::size_t i = 0; i + 2 < g.size(); ++i) EXPECT_NEAR(du.values[i], a * 2 * g.h, 1e-12);
}

TEST(ForwardDifference, MatchesSubtraction) {
  Grid g = Grid::centered_cube(2, 0.1, 0.5);
  GridFunction u = random_function(g, 2);
  GridFunction du = forward_difference(u, {1, 0});
  long idx[2];
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    long j[2] = {idx[0] + 1, idx[1]};
    double partner = g.inside(j) ? u.values[g.ravel(j)] : 0.0;
    EXPECT_EQ(du.values[f], partner - u.values[f]);
  }
}

TEST(Mollify, ConstantUnchangedWithRenormalization) {
  Grid g = Grid::centered_cube(2, 0.05, 0.5);
  GridFunction u(g, 2.5);
  GridFunction m = mollify(u, 0.2, MollifierBoundary::Renormalize);
  for (double v : m.values) EXPECT_NEAR(v, 2.5, 1e-12);
}

TEST(Mollify, IndicatorStaysInRangeAndKeepsMass) {
  Grid g = Grid::centered_cube(1, 0.01, 1.0);
  GridFunction u = GridFunction::indicator(rasterize(g, Shape::ball(0.3, {0.0})));
  GridFunction m = mollify(u, 0.05);
  double before = 0.0, after = 0.0;
  for (double v : u.values) before += v;
  for (double v : m.values) {
    EXPECT_GE(v, -1e-15);
    EXPECT_LE(v, 1.0 + 1e-15);
    after += v;
  }
  EXPECT_NEAR(after, before, 1e-9 * before);
}

TEST(Mollify, RejectsSubCellRadius) {
  GridFunction u(Grid::centered_cube(1, 0.1, 1.0), 1.0);
  EXPECT_THROW(mollify(u, 0.05), std::invalid_argument);
}

TEST(Rearrange, TwoIntervalsBecomeOne) {
  Grid g = Grid::centered_cube(1, 0.01, 2.0);
  GridSet e = rasterize(g, Shape::union_of({Shape::box({-1.5}, {-1.1}), Shape::box({0.4}, {1.0})}));
  GridSet r = rearrange(e);
  EXPECT_EQ(r.count(), e.count());
  EXPECT_NEAR(r.volume(), 1.0, 0.02);
  std::vector<std::size_t> m = r.members();
  EXPECT_EQ(m.back() - m.front() + 1, m.size());
  double lo, hi;
  g.center(m.front(), &lo);
  g.center(m.back(), &hi);
  EXPECT_NEAR(lo + hi, 0.0, g.h + 1e-12);
}

TEST(Rearrange, OffCenterBallMovesToOrigin) {
  Grid g = Grid::centered_cube(2, 0.05, 1.5);
  GridSet e = rasterize(g, Shape::ball(0.4, {0.7, -0.6}));
  GridSet r = rearrange(e);
  EXPECT_EQ(r.count(), e.count());
  double x[2];
  for (std::size_t f : r.members()) {
    g.center(f, x);
    EXPECT_LT(std::hypot(x[0], x[1]), 0.4 + 2 * g.h);
  }
}

TEST(Rearrange, FunctionSortedOntoRanking) {
  Grid g = Grid::centered_cube(2, 0.1, 0.8);
  GridFunction u = random_function(g, 5);
  GridFunction r = rearrange(u);
  std::vector<double> a, b;
  for (double v : u.values) a.push_back(std::abs(v));
  b = r.values;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  std::vector<std::size_t> rank = distance_ranking(g);
  for (std::size_t i = 1; i < rank.size(); ++i) EXPECT_GE(r.values[rank[i - 1]], r.values[rank[i]]);
}

TEST(Mean, Examples) {
  Grid g = Grid::centered_cube(2, 0.1, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  EXPECT_NEAR(mean(GridFunction(g, 1.75), omega), 1.75, 1e-14);
  GridSet e = rasterize(g, Shape::ball(0.5, {0.0, 0.0}));
  EXPECT_NEAR(mean(GridFunction::indicator(e), omega), e.volume() / omega.volume(), 1e-14);
  GridFunction u = random_function(g, 9);
  double s = 0.0;
  for (std::size_t f : omega.members()) s += u.values[f];
  double oracle = s / static_cast<double>(omega.count());
  EXPECT_NEAR(mean(u, omega), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
  EXPECT_THROW(mean(u, GridSet(g)), std::invalid_argument);
}

TEST(GridFiles, RoundTripWithComment) {
  auto dir = std::filesystem::temp_directory_path() / "nonloc_grid_test";
  std::filesystem::create_directories(dir);
  Grid g(2, 0.25, {3, 4}, {-0.5, 1.0});
  GridFunction u = random_function(g, 11);
  std::string text = (dir / "u.grid").string(), bin = (dir / "u.bin").string(), set = (dir / "s.grid").string();
  write_grid(text, u, false, "config_hash=abc seed=1");
  write_grid(bin, u, true);
  GridSet s(g);
  s.cells[2] = s.cells[7] = 1;
  write_grid(set, s, "note");

  std::ifstream in(text);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# config_hash=abc seed=1");

  GridFunction a = read_grid_function(text), b = read_grid_function(bin);
  EXPECT_TRUE(a.grid.same_as(g));
  EXPECT_EQ(b.values, u.values);
  for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_NEAR(a.values[i], u.values[i], 1e-15);
  EXPECT_EQ(read_grid_set(set), s);
  std::filesystem::remove_all(dir);
}
