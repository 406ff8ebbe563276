#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonloc/closedform1d.hpp"
#include "nonloc/functional.hpp"
#include "nonloc/isoperimetry.hpp"

using namespace nonloc;

namespace {

GridSet random_cells(const Grid& g, std::size_t count, std::uint64_t seed) {
  GridSet s(g);
  std::mt19937_64 rng(seed);
  while (s.count() < count) s.cells[rng() % g.size()] = 1;
  return s;
}

}  // namespace

TEST(BallCurve, FractionalMatchesClosedForm) {
  std::vector<double> radii{0.25, 0.5, 1.0, 1.5};
  BallCurve c = ball_curve(kernels::fractional(1, 0.5), radii, 1.0 / 256);
  EXPECT_EQ(c.verdict, "pass");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double exact = 2.0 * std::pow(2.0 * radii[i], 0.5) / 0.25;
    EXPECT_NEAR(c.perimeter[i], exact, 0.05 * exact);
  }
}

TEST(BallCurve, IndicatorPlateau) {
  std::vector<double> radii;
  for (int i = 1; i <= 12; ++i) radii.push_back(0.125 * i);
  BallCurve c = ball_curve(kernels::indicator(1, 1.0), radii, 1.0 / 64);
  EXPECT_EQ(c.verdict, "pass");
  Profile1D prof = build_profile(kernels::indicator(1, 1.0));
  for (std::size_t i = 0; i < radii.size(); ++i) EXPECT_NEAR(c.perimeter[i], interval_perimeter(prof, radii[i]), 0.02);
  EXPECT_NEAR(c.perimeter.back(), 1.0, 1e-9);
}

TEST(BallCurve, TwoDimensionalZooKernelsMonotone) {
  std::vector<double> radii{0.2, 0.3, 0.4, 0.5};
  for (const Kernel& k : {kernels::gaussian(2, 0.3), kernels::indicator(2, 0.5)}) {
    BallCurve c = ball_curve(k, radii, 1.0 / 32);
    EXPECT_EQ(c.verdict, "pass") << k.family();
  }
}

TEST(BallCurve, CsvHeader) {
  BallCurve c = ball_curve(kernels::gaussian(1, 0.5), {0.5, 1.0}, 1.0 / 32);
  std::string csv = c.to_csv();
  EXPECT_NE(csv.find("r [length]"), std::string::npos);
}

TEST(FirstVariation, OneDimensionalIndicator) {
  FirstVariation fv = first_variation_check(kernels::indicator(1, 1.0), 0.25, 1.0 / 128);
  EXPECT_NEAR(fv.derivative, 2.0, 0.02);
  EXPECT_LT(fv.discrepancy, 0.1);
}

TEST(FirstVariation, PlateauBothSidesVanish) {
  FirstVariation fv = first_variation_check(kernels::indicator(1, 1.0), 0.75, 1.0 / 128);
  EXPECT_NEAR(fv.derivative, 0.0, 1e-9);
  EXPECT_NEAR(fv.surface_sum, 0.0, 1e-9);
}

TEST(FirstVariation, RejectsSingularKernel) {
  EXPECT_THROW(first_variation_check(kernels::fractional(1, 0.5), 0.25, 1.0 / 64), std::invalid_argument);
}

TEST(Counterexample, TruncatedFractional) {
  InequalityReport r = two_ball_counterexample(kernels::fractional(1, 0.5), 1.0, 0.25, {2.0}, 1.0 / 256);
  EXPECT_EQ(r.verdict, "holds");
  EXPECT_NEAR(r.rhs, 2.0, 0.02);
  EXPECT_EQ(r.details["energy_ball"].get<double>(), 0.0);
  EXPECT_GT(r.details["energy_cross"].get<double>(), 0.0);
  EXPECT_NEAR(r.details["cross_lower_bound"].get<double>(), 2.0 * 0.0625 * std::pow(2.25, -1.5), 1e-6);
  EXPECT_LE(r.lhs, 2.0 - 0.018);
}

TEST(Counterexample, Preconditions) {
  Kernel k = kernels::fractional(1, 0.5);
  EXPECT_THROW(two_ball_counterexample(k, 1.0, 0.6, {2.0}, 1.0 / 64), std::invalid_argument);
  EXPECT_THROW(two_ball_counterexample(k, 1.0, 0.25, {0.5}, 1.0 / 64), std::invalid_argument);
}

TEST(Poincare, DisconnectedDomainHasZeroQuotient) {
  Grid g(1, 1.0 / 16, {64}, {0.0});
  GridSet omega = rasterize(g, Shape::union_of({Shape::box({0.0}, {1.0}), Shape::box({3.0}, {4.0})}));
  InequalityReport r = poincare_constant(omega, kernels::indicator(1, 1.0), 1.0, PoincareMode::RayleighMin);
  EXPECT_EQ(r.verdict, "fails");
  EXPECT_TRUE(std::isinf(r.constant));
  EXPECT_LT(r.details["quotient"].get<double>(), 1e-10);
  ASSERT_TRUE(r.witness.has_value());
  const GridFunction& u = *r.witness;
  EXPECT_LT(seminorm(u, kernels::indicator(1, 1.0), 1.0, &omega).value, 1e-10);
}

TEST(Poincare, RemarkBoundAndEstimate) {
  Grid g(1, 1.0 / 32, {32}, {0.0});
  GridSet omega(g);
  std::fill(omega.cells.begin(), omega.cells.end(), 1);
  Kernel k = kernels::indicator(1, 2.0);
  InequalityReport bound = poincare_constant(omega, k, 1.0, PoincareMode::RemarkBound);
  EXPECT_NEAR(bound.constant, 1.0, 1e-12);
  EXPECT_EQ(bound.verdict, "holds");
  InequalityReport est = poincare_constant(omega, k, 1.0, PoincareMode::RayleighMin);
  EXPECT_TRUE(std::isfinite(est.constant));
  EXPECT_LE(est.constant, bound.constant * (1.0 + 1e-9));
  EXPECT_EQ(est.details["label"], "estimate");
}

TEST(Poincare, ConnectedDomainFiniteForP2) {
  Grid g = Grid::centered_cube(2, 0.125, 0.5);
  GridSet omega = rasterize(g, Shape::box({-0.5, -0.5}, {0.5, 0.5}));
  InequalityReport r = poincare_constant(omega, kernels::gaussian(2, 0.3), 2.0, PoincareMode::RayleighMin, 3);
  EXPECT_EQ(r.verdict, "holds");
  EXPECT_TRUE(std::isfinite(r.constant));
  EXPECT_GT(r.constant, 0.0);
}

TEST(Sobolev, FractionalHalfIsConstant) {
  std::vector<double> m{0.1, 0.3, 1.0, 3.0, 10.0};
  InequalityReport r = sobolev_assumption_check(kernels::fractional(1, 0.5), 2.0, m);
  EXPECT_EQ(r.verdict, "holds");
  for (const auto& row : r.details["rows"]) EXPECT_NEAR(row["rho"].get<double>(), 8.0, 0.08);
  EXPECT_NEAR(r.constant, 0.125, 1e-6);
}

TEST(Sobolev, MismatchedExponentFails) {
  std::vector<double> m{0.1, 0.3, 1.0, 3.0, 10.0};
  InequalityReport r = sobolev_assumption_check(kernels::fractional(1, 0.5), 1.5, m);
  EXPECT_EQ(r.verdict, "fails");
}

TEST(Sobolev, CompactLogKernelFails) {
  std::vector<double> m{0.01, 0.1, 0.5, 1.0, 3.0, 10.0};
  InequalityReport r = sobolev_assumption_check(kernels::log_kernel(1, 2.0), 1.5, m);
  EXPECT_EQ(r.verdict, "fails");
}

TEST(Sobolev, RearrangedKernelIsIdentityForRadialDecreasing) {
  Kernel k = kernels::fractional(2, 0.5);
  Kernel r = rearranged_kernel(k, 0.05, 2.0);
  EXPECT_EQ(r.id(), k.id());
}

TEST(RelativeIsoperimetry, CoveringSetHolds) {
  Grid g = Grid::centered_cube(2, 0.1, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.5, -0.5}, {0.5, 0.5}));
  GridSet e = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  InequalityReport r = relative_isoperimetric_check(e, omega, kernels::fractional(2, 0.5), 2.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.verdict, "holds");
}

TEST(RelativeIsoperimetry, HalfSquare) {
  Grid g = Grid::centered_cube(2, 1.0 / 16, 0.5);
  GridSet omega(g);
  std::fill(omega.cells.begin(), omega.cells.end(), 1);
  GridSet e = rasterize(g, Shape::box({-1.0, -1.0}, {0.0, 1.0}));
  InequalityReport r = relative_isoperimetric_check(e, omega, kernels::fractional(2, 0.5), 2.0);
  EXPECT_GT(r.lhs, 0.0);
  EXPECT_GT(r.rhs, 0.0);
  EXPECT_TRUE(std::isfinite(r.constant));
  EXPECT_EQ(r.verdict, "holds");
}

TEST(RelativeIsoperimetry, SuiteStableUnderRefinement) {
  Kernel k = kernels::fractional(2, 0.5);
  std::vector<double> constants;
  for (double h : {1.0 / 8, 1.0 / 16}) {
    Grid g = Grid::centered_cube(2, h, 0.5);
    GridSet omega(g);
    std::fill(omega.cells.begin(), omega.cells.end(), 1);
    constants.push_back(relative_isoperimetric_suite(omega, k, 2.0, 50, 5).constant);
  }
  double q = constants[1] / constants[0];
  EXPECT_LT(std::max(q, 1.0 / q), 2.0);
}

TEST(Optimize, GreedyTraceNonIncreasing) {
  Grid g = Grid::centered_cube(2, 1.0 / 8, 1.0);
  GridSet init = random_cells(g, 30, 4);
  ShapeResult r = optimize(init, kernels::fractional(2, 0.5));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].second, r.trace[i - 1].second);
  EXPECT_LE(r.profile, r.initial);
  EXPECT_EQ(r.best.count(), init.count());
  EXPECT_TRUE(r.converged);
}

TEST(Optimize, GreedyApproachesBall) {
  Grid g = Grid::centered_cube(2, 1.0 / 16, 0.75);
  GridSet init = random_cells(g, 100, 9);
  Kernel k = kernels::fractional(2, 0.5);
  ShapeResult r = optimize(init, k);
  double ball = perimeter(rearrange(init), k).value;
  EXPECT_LE(r.profile, ball * 1.03);
}

TEST(Optimize, AnnealIsSeedDeterministic) {
  Grid g = Grid::centered_cube(2, 1.0 / 8, 1.0);
  GridSet init = random_cells(g, 25, 2);
  OptimizeOptions opt;
  opt.mode = OptimizeOptions::Mode::Anneal;
  opt.seed = 17;
  opt.max_iterations = 400;
  Kernel k = kernels::gaussian(2, 0.4);
  ShapeResult a = optimize(init, k, opt), b = optimize(init, k, opt);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.trace_csv(), b.trace_csv());
  EXPECT_LE(a.profile, a.initial);
  EXPECT_EQ(a.best.count(), init.count());
}

TEST(Optimize, TruncatedKernelEscapesBall) {
  Grid g = Grid::centered_cube(1, 1.0 / 32, 2.0);
  GridSet ball = rasterize(g, Shape::ball(0.25, {0.0}));
  Kernel k = truncate(kernels::fractional(1, 0.5), {Truncation::Mode::OutsideBall, 1.0});
  ShapeResult r = optimize(ball, k);
  EXPECT_LT(r.profile, r.initial - 0.018);
}
