// Randomized invariant checks. Each property runs over a fixed set of seeds.
#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonloc/closedform1d.hpp"
#include "nonloc/extension.hpp"
#include "nonloc/functional.hpp"
#include "nonloc/grid.hpp"

using namespace nonloc;

namespace {

constexpr int kTrials = 12;

GridFunction random_function(const Grid& g, std::mt19937_64& rng) {
  GridFunction u(g);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : u.values) v = d(rng);
  return u;
}

// Values that are small multiples of 1/8, so sums and integer scalings are exact.
GridFunction dyadic_function(const Grid& g, std::mt19937_64& rng) {
  GridFunction u(g);
  for (double& v : u.values) v = static_cast<double>(static_cast<long>(rng() % 33) - 16) / 8.0;
  return u;
}

GridSet random_set(const Grid& g, std::mt19937_64& rng, double fill) {
  GridSet s(g);
  std::bernoulli_distribution b(fill);
  for (auto& c : s.cells) c = b(rng) ? 1 : 0;
  return s;
}

GridSet random_boxes(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> c(lo, hi), w(0.05, 0.4);
  std::vector<Shape> parts;
  int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    std::vector<double> a(g.d), b(g.d);
    for (int k = 0; k < g.d; ++k) {
      a[k] = c(rng);
      b[k] = a[k] + w(rng);
    }
    parts.push_back(Shape::box(a, b));
  }
  return rasterize(g, Shape::union_of(parts));
}

std::vector<Kernel> zoo(int d) {
  std::vector<Kernel> ks{kernels::fractional(d, 0.5), kernels::gaussian(d, 0.3), kernels::indicator(d, 0.4),
                         kernels::oscillating(d, 0.4, 1.0, 2.0, 3)};
  if (d == 1) ks.push_back(kernels::one_sided_exponential(3.0));
  return ks;
}

}  // namespace

TEST(Properties, SeminormInvariantUnderSymmetrization) {
  std::mt19937_64 rng(101);
  for (int d : {1, 2}) {
    Grid g = Grid::centered_cube(d, d == 1 ? 1.0 / 32 : 1.0 / 8, 0.75);
    for (const Kernel& k : zoo(d)) {
      Kernel ks = symmetrize(k);
      for (int t = 0; t < 3; ++t) {
        GridFunction u = random_function(g, rng);
        double a = seminorm(u, k, 1.0).value, b = seminorm(u, ks, 1.0).value;
        EXPECT_NEAR(a, b, 1e-12 * std::max(a, 1.0)) << k.family();
      }
    }
  }
}

TEST(Properties, SeminormNonNegative) {
  std::mt19937_64 rng(102);
  Grid g = Grid::centered_cube(2, 1.0 / 8, 0.75);
  for (const Kernel& k : zoo(2))
    for (double p : {1.0, 2.0, 3.0}) EXPECT_GE(seminorm(random_function(g, rng), k, p).value, 0.0);
}

TEST(Properties, PerimeterTranslationInvariant) {
  std::mt19937_64 rng(103);
  Grid g = Grid::centered_cube(2, 1.0 / 16, 1.0);
  Kernel k = kernels::fractional(2, 0.5);
  WeightTable w(k, g.h, full_extent(g));
  for (int t = 0; t < kTrials; ++t) {
    GridSet e = random_boxes(g, rng, -0.8, 0.2);
    long sx = static_cast<long>(rng() % 5), sy = static_cast<long>(rng() % 5);
    GridSet moved(g);
    long idx[2];
    for (std::size_t f : e.members()) {
      g.unravel(f, idx);
      idx[0] += sx;
      idx[1] += sy;
      ASSERT_TRUE(g.inside(idx));
      moved.cells[g.ravel(idx)] = 1;
    }
    double a = perimeter(e, w).value, b = perimeter(moved, w).value;
    EXPECT_NEAR(a, b, 1e-12 * a);
  }
}

TEST(Properties, EnergyMonotoneUnderInclusion) {
  std::mt19937_64 rng(104);
  Grid g = Grid::centered_cube(2, 1.0 / 12, 1.0);
  Kernel k = kernels::gaussian(2, 0.4);
  WeightTable w(k, g.h, full_extent(g), Scheme{}, true);
  for (int t = 0; t < kTrials; ++t) {
    GridSet small = random_set(g, rng, 0.3);
    GridSet big = small.unite(random_set(g, rng, 0.2));
    EXPECT_LE(interaction_energy(small, w, EnergyMethod::Direct).value,
              interaction_energy(big, w, EnergyMethod::Direct).value);
  }
}

TEST(Properties, DirectAndFftEnergiesAgree) {
  std::mt19937_64 rng(105);
  Grid g = Grid::centered_cube(2, 1.0 / 16, 1.0);
  Kernel k = truncate(kernels::fractional(2, 0.3), {Truncation::Mode::Cap, 20.0});
  WeightTable w(k, g.h, full_extent(g), Scheme{}, true);
  for (int t = 0; t < kTrials; ++t) {
    GridSet e = random_set(g, rng, 0.4);
    double a = interaction_energy(e, w, EnergyMethod::Direct).value;
    double b = interaction_energy(e, w, EnergyMethod::Fft).value;
    EXPECT_NEAR(a, b, 1e-8 * a);
  }
}

TEST(Properties, ForwardDifferenceLinear) {
  std::mt19937_64 rng(106);
  Grid g = Grid::centered_cube(2, 0.1, 0.6);
  for (int t = 0; t < kTrials; ++t) {
    GridFunction u = dyadic_function(g, rng), v = dyadic_function(g, rng);
    double a = static_cast<double>(rng() % 7) - 3.0, b = static_cast<double>(rng() % 7) - 3.0;
    std::vector<long> shift{static_cast<long>(rng() % 5) - 2, static_cast<long>(rng() % 5) - 2};
    GridFunction mix(g);
    for (std::size_t i = 0; i < g.size(); ++i) mix.values[i] = a * u.values[i] + b * v.values[i];
    GridFunction lhs = forward_difference(mix, shift);
    GridFunction du = forward_difference(u, shift), dv = forward_difference(v, shift);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(lhs.values[i], a * du.values[i] + b * dv.values[i]);
  }
}

TEST(Properties, RearrangementPreservesCountsAndIsIdempotent) {
  std::mt19937_64 rng(107);
  for (int d : {1, 2, 3}) {
    Grid g = Grid::centered_cube(d, d == 3 ? 0.25 : 0.1, 1.0);
    for (int t = 0; t < 4; ++t) {
      GridSet e = random_set(g, rng, 0.3);
      GridSet r = rearrange(e);
      EXPECT_EQ(r.count(), e.count());
      EXPECT_EQ(rearrange(r), r);
      GridFunction u = random_function(g, rng);
      std::vector<double> a, b = rearrange(u).values;
      for (double v : u.values) a.push_back(std::abs(v));
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Properties, RearrangementDoesNotIncreasePerimeter) {
  std::mt19937_64 rng(108);
  Grid g = Grid::centered_cube(2, 1.0 / 32, 1.0);
  Kernel k = kernels::fractional(2, 0.5);
  WeightTable w(k, g.h, full_extent(g));
  for (int t = 0; t < kTrials; ++t) {
    GridSet e = random_boxes(g, rng, -0.9, 0.5);
    EXPECT_LE(perimeter(rearrange(e), w).value, perimeter(e, w).value * 1.03);
  }
}

TEST(Properties, MollifierStaysWithinRange) {
  std::mt19937_64 rng(109);
  Grid g = Grid::centered_cube(2, 0.05, 0.5);
  for (int t = 0; t < kTrials; ++t) {
    GridFunction u = random_function(g, rng);
    double lo = *std::min_element(u.values.begin(), u.values.end());
    double hi = *std::max_element(u.values.begin(), u.values.end());
    GridFunction m = mollify(u, 0.05 + 0.05 * (t % 4), MollifierBoundary::Renormalize);
    for (double v : m.values) {
      EXPECT_GE(v, lo - 1e-12);
      EXPECT_LE(v, hi + 1e-12);
    }
  }
}

TEST(Properties, MollifierContractsSeminorm) {
  std::mt19937_64 rng(110);
  Grid g = Grid::centered_cube(1, 1.0 / 64, 1.0);
  Kernel k = kernels::fractional(1, 0.5);
  WeightTable w(k, g.h, full_extent(g));
  for (int t = 0; t < kTrials; ++t) {
    GridFunction u = random_function(g, rng);
    GridFunction m = mollify(u, 2.0 * g.h * (1 + t % 3));
    for (double p : {1.0, 2.0}) EXPECT_LE(seminorm(m, w, p).value, seminorm(u, w, p).value * (1.0 + 1e-8));
  }
}

TEST(Properties, IntervalCurveMonotoneConcave) {
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> s(0.05, 0.95);
  std::vector<double> radii;
  for (int i = 1; i <= 30; ++i) radii.push_back(0.2 * i);
  for (int t = 0; t < kTrials; ++t) {
    CurveReport c = perimeter_curve_report(build_profile(kernels::fractional(1, s(rng))), radii);
    EXPECT_TRUE(c.monotone);
    EXPECT_TRUE(c.concave);
  }
  for (const Kernel& k : {kernels::gaussian(1, 0.7), kernels::indicator(1, 1.3), kernels::log_kernel(1, 1.5)}) {
    CurveReport c = perimeter_curve_report(build_profile(k), radii);
    EXPECT_TRUE(c.monotone) << k.family();
    EXPECT_TRUE(c.concave) << k.family();
  }
}

TEST(Properties, ExtensionRestrictsToInput) {
  std::mt19937_64 rng(112);
  Kernel k = kernels::fractional(2, 0.5);
  for (int t = 0; t < 4; ++t) {
    Grid g(2, 1.0 / 8, {8 + static_cast<long>(rng() % 4), 8}, {0.0, 0.0});
    GridFunction u = random_function(g, rng);
    GridFunction ext = extend(u, k, 1.0).first;
    const long pad = std::lround((g.origin[0] - ext.grid.origin[0]) / g.h);
    long idx[2];
    for (std::size_t f = 0; f < g.size(); ++f) {
      g.unravel(f, idx);
      long j[2] = {idx[0] + pad, idx[1] + pad};
      EXPECT_EQ(ext.values[ext.grid.ravel(j)], u.values[f]);
    }
  }
}

TEST(Properties, ZeroExtensionPreservesLp) {
  std::mt19937_64 rng(113);
  Grid g = Grid::centered_cube(2, 0.1, 1.0);
  GridSet omega = rasterize(g, Shape::box({-0.8, -0.8}, {0.8, 0.8}));
  GridSet v = rasterize(g, Shape::box({-0.5, -0.5}, {0.5, 0.5}));
  for (int t = 0; t < kTrials; ++t) {
    GridFunction u = random_function(g, rng);
    for (std::size_t f = 0; f < g.size(); ++f)
      if (!v.cells[f]) u.values[f] = 0.0;
    GridFunction ext = zero_extend(u, omega, v, 2);
    EXPECT_EQ(ext.lp_norm(1.0), u.lp_norm(1.0));
    EXPECT_EQ(ext.lp_norm(2.0), u.lp_norm(2.0));
  }
}
