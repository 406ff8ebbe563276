#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonloc/certify.hpp"
#include "nonloc/functional.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/kernel_integral.hpp"
#include "nonloc/kernel_spec.hpp"

using namespace nonloc;

TEST(Kernels, FractionalPointValue) {
  Kernel k = kernels::fractional(1, 0.5);
  EXPECT_NEAR(k.at1(2.0), std::pow(2.0, -1.5), 1e-15);
  EXPECT_NEAR(k.at1(-2.0), std::pow(2.0, -1.5), 1e-15);
  EXPECT_TRUE(std::isinf(k.at1(0.0)));
  EXPECT_EQ(k.singular_set(), SingularSet::Origin);
}

TEST(Kernels, SingleFractionalPieceMatchesFractional) {
  Kernel a = kernels::fractional(2, 0.3);
  Kernel b = kernels::piecewise_fractional(2, {1.0}, {0.3}, {});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> z{u(rng), u(rng)};
    EXPECT_DOUBLE_EQ(a.at(z), b.at(z));
  }
}

TEST(Kernels, LogKernelUnitGamma) {
  Kernel k = kernels::log_kernel(1, 1.0);
  EXPECT_NEAR(k.at1(0.1), 10.0, 1e-12);
  EXPECT_NEAR(k.at1(-0.25), 4.0, 1e-12);
  EXPECT_EQ(k.at1(1.0 / 3.0), 0.0);
  EXPECT_EQ(k.at1(0.5), 0.0);
}

TEST(Kernels, SymmetrizeOneSidedExponential) {
  Kernel k = symmetrize(kernels::one_sided_exponential());
  EXPECT_TRUE(k.symmetric());
  for (double z : {-3.0, -0.5, 0.2, 1.0, 4.0}) EXPECT_NEAR(k.at1(z), 0.5 * std::exp(-std::abs(z)), 1e-15);
}

TEST(Kernels, SymmetrizeFixesSymmetricKernels) {
  Kernel k = kernels::gaussian(2, 0.7);
  Kernel s = symmetrize(k);
  for (double x : {-1.0, 0.3, 2.0})
    for (double y : {-0.4, 0.9}) EXPECT_EQ(k.at({x, y}), s.at({x, y}));
}

TEST(Kernels, SymmetrizeIdempotent) {
  Kernel once = symmetrize(kernels::modulated_fractional(1, 0.5, 1.0, 1.0, 2.0, 3.0));
  Kernel twice = symmetrize(once);
  for (double z : {-2.0, -0.3, 0.1, 0.7, 5.0}) EXPECT_DOUBLE_EQ(once.at1(z), twice.at1(z));
}

TEST(Kernels, SymmetrizedSeminormUnchanged) {
  Kernel k = kernels::one_sided_exponential(2.0);
  Kernel s = symmetrize(k);
  Grid g = Grid::centered_cube(1, 0.05, 1.0);
  GridFunction u(g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (double& v : u.values) v = n(rng);
  double a = seminorm(u, k, 1.0).value;
  double b = seminorm(u, s, 1.0).value;
  EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Kernels, TruncateOutsideBall) {
  Kernel k = truncate(kernels::fractional(1, 0.5), {Truncation::Mode::OutsideBall, 1.0});
  EXPECT_EQ(k.at1(0.5), 0.0);
  EXPECT_NEAR(k.at1(2.0), std::pow(2.0, -1.5), 1e-15);
  IntegralResult mass = kernel_integral(k, Region::all());
  EXPECT_FALSE(mass.infinite);
  EXPECT_NEAR(mass.value, 4.0, 1e-6);
}

TEST(Kernels, CapKeepsSmallValues) {
  Kernel base = kernels::fractional(1, 0.5);
  Kernel k = truncate(base, {Truncation::Mode::Cap, 10.0});
  EXPECT_EQ(k.at1(2.0), base.at1(2.0));
  EXPECT_EQ(k.at1(1e-3), 10.0);
}

TEST(Kernels, IntegralExamples) {
  Kernel k = kernels::fractional(1, 0.5);
  IntegralResult tail = kernel_integral(k, Region::tail(1.0));
  EXPECT_NEAR(tail.value, 4.0, 0.04);
  IntegralResult nts = kernel_integral(k, Region::all(), Weight::min_pow(1.0));
  EXPECT_NEAR(nts.value, 8.0, 0.08);
  IntegralResult ind = kernel_integral(kernels::indicator(1, 1.0), Region::all());
  EXPECT_NEAR(ind.value, 2.0, 1e-12);
  EXPECT_TRUE(kernel_integral(k, Region::all()).infinite);
}

TEST(Kernels, TailIntegralNonIncreasing) {
  for (const Kernel& k : {kernels::fractional(2, 0.4), kernels::gaussian(1, 0.5), kernels::indicator(2, 1.5)}) {
    double prev = kernel_integral(k, Region::tail(0.05)).value;
    for (double r : {0.1, 0.3, 0.9, 1.4, 3.0}) {
      double v = kernel_integral(k, Region::tail(r)).value;
      EXPECT_LE(v, prev * (1.0 + 1e-9)) << k.family() << " r=" << r;
      prev = v;
    }
  }
}

TEST(Certify, FractionalDecreasing) {
  Kernel k = kernels::fractional(2, 0.5);
  CertificateReport r = certify(k, Hypothesis::Dec, Norm::euclidean());
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_GE(r.constants["c0"].get<double>(), 1.0 - 1e-9);
}

TEST(Certify, OscillatingDecConstant) {
  Kernel k = kernels::oscillating(1, 0.5, 1.0, 3.0, 4);
  CertificateReport r = certify(k, Hypothesis::Dec, Norm::euclidean());
  EXPECT_EQ(r.verdict, Verdict::Holds);
  double c0 = r.constants["c0"].get<double>();
  EXPECT_GE(c0, 0.5 - 1e-6);
  EXPECT_LE(c0, 1.0);
}

TEST(Certify, ModulatedDecAtLeastRatio) {
  Kernel k = kernels::modulated_fractional(2, 0.5, 1.0, 1.0, 4.0, 5.0);
  CertificateReport r = certify(k, Hypothesis::Dec, Norm::euclidean());
  EXPECT_GE(r.constants["c0"].get<double>(), 0.25 - 1e-3);
}

TEST(Certify, IndicatorIsIntegrable) {
  CertificateReport r = certify(kernels::indicator(2, 1.0), Hypothesis::Nint, Norm::euclidean());
  EXPECT_EQ(r.verdict, Verdict::Fails);
  EXPECT_FALSE(r.witnesses.empty());
}

TEST(Certify, DoublingConstant) {
  SamplingConfig cfg;
  cfg.doubling_radius = 1.0;
  CertificateReport r = certify(kernels::fractional(1, 0.5), Hypothesis::Dou, Norm::euclidean(), cfg);
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_NEAR(r.constants["C_D"].get<double>(), std::pow(2.0, 1.5), 1e-9);
}

TEST(Certify, SameSeedSameReport) {
  Kernel k = kernels::oscillating(2, 0.3, 1.0, 2.0, 3);
  EXPECT_EQ(certify(k, Hypothesis::Dec, Norm::euclidean()).to_json().dump(),
            certify(k, Hypothesis::Dec, Norm::euclidean()).to_json().dump());
}

TEST(KernelSpec, ParsesFamilyAndTransforms) {
  Kernel k = construct_from_text("family = fractional\ndimension = 1\ns = 0.5\noutside_ball = 1\n");
  EXPECT_EQ(k.at1(0.5), 0.0);
  EXPECT_NEAR(k.at1(4.0), std::pow(4.0, -1.5), 1e-15);
}

TEST(KernelSpec, ReportsLineOfBadValue) {
  try {
    construct_from_text("family = fractional\ndimension = 1\ns = abc\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(KernelSpec, RejectsOutOfRangeParameters) {
  EXPECT_THROW(construct_from_text("family = fractional\ndimension = 1\ns = 1.5\n"), std::exception);
}
