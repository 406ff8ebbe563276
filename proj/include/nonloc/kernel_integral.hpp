#pragma once

#include <vector>

#include "nonloc/kernel.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

// Integration regions, measured in the euclidean norm.
struct Region {
  enum class Kind { All, Tail, Ball, Annulus, OutsideCube, OutsideBox };
  Kind kind = Kind::All;
  double inner = 0.0;  // tail / annulus inner radius, cube half-width
  double outer = 0.0;  // ball / annulus outer radius
  std::vector<double> half;  // box half-widths per axis

  static Region all() { return {Kind::All, 0.0, 0.0, {}}; }
  static Region tail(double r) { return {Kind::Tail, r, 0.0, {}}; }
  static Region ball(double r) { return {Kind::Ball, 0.0, r, {}}; }
  static Region annulus(double r, double R) { return {Kind::Annulus, r, R, {}}; }
  // Complement of the cube [-a, a]^d.
  static Region outside_cube(double a) { return {Kind::OutsideCube, a, 0.0, {}}; }
  // Complement of the box [-half_1, half_1] x ... x [-half_d, half_d].
  static Region outside_box(std::vector<double> half) { return {Kind::OutsideBox, 0.0, 0.0, std::move(half)}; }
};

// weight(z) = 1, or min(1, |z|_2^p) when p > 0.
struct Weight {
  double p = 0.0;
  static Weight one() { return {0.0}; }
  static Weight min_pow(double p) { return {p}; }
  double operator()(double r) const { return p > 0.0 ? std::min(1.0, std::pow(r, p)) : 1.0; }
};

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
  bool infinite = false;      // divergence detected
  bool inconclusive = false;  // budget exhausted; value is partial
};

// Integral of K * weight over the region; +inf sentinel when the escalation or stall rule fires.
IntegralResult kernel_integral(const Kernel& k, const Region& region, const Weight& weight = {},
                               const quad::ShellOptions& opt = {});

// Integral over [lo, hi] (0 <= lo < hi <= inf) of a non-negative radial integrand phi(r).
// Splits at the radius carrying the most mass per octave, then sums dyadic shells in both
// directions under the divergence rules.
quad::Estimate radial_integral(const quad::Fn1& phi, double lo, double hi, const std::vector<double>& breaks,
                               const quad::ShellOptions& opt = {});

// Integral of K over the euclidean annulus r < |z - center| < R.
IntegralResult annulus_around(const Kernel& k, const std::vector<double>& center, double r, double R,
                              const quad::ShellOptions& opt = {});

// Surface area of the unit sphere in R^d (2 for d = 1).
double sphere_area(int d);

}  // namespace nonloc
