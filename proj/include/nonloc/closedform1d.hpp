#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonloc/kernel.hpp"

namespace nonloc {

// G' = K and H' = G on (0, inf), with the limits H(0+) and G(+inf).
struct Profile1D {
  std::function<double(double)> G;
  std::function<double(double)> H;
  double G_inf = 0.0;
  double H_zero = 0.0;  // may be +inf
  std::string provenance = "analytic";

  // Same profile with G + g_shift and H + g_shift x + h_shift.
  Profile1D shifted(double g_shift, double h_shift) const;
};

// Analytic when the kernel carries closed-form antiderivatives, otherwise numeric
// (G(x) = -int_x^inf K, H(x) = int_0^inf K(y) (min(y,1) - min(y,x)) dy).
// Throws for non-symmetric kernels, d != 1, or tails that are not integrable.
Profile1D build_profile(const Kernel& k, bool force_numeric = false);

// P_K((-r, r)) = 2 (2 G(inf) r + H(0+) - H(2r)); +inf when H(0+) is infinite.
double interval_perimeter(const Profile1D& profile, double r);

struct CurveReport {
  std::vector<double> radii;
  std::vector<double> perimeter;
  std::vector<double> first_difference;   // P(r_{i+1}) - P(r_i), one per interval
  std::vector<double> second_difference;  // divided second differences, one per interior radius
  bool monotone = true;
  bool concave = true;
  bool c1 = true;
  bool eventually_constant = false;
  double constant_from = 0.0;  // first radius of the constant tail
  std::string verdict;         // "pass", "eventually constant" or "fail"
  nlohmann::json to_json() const;
  // Columns r, perimeter, first_difference, second_difference with units in the header (empty where undefined).
  std::string to_csv() const;
};

CurveReport perimeter_curve_report(const Profile1D& profile, const std::vector<double>& radii, double tol = 1e-9);

}  // namespace nonloc
