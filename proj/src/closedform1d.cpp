#include "nonloc/closedform1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nonloc/kernel_integral.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Profile1D Profile1D::shifted(double g_shift, double h_shift) const {
  Profile1D p = *this;
  auto G0 = G;
  auto H0 = H;
  p.G = [G0, g_shift](double x) { return G0(x) + g_shift; };
  p.H = [H0, g_shift, h_shift](double x) { return H0(x) + g_shift * x + h_shift; };
  p.G_inf = G_inf + g_shift;
  p.H_zero = H_zero + h_shift;
  return p;
}

Profile1D build_profile(const Kernel& k, bool force_numeric) {
  if (k.dim() != 1) throw std::invalid_argument("profiles are one-dimensional");
  if (!k.symmetric()) throw std::invalid_argument("profile needs a symmetric kernel");
  IntegralResult far = kernel_integral(k, Region::tail(1e-3));
  if (far.infinite) throw std::invalid_argument("kernel tail is not integrable; G(+inf) would be infinite");

  Profile1D p;
  if (const Antiderivatives* a = k.antiderivatives(); a && !force_numeric) {
    if (!std::isfinite(a->G_inf)) throw std::invalid_argument("kernel tail is not integrable; G(+inf) would be infinite");
    p.G = a->G;
    p.H = a->H;
    p.G_inf = a->G_inf;
    p.H_zero = a->H_zero;
    p.provenance = "analytic";
    return p;
  }

  const std::vector<double> breaks = k.radial_breaks();
  auto K = [k](double y) { return k.at1(y); };
  auto tail = [K, breaks](double x) {
    quad::Estimate e = radial_integral(K, x, kInf, breaks);
    return e.infinite ? kInf : e.value;
  };
  p.G = [tail](double x) { return -tail(x); };
  p.H = [K, breaks, tail](double x) {
    if (x < 1.0) {
      auto ramp = [&](double y) { return K(y) * (y - x); };
      return radial_integral(ramp, x, 1.0, breaks).value + (1.0 - x) * tail(1.0);
    }
    auto ramp = [&](double y) { return K(y) * (1.0 - y); };
    return radial_integral(ramp, 1.0, x, breaks).value + (1.0 - x) * tail(x);
  };
  p.G_inf = 0.0;
  std::vector<double> b1 = breaks;
  b1.push_back(1.0);
  quad::Estimate h0 = radial_integral([K](double y) { return K(y) * std::min(y, 1.0); }, 0.0, kInf, b1);
  p.H_zero = h0.infinite ? kInf : h0.value;
  p.provenance = "numeric";
  return p;
}

double interval_perimeter(const Profile1D& profile, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!std::isfinite(profile.H_zero)) return kInf;
  return 2.0 * (2.0 * profile.G_inf * r + profile.H_zero - profile.H(2.0 * r));
}

CurveReport perimeter_curve_report(const Profile1D& profile, const std::vector<double>& radii, double tol) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must be strictly increasing");
  CurveReport c;
  c.radii = radii;
  for (double r : radii) c.perimeter.push_back(interval_perimeter(profile, r));
  const std::size_t n = radii.size();
  double scale = 0.0;
  for (double v : c.perimeter) scale = std::max(scale, std::abs(v));
  std::vector<double> slope;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double dp = c.perimeter[i + 1] - c.perimeter[i];
    c.first_difference.push_back(dp);
    slope.push_back(dp / (radii[i + 1] - radii[i]));
    if (dp < -tol * std::max(scale, 1.0)) c.monotone = false;
  }
  double slope_scale = 0.0;
  for (double m : slope) slope_scale = std::max(slope_scale, std::abs(m));
  const double stol = tol * std::max(slope_scale, 1.0);
  for (std::size_t i = 1; i < slope.size(); ++i) {
    c.second_difference.push_back(2.0 * (slope[i] - slope[i - 1]) / (radii[i + 1] - radii[i - 1]));
    if (slope[i] > slope[i - 1] + stol) c.concave = false;
  }
  // A derivative jump shows up as a slope change far larger than its neighbours'.
  for (std::size_t i = 1; i < slope.size(); ++i) {
    double jump = std::abs(slope[i] - slope[i - 1]);
    double around = 0.0;
    if (i >= 2) around = std::max(around, std::abs(slope[i - 1] - slope[i - 2]));
    if (i + 1 < slope.size()) around = std::max(around, std::abs(slope[i + 1] - slope[i]));
    if (slope.size() >= 3 && jump > 4.0 * around + 0.05 * slope_scale + stol) c.c1 = false;
  }
  if (n >= 2) {
    std::size_t from = n - 1;
    while (from > 0 && std::abs(c.perimeter[from - 1] - c.perimeter[n - 1]) <= tol * std::max(scale, 1.0)) --from;
    if (from + 1 < n) {
      c.eventually_constant = true;
      c.constant_from = radii[from];
    }
  }
  if (!(c.monotone && c.concave)) c.verdict = "fail";
  else c.verdict = c.eventually_constant ? "eventually constant" : "pass";
  return c;
}

nlohmann::json CurveReport::to_json() const {
  nlohmann::json j;
  j["radii"] = radii;
  j["perimeter"] = perimeter;
  j["monotone"] = monotone;
  j["concave"] = concave;
  j["c1"] = c1;
  j["eventually_constant"] = eventually_constant;
  if (eventually_constant) j["constant_from"] = constant_from;
  j["verdict"] = verdict;
  return j;
}

std::string CurveReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "r [length],perimeter [kernel mass x length],first_difference [same as perimeter],second_difference [perimeter per length^2]\n";
  for (std::size_t i = 0; i < radii.size(); ++i) {
    os << radii[i] << ',' << perimeter[i] << ',';
    if (i < first_difference.size()) os << first_difference[i];
    os << ',';
    if (i >= 1 && i - 1 < second_difference.size()) os << second_difference[i - 1];
    os << '\n';
  }
  return os.str();
}

}  // namespace nonloc
