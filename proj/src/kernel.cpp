#include "nonloc/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_common(int d, const Norm& norm) {
  require(d >= 1, "kernel dimension must be positive");
  norm.check_dimension(d);
}

// Integral of c t^-a over [u, v], 0 <= u <= v <= inf.
double power_mass(double c, double a, double u, double v) {
  if (c == 0.0 || v <= u) return 0.0;
  if (a == 1.0) return c * std::log(v / u);
  double vu = std::isinf(v) ? 0.0 : std::pow(v, 1.0 - a);
  double uu = (u == 0.0) ? 0.0 : std::pow(u, 1.0 - a);
  if (u == 0.0 && a > 1.0) return kInf;
  if (std::isinf(v) && a < 1.0) return kInf;
  return c * (vu - uu) / (1.0 - a);
}

// Integral of c t^(1-a) over [u, v].
double power_moment(double c, double a, double u, double v) {
  return power_mass(c, a - 1.0, u, v);
}

}  // namespace

Kernel::Kernel(KernelData data) {
  if (!data.eval) throw std::invalid_argument("kernel needs an evaluator");
  if (data.d == 1 && !data.pieces.empty() && data.symmetric && !data.anti)
    data.anti = piecewise_antiderivatives(data.pieces);
  data.id = next_id();
  data_ = std::make_shared<const KernelData>(std::move(data));
}

nlohmann::json Kernel::to_json() const {
  nlohmann::json j;
  j["family"] = data_->family;
  j["dimension"] = data_->d;
  j["norm"] = data_->norm.describe();
  j["params"] = data_->params;
  j["lists"] = data_->lists;
  j["transforms"] = data_->transforms;
  j["symmetric"] = data_->symmetric;
  j["support_radius"] = std::isinf(data_->support) ? nlohmann::json("inf") : nlohmann::json(data_->support);
  const char* sing = data_->singular == SingularSet::None ? "none"
                     : data_->singular == SingularSet::Origin ? "origin"
                                                              : "points";
  j["singular_set"] = sing;
  if (!data_->points.empty()) j["singular_points"] = data_->points;
  return j;
}

Antiderivatives piecewise_antiderivatives(const std::vector<PowerPiece>& pieces_in) {
  require(!pieces_in.empty(), "no pieces");
  auto pieces = std::make_shared<std::vector<PowerPiece>>(pieces_in);
  auto mass = [pieces](double u, double v) {
    double sign = 1.0;
    if (v < u) {
      std::swap(u, v);
      sign = -1.0;
    }
    double m = 0.0;
    for (const auto& p : *pieces) {
      double lo = std::max(u, p.lo), hi = std::min(v, p.hi);
      if (hi > lo) m += power_mass(p.coeff, p.exponent, lo, hi);
    }
    return sign * m;
  };
  auto moment = [pieces](double u, double v) {
    double sign = 1.0;
    if (v < u) {
      std::swap(u, v);
      sign = -1.0;
    }
    double m = 0.0;
    for (const auto& p : *pieces) {
      double lo = std::max(u, p.lo), hi = std::min(v, p.hi);
      if (hi > lo) m += power_moment(p.coeff, p.exponent, lo, hi);
    }
    return sign * m;
  };
  const PowerPiece& first = pieces->front();
  const PowerPiece& last = pieces->back();
  double a0 = first.coeff == 0.0 ? 0.0 : first.exponent;
  bool integrable0 = a0 < 1.0;
  bool moment0 = a0 < 2.0;
  bool tail_finite = std::isfinite(last.hi) || last.coeff == 0.0 || last.exponent > 1.0;

  Antiderivatives out;
  if (integrable0) {
    out.G = [mass](double x) { return mass(0.0, x); };
    out.G_inf = tail_finite ? mass(0.0, kInf) : kInf;
  } else if (tail_finite) {
    out.G = [mass](double x) { return -mass(x, kInf); };
    out.G_inf = 0.0;
  } else {
    out.G = [mass](double x) { return mass(1.0, x); };
    out.G_inf = kInf;
  }
  auto G = out.G;
  if (moment0) {
    out.H = [G, moment](double x) { return x > 0.0 ? x * G(x) - moment(0.0, x) : 0.0; };
    out.H_zero = 0.0;
  } else {
    double g1 = G(1.0);
    out.H = [G, moment, g1](double x) { return x * G(x) - g1 - moment(1.0, x); };
    out.H_zero = kInf;
  }
  return out;
}

namespace kernels {

namespace {

// Fills radial metadata when the norm is a multiple of the euclidean norm.
void set_radial(KernelData& k, std::function<double(double)> profile_in_norm,
                const std::vector<PowerPiece>& pieces_in_norm, const std::vector<double>& breaks_in_norm) {
  auto factor = k.norm.euclidean_factor(k.d);
  if (!factor) return;
  double lam = *factor;
  k.radial = [profile_in_norm, lam](double r) { return profile_in_norm(lam * r); };
  for (double b : breaks_in_norm) k.breaks.push_back(b / lam);
  for (const auto& p : pieces_in_norm)
    k.pieces.push_back({p.lo / lam, p.hi / lam, p.coeff * std::pow(lam, -p.exponent), p.exponent});
}

double support_from_norm(const Norm& norm, int d, double radius_in_norm) {
  return radius_in_norm / norm.equivalence(d).first;
}

}  // namespace

Kernel power(int d, double a, const Norm& norm) {
  check_common(d, norm);
  require(a > 0.0, "power kernel needs a positive exponent");
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, a, norm](const double* z) {
    double r = norm(z, d);
    return r == 0.0 ? kInf : std::pow(r, -a);
  };
  k.singular = SingularSet::Origin;
  k.homogeneity = a;
  k.nonincreasing = true;
  k.dec_c0 = 1.0;
  set_radial(k, [a](double t) { return t == 0.0 ? kInf : std::pow(t, -a); }, {{0.0, kInf, 1.0, a}}, {});
  k.family = "power";
  k.params = {{"exponent", a}};
  return Kernel(std::move(k));
}

Kernel fractional(int d, double s, double p, const Norm& norm) {
  require(s > 0.0 && s < 1.0, "fractional kernel needs 0 < s < 1");
  require(p >= 1.0, "fractional kernel needs p >= 1");
  Kernel base = power(d, d + s * p, norm);
  KernelData k = base.data();
  k.family = "fractional";
  k.params = {{"s", s}, {"p", p}};
  k.anti.reset();
  return Kernel(std::move(k));
}

Kernel piecewise_fractional(int d, const std::vector<double>& alphas, const std::vector<double>& s,
                            const std::vector<double>& radii, double p, const Norm& norm) {
  check_common(d, norm);
  const std::size_t M = alphas.size();
  require(M >= 1, "piecewise kernel needs at least one piece");
  require(s.size() == M, "piecewise kernel needs one exponent s_k per piece");
  require(radii.size() == M - 1 || radii.size() == M, "piecewise kernel needs M-1 (or M) radii");
  require(p >= 1.0, "piecewise kernel needs p >= 1");
  require(alphas[0] > 0.0, "piecewise kernel needs alpha_1 > 0");
  for (std::size_t k = 0; k < M; ++k) {
    require(alphas[k] >= 0.0, "piecewise kernel needs alpha_k >= 0");
    require(s[k] > 0.0 && s[k] < 1.0, "piecewise kernel needs 0 < s_k < 1");
    if (k > 0) {
      require(alphas[k] <= alphas[k - 1], "piecewise kernel: alpha_k sequence must be non-increasing");
      require(s[k] >= s[k - 1], "piecewise kernel: s_k sequence must be non-decreasing");
    }
  }
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require(k > 0 || radii[0] >= 1.0, "piecewise kernel needs R_1 >= 1");
    require(k == 0 || radii[k] > radii[k - 1], "piecewise kernel radii must increase strictly");
  }
  std::vector<double> R(radii.begin(), radii.begin() + static_cast<long>(M - 1));
  std::vector<double> a(M);
  for (std::size_t k = 0; k < M; ++k) a[k] = d + s[k] * p;
  auto profile = [R, a, alphas](double t) {
    if (t == 0.0) return kInf;
    std::size_t k = 0;
    while (k < R.size() && t > R[k]) ++k;
    return alphas[k] * std::pow(t, -a[k]);
  };
  std::vector<PowerPiece> pieces;
  for (std::size_t k = 0; k < M; ++k) {
    double lo = k == 0 ? 0.0 : R[k - 1];
    double hi = k + 1 == M ? kInf : R[k];
    pieces.push_back({lo, hi, alphas[k], a[k]});
  }
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, profile](const double* z) { return profile(norm(z, d)); };
  k.singular = SingularSet::Origin;
  if (M == 1 && alphas[0] == 1.0) k.homogeneity = a[0];
  k.nonincreasing = true;
  k.dec_c0 = 1.0;
  set_radial(k, profile, pieces, R);
  k.family = "piecewise-fractional";
  k.params = {{"p", p}};
  k.lists = {{"alphas", alphas}, {"s", s}, {"radii", R}};
  return Kernel(std::move(k));
}

Kernel log_fractional(int d, double s, double alpha, const Norm& norm) {
  check_common(d, norm);
  require(s >= 0.0 && s < 1.0, "log-fractional kernel needs 0 <= s < 1");
  auto profile = [d, s, alpha](double t) {
    if (t == 0.0) return kInf;
    if (t > 1.0) return 0.0;
    return std::pow(1.0 - std::log(t), -alpha) * std::pow(t, -d - s);
  };
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, profile](const double* z) { return profile(norm(z, d)); };
  k.singular = SingularSet::Origin;
  k.support = support_from_norm(norm, d, 1.0);
  k.nonincreasing = alpha <= d + s;
  if (alpha <= 0.0) k.dec_c0 = 1.0;
  set_radial(k, profile, {}, {1.0});
  k.family = "log-fractional";
  k.params = {{"s", s}, {"alpha", alpha}};
  return Kernel(std::move(k));
}

Kernel oscillating(int d, double s, double alpha, double beta, int M, const Norm& norm) {
  check_common(d, norm);
  require(s > 0.0 && s < 1.0, "oscillating kernel needs 0 < s < 1");
  require(alpha > 0.0 && alpha < beta, "oscillating kernel needs 0 < alpha < beta");
  require(M >= 1, "oscillating kernel needs M >= 1");
  const double Mm = M;
  auto profile = [d, s, alpha, beta, Mm](double t) {
    if (t == 0.0) return kInf;
    if (t <= 1.0) return beta * std::pow(t, -d - s);
    if (t <= Mm) return alpha * std::sin(2.0 * std::numbers::pi * t) + beta;
    return beta * std::pow(t - Mm + 1.0, -d - s);
  };
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, profile](const double* z) { return profile(norm(z, d)); };
  k.singular = SingularSet::Origin;
  k.dec_c0 = (beta - alpha) / (alpha + beta);
  set_radial(k, profile, {}, {1.0, Mm});
  k.family = "oscillating";
  k.params = {{"s", s}, {"alpha", alpha}, {"beta", beta}, {"M", Mm}};
  return Kernel(std::move(k));
}

Kernel log_kernel(int d, double gamma) {
  require(d >= 1, "kernel dimension must be positive");
  require(gamma > 0.0, "log kernel needs gamma > 0");
  constexpr double cut = 1.0 / 3.0;
  auto profile = [d, gamma](double t) {
    if (t == 0.0) return kInf;
    if (t >= cut) return 0.0;
    return std::pow(t, -d) * std::pow(-std::log(t), gamma - 1.0);
  };
  KernelData k;
  k.d = d;
  k.norm = Norm::euclidean();
  k.eval = [d, profile](const double* z) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += z[i] * z[i];
    return profile(std::sqrt(s));
  };
  k.radial = profile;
  k.breaks = {cut};
  k.singular = SingularSet::Origin;
  k.support = cut;
  k.nonincreasing = true;
  if (d == 1) {
    const double l3 = std::pow(std::log(3.0), gamma);
    Antiderivatives a;
    a.G = [gamma, l3](double x) {
      if (x >= cut) return 0.0;
      return -(std::pow(-std::log(x), gamma) - l3) / gamma;
    };
    auto Hsmall = [gamma, l3](double x) {
      if (x <= 0.0) return 0.0;
      return -(boost::math::tgamma(gamma + 1.0, -std::log(x)) - x * l3) / gamma;
    };
    const double Hcut = Hsmall(cut);
    a.H = [Hsmall, Hcut](double x) { return x >= cut ? Hcut : Hsmall(x); };
    a.G_inf = 0.0;
    a.H_zero = 0.0;
    k.anti = a;
  }
  k.family = "log";
  k.params = {{"gamma", gamma}};
  return Kernel(std::move(k));
}

Kernel indicator(int d, double radius, const Norm& norm) {
  check_common(d, norm);
  require(radius > 0.0, "indicator kernel needs a positive radius");
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, radius](const double* z) { return norm(z, d) < radius ? 1.0 : 0.0; };
  k.support = support_from_norm(norm, d, radius);
  k.bound = 1.0;
  k.nonincreasing = true;
  set_radial(k, [radius](double t) { return t < radius ? 1.0 : 0.0; }, {{0.0, radius, 1.0, 0.0}}, {radius});
  k.family = "indicator";
  k.params = {{"radius", radius}};
  return Kernel(std::move(k));
}

Kernel gaussian(int d, double sigma, double amplitude, const Norm& norm) {
  check_common(d, norm);
  require(sigma > 0.0 && amplitude > 0.0, "gaussian kernel needs sigma > 0 and amplitude > 0");
  auto profile = [sigma, amplitude](double t) { return amplitude * std::exp(-t * t / (2.0 * sigma * sigma)); };
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, profile](const double* z) { return profile(norm(z, d)); };
  k.bound = amplitude;
  k.nonincreasing = true;
  set_radial(k, profile, {}, {});
  if (d == 1) {
    double lam = *norm.euclidean_factor(1);
    double se = sigma / lam;
    double c = amplitude * se * std::sqrt(std::numbers::pi / 2.0);
    Antiderivatives a;
    a.G = [c, se](double x) { return c * std::erf(x / (se * std::numbers::sqrt2)); };
    a.H = [c, se, amplitude](double x) {
      return x * c * std::erf(x / (se * std::numbers::sqrt2)) -
             amplitude * se * se * (-std::expm1(-x * x / (2.0 * se * se)));
    };
    a.G_inf = c;
    a.H_zero = 0.0;
    k.anti = a;
  }
  k.family = "gaussian";
  k.params = {{"sigma", sigma}, {"amplitude", amplitude}};
  return Kernel(std::move(k));
}

Kernel one_sided_exponential(double rate) {
  require(rate > 0.0, "exponential kernel needs a positive rate");
  KernelData k;
  k.d = 1;
  k.eval = [rate](const double* z) { return z[0] > 0.0 ? std::exp(-rate * z[0]) : 0.0; };
  k.symmetric = false;
  k.bound = 1.0;
  k.family = "one-sided-exponential";
  k.params = {{"rate", rate}};
  return Kernel(std::move(k));
}

Kernel modulated_fractional(int d, double s, double p, double alpha, double beta, double freq, const Norm& norm) {
  check_common(d, norm);
  require(s > 0.0 && s < 1.0, "modulated kernel needs 0 < s < 1");
  require(p >= 1.0, "modulated kernel needs p >= 1");
  require(alpha > 0.0 && alpha < beta, "modulated kernel needs 0 < alpha < beta");
  const double a = d + s * p;
  KernelData k;
  k.d = d;
  k.norm = norm;
  k.eval = [d, norm, a, alpha, beta, freq](const double* z) {
    double r = norm(z, d);
    if (r == 0.0) return kInf;
    double phi = alpha + (beta - alpha) * 0.5 * (1.0 + std::sin(freq * z[0]));
    return std::pow(r, -a) * phi;
  };
  k.singular = SingularSet::Origin;
  k.symmetric = false;
  k.dec_c0 = alpha / beta;
  k.family = "modulated-fractional";
  k.params = {{"s", s}, {"p", p}, {"alpha", alpha}, {"beta", beta}, {"frequency", freq}};
  return Kernel(std::move(k));
}

Kernel shifted_singular(int d, double offset, double exponent, double radius) {
  require(d >= 1, "kernel dimension must be positive");
  require(offset > 0.0 && exponent > 0.0 && radius > 0.0 && radius < offset,
          "shifted-singular kernel needs 0 < radius < offset and exponent > 0");
  KernelData k;
  k.d = d;
  k.eval = [d, offset, exponent, radius](const double* z) {
    double total = 0.0;
    for (double sign : {1.0, -1.0}) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double c = i == 0 ? z[i] - sign * offset : z[i];
        s += c * c;
      }
      double v = std::sqrt(s);
      if (v < radius) total += v == 0.0 ? kInf : std::pow(v, -exponent);
    }
    return total;
  };
  k.singular = SingularSet::Points;
  std::vector<double> plus(d, 0.0), minus(d, 0.0);
  plus[0] = offset;
  minus[0] = -offset;
  k.points = {plus, minus};
  k.support = offset + radius;
  k.family = "shifted-singular";
  k.params = {{"offset", offset}, {"exponent", exponent}, {"radius", radius}};
  return Kernel(std::move(k));
}

Kernel tabulated_radial(int d, const std::vector<double>& radii, const std::vector<double>& values,
                        double tail_exponent) {
  require(d >= 1, "kernel dimension must be positive");
  require(radii.size() >= 2 && radii.size() == values.size(), "tabulated kernel needs matching radii/values");
  for (std::size_t i = 1; i < radii.size(); ++i) require(radii[i] > radii[i - 1], "radii must increase");
  require(radii[0] > 0.0, "tabulated radii must be positive");
  for (double v : values) require(v >= 0.0 && std::isfinite(v), "tabulated values must be finite and >= 0");
  auto r = std::make_shared<std::vector<double>>(radii);
  auto v = std::make_shared<std::vector<double>>(values);
  auto profile = [r, v, tail_exponent](double t) {
    const auto& R = *r;
    const auto& V = *v;
    if (t <= R.front()) return V.front();
    if (t >= R.back()) return V.back() == 0.0 ? 0.0 : V.back() * std::pow(t / R.back(), -tail_exponent);
    auto it = std::upper_bound(R.begin(), R.end(), t);
    std::size_t i = static_cast<std::size_t>(it - R.begin());
    double w = (t - R[i - 1]) / (R[i] - R[i - 1]);
    return (1.0 - w) * V[i - 1] + w * V[i];
  };
  KernelData k;
  k.d = d;
  k.eval = [d, profile](const double* z) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += z[i] * z[i];
    return profile(std::sqrt(s));
  };
  k.radial = profile;
  k.breaks = radii;
  k.bound = *std::max_element(values.begin(), values.end());
  k.nonincreasing = std::is_sorted(values.rbegin(), values.rend());
  k.family = "tabulated-radial";
  k.params = {{"tail_exponent", tail_exponent}};
  k.lists = {{"radii", radii}, {"values", values}};
  return Kernel(std::move(k));
}

}  // namespace kernels

Kernel symmetrize(const Kernel& in) {
  if (in.symmetric()) return in;
  const KernelData& b = in.data();
  KernelData k;
  k.d = b.d;
  k.norm = b.norm;
  const int d = b.d;
  k.eval = [in, d](const double* z) {
    double neg[8];
    std::vector<double> big;
    double* m = neg;
    if (d > 8) {
      big.resize(d);
      m = big.data();
    }
    for (int i = 0; i < d; ++i) m[i] = -z[i];
    return 0.5 * (in(z) + in(m));
  };
  k.singular = b.singular;
  k.points = b.points;
  for (const auto& p : b.points) {
    std::vector<double> q(p);
    for (double& x : q) x = -x;
    if (std::find(k.points.begin(), k.points.end(), q) == k.points.end()) k.points.push_back(q);
  }
  k.support = b.support;
  k.symmetric = true;
  k.homogeneity = b.homogeneity;
  k.bound = b.bound;
  k.family = b.family;
  k.params = b.params;
  k.lists = b.lists;
  k.transforms = b.transforms;
  k.transforms.push_back("symmetrize");
  return Kernel(std::move(k));
}

Kernel truncate(const Kernel& in, const Truncation& t) {
  require(t.value > 0.0, "truncation parameter must be positive");
  const KernelData& b = in.data();
  KernelData k;
  k.d = b.d;
  k.norm = b.norm;
  k.symmetric = b.symmetric;
  k.family = b.family;
  k.params = b.params;
  k.lists = b.lists;
  k.transforms = b.transforms;
  k.support = b.support;
  const int d = b.d;
  const double v = t.value;
  if (t.mode == Truncation::Mode::OutsideBall || t.mode == Truncation::Mode::ExcludeBall) {
    k.eval = [in, d, v](const double* z) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += z[i] * z[i];
      return s < v * v ? 0.0 : in(z);
    };
    for (const auto& p : b.points) {
      double s = 0.0;
      for (double x : p) s += x * x;
      if (s >= v * v) k.points.push_back(p);
    }
    k.singular = b.singular == SingularSet::Points && !k.points.empty() ? SingularSet::Points : SingularSet::None;
    k.bound = b.bound;
    if (b.radial) {
      auto prof = b.radial;
      k.radial = [prof, v](double r) { return r < v ? 0.0 : prof(r); };
      k.breaks = b.breaks;
      k.breaks.push_back(v);
      std::sort(k.breaks.begin(), k.breaks.end());
      if (!b.pieces.empty()) {
        k.pieces.push_back({0.0, v, 0.0, 0.0});
        for (auto p : b.pieces) {
          if (p.hi <= v) continue;
          p.lo = std::max(p.lo, v);
          k.pieces.push_back(p);
        }
      }
    }
    if (d == 1 && b.pieces.empty() && b.anti && b.symmetric) {
      const Antiderivatives base = *b.anti;
      double Gd = base.G(v), Hd = base.H(v);
      Antiderivatives a;
      a.G = [base, v, Gd](double x) { return x < v ? 0.0 : base.G(x) - Gd; };
      a.H = [base, v, Gd, Hd](double x) { return x < v ? 0.0 : base.H(x) - Hd - (x - v) * Gd; };
      a.G_inf = base.G_inf - Gd;
      a.H_zero = 0.0;
      k.anti = a;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%.17g",
                  t.mode == Truncation::Mode::OutsideBall ? "outside_ball" : "exclude_ball", v);
    k.transforms.push_back(buf);
  } else {
    k.eval = [in, v](const double* z) { return std::min(v, in(z)); };
    k.singular = SingularSet::None;
    k.bound = b.bound ? std::min(*b.bound, v) : v;
    k.nonincreasing = b.nonincreasing;
    if (b.radial) {
      auto prof = b.radial;
      k.radial = [prof, v](double r) { return std::min(v, prof(r)); };
      k.breaks = b.breaks;
    }
    bool monotone_pieces = !b.pieces.empty();
    for (const auto& p : b.pieces)
      if (p.exponent < 0.0 || p.coeff < 0.0) monotone_pieces = false;
    if (monotone_pieces) {
      for (const auto& p : b.pieces) {
        if (p.coeff == 0.0 || p.exponent == 0.0) {
          k.pieces.push_back({p.lo, p.hi, std::min(p.coeff, v), 0.0});
          continue;
        }
        double rc = std::pow(p.coeff / v, 1.0 / p.exponent);  // coeff rc^-a = v
        if (rc <= p.lo) {
          k.pieces.push_back(p);
        } else if (rc >= p.hi) {
          k.pieces.push_back({p.lo, p.hi, v, 0.0});
        } else {
          k.pieces.push_back({p.lo, rc, v, 0.0});
          k.pieces.push_back({rc, p.hi, p.coeff, p.exponent});
        }
      }
      if (b.radial) {
        for (const auto& p : k.pieces) k.breaks.push_back(p.lo);
        std::sort(k.breaks.begin(), k.breaks.end());
        k.breaks.erase(std::unique(k.breaks.begin(), k.breaks.end()), k.breaks.end());
      }
    } else if (d == 1 && b.anti && b.radial && b.nonincreasing && b.symmetric) {
      // Crossing radius where the profile drops below the cap.
      auto prof = b.radial;
      double lo = 0.0, hi = 1.0;
      while (prof(hi) > v && hi < 1e12) hi *= 2.0;
      if (prof(hi) > v) {
        hi = kInf;
      } else {
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          if (prof(mid) > v) lo = mid; else hi = mid;
        }
      }
      const double rho = hi;
      if (std::isfinite(rho) && rho > 0.0) {
        const Antiderivatives base = *b.anti;
        double Gr = base.G(rho), Hr = base.H(rho);
        Antiderivatives a;
        a.G = [base, rho, v, Gr](double x) { return x < rho ? v * x : v * rho + base.G(x) - Gr; };
        a.H = [base, rho, v, Gr, Hr](double x) {
          if (x < rho) return 0.5 * v * x * x;
          return 0.5 * v * rho * rho + v * rho * (x - rho) + base.H(x) - Hr - Gr * (x - rho);
        };
        a.G_inf = v * rho + base.G_inf - Gr;
        a.H_zero = 0.0;
        k.anti = a;
        k.breaks.push_back(rho);
        std::sort(k.breaks.begin(), k.breaks.end());
      } else if (rho == 0.0) {
        k.anti = b.anti;
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "cap:%.17g", v);
    k.transforms.push_back(buf);
  }
  return Kernel(std::move(k));
}

}  // namespace nonloc
