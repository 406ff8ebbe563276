#include "nonloc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "nonloc/kernel_integral.hpp"
#include "nonloc/parallel.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool has_1d_closed_form(const Kernel& k) { return k.dim() == 1 && k.symmetric() && k.antiderivatives(); }

double weight_1d(const Kernel& k, double h, long s) {
  if (has_1d_closed_form(k)) {
    const Antiderivatives& a = *k.antiderivatives();
    long m = std::labs(s);
    auto H = [&](double x) { return x <= 0.0 ? a.H_zero : a.H(x); };
    if (m == 0) {
      double g0 = a.G(0.0);
      double v = 2.0 * (a.H(h) - a.H_zero - h * g0);
      return std::isfinite(v) ? v : kInf;
    }
    double lo = H((m - 1) * h);
    if (!std::isfinite(lo)) return kInf;
    return H((m + 1) * h) - 2.0 * H(m * h) + lo;
  }
  // Tent-weighted integral on both halves of the support of the tent around s h.
  const double c = s * h;
  // Points next to a singular endpoint may overflow K while the tent factor underflows; their
  // contribution is negligible.
  auto tent = [&](double u, double w) {
    double v = k.at1(u);
    return std::isinf(v) && w < 1e-100 ? 0.0 : v * w;
  };
  auto left = [&](double u) { return tent(u, u - (c - h)); };
  auto right = [&](double u) { return tent(u, (c + h) - u); };
  quad::Estimate a = quad::tanh_sinh(left, c - h, c, 1e-11);
  quad::Estimate b = quad::tanh_sinh(right, c, c + h, 1e-11);
  if (a.infinite || b.infinite) return kInf;
  return a.value + b.value;
}

double weight_nd(const Kernel& k, double h, const std::vector<long>& s) {
  const int d = k.dim();
  double total = 0.0;
  std::vector<double> lo(d), hi(d);
  for (int mask = 0; mask < (1 << d); ++mask) {
    for (int i = 0; i < d; ++i) {
      if (mask & (1 << i)) {
        lo[i] = 0.0;
        hi[i] = h;
      } else {
        lo[i] = -h;
        hi[i] = 0.0;
      }
    }
    auto f = [&](const double* t) {
      double z[8];
      std::vector<double> big;
      double* zp = z;
      if (d > 8) {
        big.resize(d);
        zp = big.data();
      }
      double tent = 1.0;
      for (int i = 0; i < d; ++i) {
        zp[i] = s[i] * h + t[i];
        tent *= h - std::abs(t[i]);
      }
      return k(zp) * tent;
    };
    double scale = std::pow(h, 2 * d);
    quad::Estimate e = quad::cubature(f, d, lo.data(), hi.data(), 1e-15 * scale, 1e-10, 3'000'000);
    if (e.infinite) return kInf;
    total += e.value;
  }
  return total;
}

// Cell-pair weight for a radial kernel whose profile jumps at some of `jumps`: the tent
// integral is split into spherical shells between jumps and each shell is integrated by
// nested one-dimensional rules whose limits follow the spheres. Needs the origin outside the
// support box of the tent.
double weight_by_shells(const Kernel& k, double h, const std::vector<long>& s, const std::vector<double>& jumps) {
  const int d = k.dim();
  double rmin2 = 0.0, rmax2 = 0.0;
  for (int i = 0; i < d; ++i) {
    double lo = s[i] * h - h, hi = s[i] * h + h;
    double n = lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0);
    double f = std::max(std::abs(lo), std::abs(hi));
    rmin2 += n * n;
    rmax2 += f * f;
  }
  std::vector<double> radii{std::sqrt(rmin2)};
  for (double b : jumps)
    if (b > radii.front() && b * b < rmax2) radii.push_back(b);
  std::sort(radii.begin(), radii.end());
  radii.push_back(std::sqrt(rmax2) * (1.0 + 1e-12));

  double total = 0.0;
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
    const double ra = radii[j], rb = radii[j + 1];
    std::function<double(int, double)> level = [&](int i, double sq) -> double {
      const double c = s[i] * h;
      const double rb2 = rb * rb - sq;
      if (rb2 <= 0.0) return 0.0;
      const double rbq = std::sqrt(rb2);
      const double ra2 = ra * ra - sq;
      const double raq = ra2 > 0.0 ? std::sqrt(ra2) : 0.0;
      auto g = [&](double t) {
        double w = h - std::abs(t - c);
        if (w <= 0.0) return 0.0;
        double q = sq + t * t;
        if (i == d - 1) return w * k.radial(std::sqrt(q));
        return w * level(i + 1, q);
      };
      const double lo = std::max(c - h, -rbq), hi = std::min(c + h, rbq);
      if (!(hi > lo)) return 0.0;
      std::vector<double> br{c};
      if (i == d - 1 && ra2 > 0.0) {
        double v = 0.0;
        double a1 = lo, b1 = std::min(hi, -raq);
        if (b1 > a1) v += quad::gauss_kronrod(g, a1, b1, 1e-11, br).value;
        double a2 = std::max(lo, raq), b2 = hi;
        if (b2 > a2) v += quad::gauss_kronrod(g, a2, b2, 1e-11, br).value;
        return v;
      }
      if (ra2 > 0.0) {
        br.push_back(-raq);
        br.push_back(raq);
      }
      // The inner integral kinks where a sphere meets a tent breakpoint of the next axis.
      if (i + 1 < d) {
        const double cn = s[i + 1] * h;
        for (double v : {cn - h, cn, cn + h})
          for (double r2 : {rb2, ra2}) {
            double t2 = r2 - v * v;
            if (t2 > 0.0) {
              br.push_back(std::sqrt(t2));
              br.push_back(-std::sqrt(t2));
            }
          }
      }
      return quad::gauss_kronrod(g, lo, hi, 1e-10, br).value;
    };
    total += level(0, 0.0);
  }
  return total;
}

// Per-kernel cache of unit-spacing quantities for homogeneous kernels.
struct HomogeneousCache {
  std::mutex mu;
  std::map<std::pair<std::uint64_t, std::vector<long>>, double> weights;
  std::map<std::uint64_t, double> outside_unit_cube;
};

HomogeneousCache& cache() {
  static HomogeneousCache c;
  return c;
}

std::vector<long> canonical(const Kernel& k, std::vector<long> s) {
  if (k.is_radial()) {
    for (long& v : s) v = std::labs(v);
    std::sort(s.begin(), s.end());
  } else if (k.symmetric()) {
    // s and -s share a weight; keep the lexicographically larger one.
    std::vector<long> m(s);
    for (long& v : m) v = -v;
    if (m > s) s = m;
  }
  return s;
}

double outside_cube_mass(const Kernel& k, double a) {
  if (auto hom = k.homogeneity()) {
    double unit;
    {
      std::lock_guard<std::mutex> lock(cache().mu);
      auto it = cache().outside_unit_cube.find(k.id());
      if (it != cache().outside_unit_cube.end()) {
        unit = it->second;
        return unit * std::pow(a, k.dim() - *hom);
      }
    }
    IntegralResult r = kernel_integral(k, Region::outside_cube(1.0));
    unit = r.infinite ? kInf : r.value;
    std::lock_guard<std::mutex> lock(cache().mu);
    cache().outside_unit_cube[k.id()] = unit;
    return unit * std::pow(a, k.dim() - *hom);
  }
  IntegralResult r = kernel_integral(k, Region::outside_cube(a));
  return r.infinite ? kInf : r.value;
}

}  // namespace

double cell_pair_weight(const Kernel& k, double h, const std::vector<long>& s) {
  if (static_cast<int>(s.size()) != k.dim()) throw std::invalid_argument("offset has wrong dimension");
  if (k.dim() == 1) return weight_1d(k, h, s[0]);
  auto hom = k.homogeneity();
  if (!hom) return weight_nd(k, h, s);
  auto key = std::make_pair(k.id(), canonical(k, s));
  const double scale = std::pow(h, 2 * k.dim() - *hom);
  {
    std::lock_guard<std::mutex> lock(cache().mu);
    auto it = cache().weights.find(key);
    if (it != cache().weights.end()) return it->second * scale;
  }
  double unit = weight_nd(k, 1.0, key.second);
  std::lock_guard<std::mutex> lock(cache().mu);
  cache().weights[key] = unit;
  return unit * scale;
}

double weight_beyond(const Kernel& k, double h, long L) {
  const int d = k.dim();
  if (d == 1) {
    if (has_1d_closed_form(k)) {
      const Antiderivatives& a = *k.antiderivatives();
      if (!std::isfinite(a.G_inf)) return kInf;
      double lo = L == 0 ? a.H_zero : a.H(L * h);
      return 2.0 * (h * a.G_inf - (a.H((L + 1) * h) - lo));
    }
    double total = 0.0;
    for (double sign : {1.0, -1.0}) {
      const double a0 = L * h;
      auto ramp = [&](double z) { return k.at1(sign * z) * (z - a0); };
      quad::Estimate r = quad::tanh_sinh(ramp, a0, a0 + h, 1e-11);
      quad::Estimate t = radial_integral([&](double z) { return k.at1(sign * z); }, a0 + h, kInf, k.radial_breaks());
      if (r.infinite || t.infinite) return kInf;
      total += r.value + h * t.value;
    }
    return total;
  }
  // Beyond the window the tent sum is h^d outside the cube of half-width (L + 1/2) h, up to a
  // one-cell ramp around it; use the cube.
  double m = outside_cube_mass(k, (L + 0.5) * h);
  return std::isfinite(m) ? std::pow(h, d) * m : kInf;
}

WeightTable::WeightTable(const Kernel& k, double h, long extent, const Scheme& scheme, bool with_diagonal)
    : k_(k), d_(k.dim()), h_(h), L_(extent), scheme_(scheme), diagonal_(with_diagonal) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (extent < 0) throw std::invalid_argument("window extent must be non-negative");
  std::size_t n = 1;
  for (int i = 0; i < d_; ++i) n *= static_cast<std::size_t>(side());
  w_.assign(n, 0.0);
  const std::size_t centre = flat(std::vector<long>(d_, 0).data());
  if (d_ > 1 && scheme.near == Scheme::NearField::CellPairCorrection && k.is_radial()) {
    std::vector<double> cand = k.radial_breaks();
    if (std::isfinite(k.support_radius())) cand.push_back(k.support_radius());
    for (double b : cand) {
      double in = k.radial(b * (1.0 - 1e-9)), out = k.radial(b * (1.0 + 1e-9));
      if (std::abs(in - out) > 1e-6 * std::max(std::abs(in), std::abs(out))) jumps_.push_back(b);
    }
  }

  parallel_blocks(n, 4096, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<long> s(d_);
    for (std::size_t i = b; i < e; ++i) {
      if (i == centre) continue;
      offset(i, s.data());
      if (exact(s.data())) continue;
      w_[i] = midpoint(s.data());
    }
  });
  // Exact weights, computed once per symmetry class.
  std::vector<std::size_t> exact_list;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == centre) continue;
    std::vector<long> s(d_);
    offset(i, s.data());
    if (exact(s.data())) exact_list.push_back(i);
  }
  if (with_diagonal) exact_list.push_back(centre);
  std::map<std::vector<long>, std::size_t> cls;
  std::vector<std::vector<long>> keys;
  std::vector<std::size_t> key_of(exact_list.size());
  for (std::size_t j = 0; j < exact_list.size(); ++j) {
    std::vector<long> s(d_);
    offset(exact_list[j], s.data());
    auto key = canonical(k, s);
    auto it = cls.find(key);
    if (it == cls.end()) {
      it = cls.emplace(key, keys.size()).first;
      keys.push_back(key);
    }
    key_of[j] = it->second;
  }
  std::vector<double> vals(keys.size());
  parallel_blocks(keys.size(), 1, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      bool origin_outside = false;
      for (long v : keys[i]) origin_outside = origin_outside || std::labs(v) >= 2;
      if (d_ > 1 && !jumps_.empty() && origin_outside) vals[i] = weight_by_shells(k, h, keys[i], jumps_);
      else vals[i] = cell_pair_weight(k, h, keys[i]);
    }
  });
  for (std::size_t j = 0; j < exact_list.size(); ++j) w_[exact_list[j]] = vals[key_of[j]];

  for (double v : w_)
    if (!std::isfinite(v)) infinite_ = true;
  if (scheme.tail_compensation) beyond_ = weight_beyond(k, h, L_);

  order_.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != centre) order_.push_back(i);
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return shell(a) < shell(b); });
}

std::size_t WeightTable::flat(const long* s) const {
  std::size_t f = 0;
  for (int i = 0; i < d_; ++i) f = f * static_cast<std::size_t>(side()) + static_cast<std::size_t>(s[i] + L_);
  return f;
}

void WeightTable::offset(std::size_t f, long* s) const {
  for (int i = d_ - 1; i >= 0; --i) {
    s[i] = static_cast<long>(f % static_cast<std::size_t>(side())) - L_;
    f /= static_cast<std::size_t>(side());
  }
}

long WeightTable::shell(std::size_t f) const {
  std::vector<long> s(d_);
  offset(f, s.data());
  long m = 0;
  for (long v : s) m = std::max(m, std::labs(v));
  return m;
}

double WeightTable::midpoint(const long* s) const {
  double z[8];
  std::vector<double> big;
  double* zp = z;
  if (d_ > 8) {
    big.resize(d_);
    zp = big.data();
  }
  for (int i = 0; i < d_; ++i) zp[i] = s[i] * h_;
  return k_(zp) * std::pow(h_, 2 * d_);
}

bool WeightTable::exact(const long* s) const {
  if (scheme_.near != Scheme::NearField::CellPairCorrection) return false;
  if (d_ == 1) return true;
  if (near(s)) return true;
  if (jumps_.empty()) return false;
  double r2 = 0.0;
  for (int i = 0; i < d_; ++i) r2 += static_cast<double>(s[i] * s[i]);
  const double r = std::sqrt(r2) * h_, reach = std::sqrt(static_cast<double>(d_)) * h_;
  for (double b : jumps_)
    if (std::abs(r - b) <= reach) return true;
  return false;
}

bool WeightTable::near(const long* s) const {
  for (int i = 0; i < d_; ++i)
    if (std::labs(s[i]) > scheme_.near_cells) return false;
  return true;
}

}  // namespace nonloc
