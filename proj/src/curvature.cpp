#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nonloc/functional.hpp"
#include "nonloc/kernel_integral.hpp"
#include "nonloc/parallel.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of K(x - y) over y in the cell [lo, hi], skipping |y - x| <= eps.
class CellIntegrator {
 public:
  CellIntegrator(const Kernel& k, std::vector<double> x) : k_(k), x_(std::move(x)), d_(k.dim()) {}

  // Mass of K over z in [a, b] (1D closed form), with (-eps, eps) removed.
  double exact_1d(double lo, double hi, double eps) const {
    const Antiderivatives& an = *k_.antiderivatives();
    double a = x_[0] - hi, b = x_[0] - lo;
    auto piece = [&](double p, double q) {
      if (!(q > p)) return 0.0;
      if (p >= 0.0) return an.G(q) - an.G(p);
      return an.G(-p) - an.G(-q);
    };
    return piece(a, std::min(b, -eps)) + piece(std::max(a, eps), b);
  }

  double gauss(const double* lo, const double* hi) const {
    std::vector<double> z(d_);
    auto f = [&](const double* y) {
      for (int i = 0; i < d_; ++i) z[i] = x_[i] - y[i];
      return k_(z.data());
    };
    return quad::tensor_gauss(f, d_, lo, hi, d_ >= 3 ? 4 : 6);
  }

  double adaptive(const double* lo, const double* hi, double eps) const {
    std::vector<double> z(d_);
    const double eps2 = eps * eps;
    auto f = [&](const double* y) {
      double r2 = 0.0;
      for (int i = 0; i < d_; ++i) {
        z[i] = x_[i] - y[i];
        r2 += z[i] * z[i];
      }
      if (r2 <= eps2) return 0.0;
      return k_(z.data());
    };
    quad::Estimate e = quad::cubature(f, d_, lo, hi, 0.0, 1e-7, 60'000);
    return e.value;
  }

  // Euclidean distance from x to the cell and the farthest point of the cell.
  std::pair<double, double> distance_range(const double* lo, const double* hi) const {
    double near = 0.0, far = 0.0;
    for (int i = 0; i < d_; ++i) {
      double a = lo[i] - x_[i], b = hi[i] - x_[i];
      double n = (a > 0.0) ? a : (b < 0.0 ? -b : 0.0);
      double f = std::max(std::abs(a), std::abs(b));
      near += n * n;
      far += f * f;
    }
    return {std::sqrt(near), std::sqrt(far)};
  }

  // True when x - cell contains a singular point or a support discontinuity of K.
  bool rough(const double* lo, const double* hi, double margin) const {
    if (k_.singular_set() == SingularSet::Points) {
      for (const auto& q : k_.singular_points()) {
        bool in = true;
        for (int i = 0; i < d_; ++i) {
          double zlo = x_[i] - hi[i] - margin, zhi = x_[i] - lo[i] + margin;
          if (q[i] < zlo || q[i] > zhi) in = false;
        }
        if (in) return true;
      }
    }
    auto [n, f] = distance_range(lo, hi);
    for (double b : k_.radial_breaks())
      if (b >= n && b <= f) return true;
    if (std::isfinite(k_.support_radius()) && k_.support_radius() >= n && k_.support_radius() <= f) return true;
    return false;
  }

  double cell(const double* lo, const double* hi, double eps, double near_band) const {
    if (d_ == 1 && k_.symmetric() && k_.antiderivatives()) return exact_1d(lo[0], hi[0], eps);
    auto [n, f] = distance_range(lo, hi);
    if (std::isfinite(k_.support_radius()) && n >= k_.support_radius()) return 0.0;
    if (f <= eps) return 0.0;
    if (n < eps + near_band || rough(lo, hi, 0.0)) return adaptive(lo, hi, eps);
    return gauss(lo, hi);
  }

 private:
  Kernel k_;
  std::vector<double> x_;
  int d_;
};

}  // namespace

nlohmann::json CurvatureResult::to_json() const {
  nlohmann::json j;
  j["value"] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json("inf");
  j["error"] = error;
  j["eps"] = eps;
  nlohmann::json it = nlohmann::json::array();
  for (double v : iterates) it.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"));
  j["iterates"] = it;
  j["inconclusive"] = inconclusive;
  return j;
}

CurvatureResult curvature(const GridSet& e, const std::vector<double>& x_in, const Kernel& k,
                          const CurvatureOptions& opt) {
  const Grid& g = e.grid;
  const int d = g.d;
  const double h = g.h;
  if (k.dim() != d || static_cast<int>(x_in.size()) != d) throw std::invalid_argument("dimension mismatch");

  // Snap to the half-cell lattice so the reflection about x maps cells to cells.
  std::vector<long> m(d);
  std::vector<double> x(d);
  for (int i = 0; i < d; ++i) {
    m[i] = std::lround((x_in[i] - g.origin[i]) / (0.5 * h));
    x[i] = g.origin[i] + 0.5 * h * static_cast<double>(m[i]);
  }

  const double eps0 = opt.eps0 > 0.0 ? opt.eps0 : 16.0 * h;
  if (eps0 < h * (1.0 - 1e-12)) throw std::invalid_argument("eps0 must be at least one cell");
  std::vector<double> schedule;
  for (double eps = eps0; eps >= h * (1.0 - 1e-12); eps *= 0.5) {
    schedule.push_back(eps);
    if (opt.levels > 0 && static_cast<int>(schedule.size()) == opt.levels) break;
  }

  // Inner box Q: 2q (or 2q + 1) cells per axis, symmetric about x.
  long q = static_cast<long>(std::ceil(eps0 / h)) + 3;
  // A compact kernel inside Q is handled entirely by the exact pairing.
  if (std::isfinite(k.support_radius())) q = std::max(q, std::min(256L, static_cast<long>(std::ceil(k.support_radius() / h)) + 2));
  std::vector<long> qlo(d), qhi(d);
  std::vector<double> half(d);
  for (int i = 0; i < d; ++i) {
    long c = (m[i] >= 0) ? m[i] / 2 : -((-m[i] + 1) / 2);
    if (m[i] % 2 == 0) {
      qlo[i] = c - q;
      qhi[i] = c + q - 1;
      half[i] = q * h;
    } else {
      qlo[i] = c - q;
      qhi[i] = c + q;
      half[i] = (q + 0.5) * h;
    }
  }
  auto sigma = [&](const long* idx) {
    if (!g.inside(idx)) return 1.0;
    return e.cells[g.ravel(idx)] ? -1.0 : 1.0;
  };
  const bool sym = k.symmetric();
  CellIntegrator cells(k, x);
  const double band = 2.0 * h;

  // Q cells with a non-zero (paired) sign.
  struct Entry {
    std::vector<double> lo, hi;
    double weight;
  };
  std::vector<Entry> inner;
  {
    std::vector<long> idx(qlo), ref(d);
    while (true) {
      double s = sigma(idx.data());
      if (sym) {
        for (int i = 0; i < d; ++i) ref[i] = m[i] - 1 - idx[i];
        s = 0.5 * (s + sigma(ref.data()));
      }
      if (s != 0.0) {
        Entry en;
        en.lo.resize(d);
        en.hi.resize(d);
        for (int i = 0; i < d; ++i) {
          en.lo[i] = g.origin[i] + idx[i] * h;
          en.hi[i] = en.lo[i] + h;
        }
        en.weight = s;
        inner.push_back(std::move(en));
      }
      int a = d - 1;
      while (a >= 0) {
        if (++idx[a] <= qhi[a]) break;
        idx[a] = qlo[a];
        --a;
      }
      if (a < 0) break;
    }
  }

  // Outside Q: sigma = +1 except on E, so the part is the box-exterior mass minus twice E's share.
  double outer = 0.0;
  bool infinite = false;
  {
    IntegralResult ext = kernel_integral(k, Region::outside_box(half));
    if (ext.infinite) infinite = true;
    else outer = ext.value;
    std::vector<std::size_t> members = e.members();
    std::vector<double> part(block_count(members.size(), 512), 0.0);
    parallel_blocks(members.size(), 512, [&](std::size_t bi, std::size_t b, std::size_t en) {
      std::vector<long> idx(d);
      std::vector<double> lo(d), hi(d);
      double acc = 0.0;
      for (std::size_t j = b; j < en; ++j) {
        g.unravel(members[j], idx.data());
        bool in_q = true;
        for (int i = 0; i < d; ++i) in_q = in_q && idx[i] >= qlo[i] && idx[i] <= qhi[i];
        if (in_q) continue;
        for (int i = 0; i < d; ++i) {
          lo[i] = g.origin[i] + idx[i] * h;
          hi[i] = lo[i] + h;
        }
        acc += cells.cell(lo.data(), hi.data(), 0.0, band);
      }
      part[bi] = acc;
    });
    for (double v : part) outer -= 2.0 * v;
  }

  CurvatureResult res;
  res.eps = schedule;
  for (double eps : schedule) {
    std::vector<double> part(block_count(inner.size(), 64), 0.0);
    parallel_blocks(inner.size(), 64, [&](std::size_t bi, std::size_t b, std::size_t en) {
      double acc = 0.0;
      for (std::size_t j = b; j < en; ++j) {
        const Entry& c = inner[j];
        acc += c.weight * cells.cell(c.lo.data(), c.hi.data(), eps, band);
      }
      part[bi] = acc;
    });
    double v = outer;
    for (double p : part) v += p;
    res.iterates.push_back(infinite ? kInf : v);
  }
  res.value = res.iterates.back();
  const std::size_t n = res.iterates.size();
  const std::size_t from = n >= 3 ? n - 3 : 0;
  double lo = kInf, hi = -kInf, scale = 0.0;
  for (std::size_t i = from; i < n; ++i) {
    lo = std::min(lo, res.iterates[i]);
    hi = std::max(hi, res.iterates[i]);
    scale = std::max(scale, std::abs(res.iterates[i]));
  }
  res.error = infinite ? 0.0 : hi - lo;
  res.inconclusive = infinite || res.error > opt.spread_tolerance * scale;
  return res;
}

double curvature_bounded(const GridSet& e, const std::vector<double>& x, const Kernel& k, double kernel_mass) {
  const Grid& g = e.grid;
  const int d = g.d;
  if (k.dim() != d || static_cast<int>(x.size()) != d) throw std::invalid_argument("dimension mismatch");
  if (k.singular_set() != SingularSet::None) throw std::invalid_argument("kernel must be bounded");
  CellIntegrator cells(k, x);
  std::vector<std::size_t> members = e.members();
  std::vector<double> part(block_count(members.size(), 512), 0.0);
  parallel_blocks(members.size(), 512, [&](std::size_t bi, std::size_t b, std::size_t en) {
    std::vector<long> idx(d);
    std::vector<double> lo(d), hi(d);
    double acc = 0.0;
    for (std::size_t j = b; j < en; ++j) {
      g.unravel(members[j], idx.data());
      for (int i = 0; i < d; ++i) {
        lo[i] = g.origin[i] + idx[i] * g.h;
        hi[i] = lo[i] + g.h;
      }
      acc += cells.cell(lo.data(), hi.data(), 0.0, 2.0 * g.h);
    }
    part[bi] = acc;
  });
  double v = kernel_mass;
  for (double p : part) v -= 2.0 * p;
  return v;
}

}  // namespace nonloc
