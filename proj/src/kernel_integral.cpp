#include "nonloc/kernel_integral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nodes and weights of a rule integrating over the unit sphere S^{d-1}.
struct SphereRule {
  std::vector<std::vector<double>> dirs;
  std::vector<double> w;
};

SphereRule sphere_rule(int d) {
  SphereRule s;
  if (d == 1) {
    s.dirs = {{1.0}, {-1.0}};
    s.w = {1.0, 1.0};
  } else if (d == 2) {
    const int n = 512;
    for (int j = 0; j < n; ++j) {
      double t = 2.0 * std::numbers::pi * (j + 0.5) / n;
      s.dirs.push_back({std::cos(t), std::sin(t)});
      s.w.push_back(2.0 * std::numbers::pi / n);
    }
  } else if (d == 3) {
    using G = boost::math::quadrature::gauss<double, 40>;
    std::vector<double> x, wx;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
      double a = G::abscissa()[i], w = G::weights()[i];
      x.push_back(a);
      wx.push_back(w);
      if (a != 0.0) {
        x.push_back(-a);
        wx.push_back(w);
      }
    }
    const int na = 160;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double c = x[i], sn = std::sqrt(1.0 - c * c);
      for (int j = 0; j < na; ++j) {
        double t = 2.0 * std::numbers::pi * (j + 0.5) / na;
        s.dirs.push_back({sn * std::cos(t), sn * std::sin(t), c});
        s.w.push_back(wx[i] * 2.0 * std::numbers::pi / na);
      }
    }
  } else {
    throw std::invalid_argument("angular quadrature is implemented for d <= 3; use a radial kernel");
  }
  return s;
}

double norm2(const double* z, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += z[i] * z[i];
  return std::sqrt(s);
}

bool in_region(const Region& region, double r) {
  switch (region.kind) {
    case Region::Kind::All: return true;
    case Region::Kind::Tail: return r >= region.inner;
    case Region::Kind::Ball: return r < region.outer;
    case Region::Kind::Annulus: return r >= region.inner && r <= region.outer;
    default: return true;
  }
}

void add(IntegralResult& acc, const quad::Estimate& e) {
  if (e.infinite) {
    acc.infinite = true;
    acc.value = kInf;
    return;
  }
  if (!e.converged) acc.inconclusive = true;
  if (!acc.infinite) acc.value += e.value;
  acc.error += e.error;
}

IntegralResult outside_box(const Kernel& k, const std::vector<double>& a, const Weight& weight,
                           const quad::ShellOptions& opt) {
  const int d = k.dim();
  IntegralResult res;
  if (d == 1) {
    for (double sign : {1.0, -1.0}) {
      auto phi = [&](double r) { return k.at1(sign * r) * weight(r); };
      add(res, radial_integral(phi, a[0], kInf, k.radial_breaks(), opt));
      if (k.symmetric()) {
        add(res, radial_integral(phi, a[0], kInf, k.radial_breaks(), opt));
        break;
      }
    }
    return res;
  }
  bool cube = true;
  for (double v : a) cube = cube && v == a[0];
  // Cone over each face: z = t y, y on the face, t >= 1; dz = a_axis t^{d-1} dt dy'.
  const bool radial = k.is_radial();
  for (int axis = 0; axis < d; ++axis) {
    for (double sign : {1.0, -1.0}) {
      bool any_bad = false, any_incomplete = false;
      std::vector<double> lo, hi;
      for (int i = 0; i < d; ++i)
        if (i != axis) {
          lo.push_back(-a[i]);
          hi.push_back(a[i]);
        }
      auto face = [&](const double* yp) {
        std::vector<double> y(d), z(d);
        for (int i = 0, j = 0; i < d; ++i) y[i] = (i == axis) ? sign * a[axis] : yp[j++];
        double ny = norm2(y.data(), d);
        auto phi = [&](double t) {
          for (int i = 0; i < d; ++i) z[i] = t * y[i];
          double v = radial ? k.radial(t * ny) : k(z.data());
          return v * weight(t * ny) * std::pow(t, d - 1);
        };
        std::vector<double> br;
        for (double b : k.radial_breaks()) br.push_back(b / ny);
        quad::Estimate e = radial_integral(phi, 1.0, kInf, br, opt);
        if (e.infinite) any_bad = true;
        if (!e.converged) any_incomplete = true;
        return e.infinite ? 0.0 : a[axis] * e.value;
      };
      quad::Estimate f = quad::cubature(face, d - 1, lo.data(), hi.data(), 0.0, 1e-9, 400'000);
      if (any_bad) {
        res.infinite = true;
        res.value = kInf;
        return res;
      }
      if (any_incomplete || !f.converged) res.inconclusive = true;
      int copies = 1;
      if (radial && cube) copies = 2 * d;
      else if (k.symmetric()) copies = 2;
      res.value += copies * f.value;
      res.error += copies * f.error;
      if (radial && cube) return res;
      if (k.symmetric()) break;
    }
  }
  return res;
}

}  // namespace

IntegralResult annulus_around(const Kernel& k, const std::vector<double>& center, double r, double R,
                              const quad::ShellOptions& opt) {
  const int d = k.dim();
  if (static_cast<int>(center.size()) != d) throw std::invalid_argument("center has wrong dimension");
  if (!(R > r && r >= 0.0)) throw std::invalid_argument("annulus needs 0 <= r < R");
  const SphereRule sr = sphere_rule(d);
  auto phi = [&](double rad) {
    std::vector<double> z(d);
    double s = 0.0;
    for (std::size_t j = 0; j < sr.dirs.size(); ++j) {
      for (int a = 0; a < d; ++a) z[a] = center[a] + rad * sr.dirs[j][a];
      s += sr.w[j] * k(z.data());
    }
    return s * std::pow(rad, d - 1);
  };
  IntegralResult res;
  add(res, radial_integral(phi, r, R, {}, opt));
  return res;
}

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

quad::Estimate radial_integral(const quad::Fn1& phi, double lo, double hi, const std::vector<double>& breaks,
                               const quad::ShellOptions& opt) {
  quad::Estimate out;
  if (!(hi > lo)) return out;
  // Split radius: the sample with the largest r * phi(r), i.e. the most mass per octave.
  std::vector<double> cands;
  for (int j = -40; j <= 40; ++j) cands.push_back(std::ldexp(1.0, j));
  for (double b : breaks) {
    cands.push_back(b * 0.999);
    cands.push_back(b * 1.001);
  }
  double split = -1.0, best = -1.0;
  std::sort(cands.begin(), cands.end());
  for (double r : cands) {
    if (r <= lo || r >= hi) continue;
    double v = r * phi(r);
    if (std::isfinite(v) && v > best) {
      best = v;
      split = r;
    }
  }
  if (split < 0.0) {
    if (lo > 0.0 && std::isfinite(hi)) return quad::gauss_kronrod(phi, lo, hi, 0.1 * opt.rtol, breaks);
    split = lo > 0.0 ? lo : std::min(1.0, hi * 0.5);
  }
  auto combine = [&](const quad::Estimate& e) {
    if (e.infinite) {
      out.infinite = true;
      out.value = kInf;
    }
    if (!e.converged) out.converged = false;
    if (!out.infinite) out.value += e.value;
    out.error += e.error;
    out.levels += e.levels;
  };
  // Inner part [lo, split].
  if (lo == 0.0) {
    combine(quad::inward_shells(phi, split, opt, breaks));
  } else {
    double b = split;
    while (b > lo && !out.infinite) {
      double a = std::max(lo, 0.5 * b);
      if (a < 2.0 * lo && a > lo) a = lo;
      combine(quad::gauss_kronrod(phi, a, b, 0.1 * opt.rtol, breaks));
      b = a;
    }
  }
  if (out.infinite) return out;
  combine(quad::outward_shells(phi, split, hi, opt, breaks));
  return out;
}

IntegralResult kernel_integral(const Kernel& k, const Region& region, const Weight& weight,
                               const quad::ShellOptions& opt) {
  const int d = k.dim();
  if ((region.kind == Region::Kind::Tail || region.kind == Region::Kind::OutsideCube) && !(region.inner > 0.0))
    throw std::invalid_argument("tail radius must be positive");
  if (region.kind == Region::Kind::Ball && !(region.outer > 0.0))
    throw std::invalid_argument("ball radius must be positive");
  if (region.kind == Region::Kind::Annulus && !(region.inner > 0.0 && region.outer > region.inner))
    throw std::invalid_argument("annulus needs 0 < r < R");
  if (region.kind == Region::Kind::OutsideCube) return outside_box(k, std::vector<double>(d, region.inner), weight, opt);
  if (region.kind == Region::Kind::OutsideBox) {
    if (static_cast<int>(region.half.size()) != d) throw std::invalid_argument("box has wrong dimension");
    for (double v : region.half)
      if (!(v > 0.0)) throw std::invalid_argument("box half-widths must be positive");
    return outside_box(k, region.half, weight, opt);
  }

  double lo = 0.0, hi = std::min(kInf, k.support_radius() * (1.0 + 1e-12));
  if (region.kind == Region::Kind::Tail || region.kind == Region::Kind::Annulus) lo = region.inner;
  if (region.kind == Region::Kind::Ball || region.kind == Region::Kind::Annulus) hi = std::min(hi, region.outer);
  IntegralResult res;
  if (!(hi > lo)) return res;

  std::vector<double> breaks = k.radial_breaks();
  if (weight.p > 0.0) breaks.push_back(1.0);

  // Balls around isolated singular points are integrated in their own polar coordinates.
  struct Hole {
    std::vector<double> center;
    double radius;
  };
  std::vector<Hole> holes;
  if (k.singular_set() == SingularSet::Points) {
    const auto& pts = k.singular_points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double rho = norm2(pts[i].data(), d) / 4.0;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j == i) continue;
        std::vector<double> diff(d);
        for (int a = 0; a < d; ++a) diff[a] = pts[i][a] - pts[j][a];
        rho = std::min(rho, norm2(diff.data(), d) / 4.0);
      }
      holes.push_back({pts[i], rho});
    }
  }
  auto in_hole = [&](const double* z) {
    for (const auto& h : holes) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += (z[a] - h.center[a]) * (z[a] - h.center[a]);
      if (s < h.radius * h.radius) return true;
    }
    return false;
  };

  if (k.is_radial() && holes.empty()) {
    const double area = sphere_area(d);
    auto phi = [&](double r) { return area * k.radial(r) * weight(r) * std::pow(r, d - 1); };
    add(res, radial_integral(phi, lo, hi, breaks, opt));
    return res;
  }

  // Masked holes leave kinks in the angular integral; settle for a looser tolerance.
  quad::ShellOptions local = opt;
  if (!holes.empty()) local.rtol = std::max(opt.rtol, 1e-8);
  for (const auto& h : holes) {
    double c = norm2(h.center.data(), d);
    breaks.push_back(c - h.radius);
    breaks.push_back(c + h.radius);
  }
  const SphereRule sr = sphere_rule(d);
  auto angular = [&](const std::vector<double>& center, double r, bool mask_holes) {
    std::vector<double> z(d);
    double s = 0.0;
    for (std::size_t j = 0; j < sr.dirs.size(); ++j) {
      for (int a = 0; a < d; ++a) z[a] = center[a] + r * sr.dirs[j][a];
      if (mask_holes && in_hole(z.data())) continue;
      double rz = norm2(z.data(), d);
      if (!in_region(region, rz)) continue;
      s += sr.w[j] * k(z.data()) * weight(rz);
    }
    return s * std::pow(r, d - 1);
  };
  const std::vector<double> origin(d, 0.0);
  add(res, radial_integral([&](double r) { return angular(origin, r, true); }, lo, hi, breaks, local));
  for (const auto& h : holes) {
    if (res.infinite) break;
    add(res, radial_integral([&](double r) { return angular(h.center, r, false); }, 0.0, h.radius, {}, local));
  }
  return res;
}

}  // namespace nonloc
