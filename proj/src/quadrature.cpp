#include "nonloc/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace nonloc::quad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

template <unsigned N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(w[i]);
    } else {
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
    }
  }
  return r;
}

const Rule& rule(int n) {
  static const Rule r1{{0.0}, {2.0}};
  static const Rule r2 = make_rule<2>();
  static const Rule r3 = make_rule<3>();
  static const Rule r4 = make_rule<4>();
  static const Rule r6 = make_rule<6>();
  static const Rule r8 = make_rule<8>();
  switch (n) {
    case 1: return r1;
    case 2: return r2;
    case 3: return r3;
    case 4: return r4;
    case 6: return r6;
    case 8: return r8;
    default: throw std::invalid_argument("unsupported Gauss rule order");
  }
}

}  // namespace

Estimate gauss_kronrod(const Fn1& f, double a, double b, double rtol, const std::vector<double>& breaks) {
  Estimate out;
  if (!(b > a)) return out;
  std::vector<double> pts{a};
  for (double c : breaks)
    if (c > a && c < b) pts.push_back(c);
  std::sort(pts.begin() + 1, pts.end());
  pts.push_back(b);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    // Integrate over [0, 1]: boost's estimate misbehaves on intervals narrow relative to |a|.
    const double lo = pts[i], w = pts[i + 1] - pts[i];
    auto g = [&](double t) { return w * f(lo + w * t); };
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 15, rtol, &err);
    out.value += v;
    out.error += err * std::abs(v);
  }
  if (!std::isfinite(out.value)) {
    out.infinite = true;
    out.value = kInf;
  }
  return out;
}

Estimate tanh_sinh(const Fn1& f, double a, double b, double rtol) {
  Estimate out;
  if (!(b > a)) return out;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  try {
    out.value = integrator.integrate(f, a, b, rtol, &err, &l1, &levels);
  } catch (const std::exception&) {
    // Boost throws when the integrand returns inf at an interior sample.
    out.infinite = true;
    out.value = kInf;
    return out;
  }
  out.error = err * std::max(1.0, l1);
  out.levels = static_cast<int>(levels);
  if (!std::isfinite(out.value)) {
    out.infinite = true;
    out.value = kInf;
  }
  return out;
}

Estimate shell_series(const std::function<Estimate(int)>& shell, int last_level, const ShellOptions& opt) {
  Estimate out;
  std::vector<double> delta, partial;
  double total = 0.0, err = 0.0;
  int zeros = 0;
  const int top = std::min(last_level, opt.max_levels - 1);
  // A finite range of shells cannot diverge; the rules below only apply to open-ended series.
  const bool open_ended = last_level == std::numeric_limits<int>::max();
  for (int k = 0; k <= top; ++k) {
    Estimate e = shell(k);
    out.levels = k + 1;
    if (e.infinite) {
      out.infinite = true;
      out.value = kInf;
      return out;
    }
    total += e.value;
    err += e.error;
    delta.push_back(e.value);
    partial.push_back(total);
    out.value = total;
    out.error = err;
    if (k == last_level) return out;

    // Escalation rule: two consecutive refinements each grow the partial value
    // by more than the growth factor while the increments do not shrink.
    if (open_ended && k >= 2) {
      double p0 = partial[k - 2], p1 = partial[k - 1], p2 = partial[k];
      if (p0 > 0.0 && p1 > opt.growth_factor * p0 && p2 > opt.growth_factor * p1 && delta[k] >= delta[k - 1]) {
        out.infinite = true;
        out.value = kInf;
        return out;
      }
    }
    if (open_ended && k >= opt.stall_levels) {
      bool stalled = true;
      for (int j = k - opt.stall_levels + 1; j <= k; ++j)
        if (!(delta[j] > 0.0 && delta[j] >= 0.999 * delta[j - 1])) stalled = false;
      if (stalled) {
        out.infinite = true;
        out.value = kInf;
        return out;
      }
    }

    zeros = (e.value == 0.0) ? zeros + 1 : 0;
    if (zeros >= 3) return out;
    if (total > 0.0 && std::abs(delta[k]) <= opt.rtol * std::abs(total) && delta[k] >= 0.0 &&
        (k == 0 || delta[k - 1] >= 0.0)) {
      out.error += std::abs(delta[k]);
      return out;
    }
    if (k >= 2 && delta[k] > 0.0 && delta[k - 1] > 0.0 && delta[k - 2] > 0.0) {
      double q1 = delta[k] / delta[k - 1];
      double q0 = delta[k - 1] / delta[k - 2];
      if (q1 < 0.98 && q0 < 0.98) {
        double rest = delta[k] * q1 / (1.0 - q1);
        double rest_err = std::abs(rest) * std::abs(q1 - q0) / (1.0 - std::max(q0, q1)) + 1e-15 * std::abs(rest);
        if (rest_err <= opt.rtol * std::abs(total + rest) || rest <= opt.rtol * std::abs(total)) {
          out.value = total + rest;
          out.error = err + rest_err;
          return out;
        }
      }
    }
  }
  out.converged = false;
  if (!delta.empty()) out.error += std::abs(delta.back());
  return out;
}

Estimate outward_shells(const Fn1& f, double a, double end, const ShellOptions& opt,
                        const std::vector<double>& breaks) {
  if (!(a > 0.0)) throw std::invalid_argument("outward_shells needs a > 0");
  if (end <= a) return {};
  int last = std::numeric_limits<int>::max();
  if (std::isfinite(end)) last = std::max(0, static_cast<int>(std::ceil(std::log2(end / a))) - 1);
  auto shell = [&](int k) {
    double lo = std::ldexp(a, k);
    double hi = std::min(std::ldexp(a, k + 1), end);
    if (k == last) hi = end;
    return gauss_kronrod(f, lo, hi, 0.1 * opt.rtol, breaks);
  };
  return shell_series(shell, last, opt);
}

Estimate inward_shells(const Fn1& f, double b, const ShellOptions& opt, const std::vector<double>& breaks) {
  if (!(b > 0.0)) throw std::invalid_argument("inward_shells needs b > 0");
  auto shell = [&](int k) {
    double hi = std::ldexp(b, -k);
    double lo = std::ldexp(b, -k - 1);
    return gauss_kronrod(f, lo, hi, 0.1 * opt.rtol, breaks);
  };
  ShellOptions o = opt;
  Estimate e = shell_series(shell, std::numeric_limits<int>::max(), o);
  return e;
}

double tensor_gauss(const FnN& f, int d, const double* lo, const double* hi, int n) {
  const Rule& r = rule(n);
  const int m = static_cast<int>(r.x.size());
  std::vector<int> idx(d, 0);
  std::vector<double> x(d), half(d), mid(d);
  for (int i = 0; i < d; ++i) {
    half[i] = 0.5 * (hi[i] - lo[i]);
    mid[i] = 0.5 * (hi[i] + lo[i]);
  }
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = mid[i] + half[i] * r.x[idx[i]];
      w *= r.w[idx[i]] * half[i];
    }
    sum += w * f(x.data());
    int ax = d - 1;
    while (ax >= 0 && ++idx[ax] == m) idx[ax--] = 0;
    if (ax < 0) break;
  }
  return sum;
}

namespace {
struct Box {
  double err;
  double value;
  std::vector<double> lo, hi;
  bool operator<(const Box& o) const { return err < o.err; }
};
}  // namespace

Estimate cubature(const FnN& f, int d, const double* lo, const double* hi, double abs_tol, double rel_tol,
                  long max_evals) {
  Estimate out;
  long evals = 0;
  long per_box = 1, per_box_low = 1;
  for (int i = 0; i < d; ++i) {
    per_box *= 6;
    per_box_low *= 4;
  }
  auto eval_box = [&](std::vector<double> l, std::vector<double> h) {
    double hiord = tensor_gauss(f, d, l.data(), h.data(), 6);
    double loord = tensor_gauss(f, d, l.data(), h.data(), 4);
    evals += per_box + per_box_low;
    return Box{std::abs(hiord - loord), hiord, std::move(l), std::move(h)};
  };
  std::priority_queue<Box> queue;
  queue.push(eval_box(std::vector<double>(lo, lo + d), std::vector<double>(hi, hi + d)));
  double total = queue.top().value, err = queue.top().err;
  while (!queue.empty()) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    if (evals >= max_evals) {
      out.converged = false;
      break;
    }
    Box top = queue.top();
    queue.pop();
    total -= top.value;
    err -= top.err;
    for (int mask = 0; mask < (1 << d); ++mask) {
      std::vector<double> l(d), h(d);
      for (int i = 0; i < d; ++i) {
        double m = 0.5 * (top.lo[i] + top.hi[i]);
        if (mask & (1 << i)) {
          l[i] = m;
          h[i] = top.hi[i];
        } else {
          l[i] = top.lo[i];
          h[i] = m;
        }
      }
      Box child = eval_box(std::move(l), std::move(h));
      total += child.value;
      err += child.err;
      queue.push(std::move(child));
    }
    ++out.levels;
  }
  // Re-sum to shed accumulated cancellation from the running totals.
  double v = 0.0, e = 0.0;
  while (!queue.empty()) {
    v += queue.top().value;
    e += queue.top().err;
    queue.pop();
  }
  out.value = v;
  out.error = e;
  if (!std::isfinite(v)) {
    out.infinite = true;
    out.value = kInf;
  }
  return out;
}

}  // namespace nonloc::quad
