#include "nonloc/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nonloc/functional.hpp"
#include "nonloc/kernel_integral.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<long> placement(const Grid& inner, const Grid& outer) {
  if (inner.d != outer.d || std::abs(inner.h - outer.h) > 1e-12 * outer.h)
    throw std::invalid_argument("grids are not compatible");
  std::vector<long> off(inner.d);
  for (int i = 0; i < inner.d; ++i) {
    double c = (inner.origin[i] - outer.origin[i]) / outer.h;
    off[i] = std::lround(c);
    if (std::abs(c - off[i]) > 1e-6 || off[i] < 0 || off[i] + inner.n[i] > outer.n[i])
      throw std::invalid_argument("grid does not fit inside the target grid");
  }
  return off;
}

GridSet full_set(const Grid& g) {
  GridSet s(g);
  std::fill(s.cells.begin(), s.cells.end(), 1);
  return s;
}

double pth_power_sum(const GridFunction& u, double p) {
  double s = 0.0;
  for (double v : u.values) s += std::pow(std::abs(v), p);
  return s * u.grid.cell_volume();
}

}  // namespace

nlohmann::json LemmaCheck::to_json() const {
  return {{"name", name}, {"lhs", lhs}, {"rhs", rhs}, {"slack", slack}, {"holds", holds}};
}

Grid pad_grid(const Grid& g, long cells) {
  std::vector<long> n(g.n);
  std::vector<double> o(g.origin);
  for (int i = 0; i < g.d; ++i) {
    n[i] += 2 * cells;
    o[i] -= cells * g.h;
  }
  return Grid(g.d, g.h, n, o);
}

GridFunction embed(const GridFunction& u, const Grid& target) {
  std::vector<long> off = placement(u.grid, target);
  GridFunction out(target, 0.0);
  std::vector<long> idx(u.grid.d);
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    u.grid.unravel(f, idx.data());
    for (int i = 0; i < u.grid.d; ++i) idx[i] += off[i];
    out.values[target.ravel(idx.data())] = u.values[f];
  }
  return out;
}

GridSet embed(const GridSet& s, const Grid& target) {
  std::vector<long> off = placement(s.grid, target);
  GridSet out(target);
  std::vector<long> idx(s.grid.d);
  for (std::size_t f = 0; f < s.cells.size(); ++f) {
    s.grid.unravel(f, idx.data());
    for (int i = 0; i < s.grid.d; ++i) idx[i] += off[i];
    out.cells[target.ravel(idx.data())] = s.cells[f];
  }
  return out;
}

double standoff(const GridSet& v, const GridSet& omega) {
  if (!v.grid.same_as(omega.grid)) throw std::invalid_argument("V and Omega must share a grid");
  const Grid& g = v.grid;
  const int d = g.d;
  // Nearest outside cells are those touching Omega, plus the exterior of the box.
  std::vector<std::vector<long>> rim;
  std::vector<long> idx(d), nb(d);
  for (std::size_t f = 0; f < omega.cells.size(); ++f) {
    if (omega.cells[f]) continue;
    g.unravel(f, idx.data());
    bool touches = false;
    for (int a = 0; a < d && !touches; ++a)
      for (long step : {-1L, 1L}) {
        nb = idx;
        nb[a] += step;
        if (g.inside(nb.data()) && omega.cells[g.ravel(nb.data())]) touches = true;
      }
    if (touches) rim.push_back(idx);
  }
  double best = kInf;
  for (std::size_t f = 0; f < v.cells.size(); ++f) {
    if (!v.cells[f]) continue;
    g.unravel(f, idx.data());
    for (int a = 0; a < d; ++a) best = std::min(best, std::min(idx[a], g.n[a] - 1 - idx[a]) * g.h);
    for (const auto& r : rim) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        double gap = std::max(0L, std::labs(r[a] - idx[a]) - 1) * g.h;
        s += gap * gap;
      }
      best = std::min(best, std::sqrt(s));
    }
  }
  return best;
}

GridFunction zero_extend(const GridFunction& u, const GridSet& omega, const GridSet& v, long pad) {
  if (!u.grid.same_as(omega.grid) || !u.grid.same_as(v.grid)) throw std::invalid_argument("u, Omega and V must share a grid");
  if (pad < 0) throw std::invalid_argument("padding must be non-negative");
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    if (v.cells[f] && !omega.cells[f]) throw std::invalid_argument("V must lie inside Omega");
    if (!v.cells[f] && u.values[f] != 0.0) throw std::invalid_argument("u must vanish outside V");
  }
  if (v.count() > 0 && !(standoff(v, omega) > 0.0)) throw std::invalid_argument("V must keep a positive standoff from the complement of Omega");
  GridFunction masked = u;
  for (std::size_t f = 0; f < masked.values.size(); ++f)
    if (!omega.cells[f]) masked.values[f] = 0.0;
  return embed(masked, pad_grid(u.grid, pad));
}

LemmaCheck vanishing_check(const GridFunction& u, const GridSet& omega, const GridSet& v, const Kernel& k, double p) {
  LemmaCheck c;
  c.name = "vanishing";
  const double gap = standoff(v, omega);
  GridFunction ext = zero_extend(u, omega, v, 0);
  c.lhs = seminorm(ext, k, p).value;
  double inner = seminorm(u, k, p, &omega).value;
  double tail = kernel_integral(k, Region::tail(gap)).value;
  c.rhs = inner + 2.0 * pth_power_sum(u, p) * tail;
  c.slack = c.rhs - c.lhs;
  c.holds = c.slack >= 0.0;
  return c;
}

GridFunction reflect_even(const GridFunction& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.d) throw std::invalid_argument("axis out of range");
  std::vector<long> n(g.n);
  std::vector<double> o(g.origin);
  n[axis] *= 2;
  o[axis] -= g.n[axis] * g.h;
  Grid out_grid(g.d, g.h, n, o);
  GridFunction out(out_grid, 0.0);
  std::vector<long> idx(g.d);
  for (std::size_t f = 0; f < out.values.size(); ++f) {
    out_grid.unravel(f, idx.data());
    long j = idx[axis] - g.n[axis];
    idx[axis] = j >= 0 ? j : -1 - j;
    out.values[f] = u.values[g.ravel(idx.data())];
  }
  return out;
}

GridFunction apply_cutoff(const GridFunction& u, const GridFunction& psi) {
  if (!u.grid.same_as(psi.grid)) throw std::invalid_argument("u and psi must share a grid");
  GridFunction out = u;
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    double c = psi.values[f];
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("cutoff must take values in [0, 1]");
    out.values[f] = c * u.values[f];
  }
  return out;
}

LemmaCheck cutoff_check(const GridFunction& u, const GridFunction& psi, double lip, const Kernel& k, double p) {
  if (!(lip >= 0.0)) throw std::invalid_argument("Lipschitz constant must be non-negative");
  LemmaCheck c;
  c.name = "cutoff";
  GridFunction v = apply_cutoff(u, psi);
  c.lhs = seminorm(v, k, p).value;
  const double semi_u = seminorm(u, k, p).value;

  IntegralResult nts = kernel_integral(k, Region::all(), Weight::min_pow(p));
  const double continuum = nts.infinite ? kInf : std::max(1.0, std::pow(lip, p)) * nts.value;
  // Discrete counterpart: sum over offsets of W(s) min(1, (lip |s h|)^p), per unit volume.
  WeightTable w(k, u.grid.h, full_extent(u.grid), Scheme{});
  std::vector<long> s(u.grid.d);
  double discrete = 0.0;
  for (std::size_t f : w.shell_order()) {
    w.offset(f, s.data());
    double r2 = 0.0;
    for (long x : s) r2 += static_cast<double>(x * x);
    double r = std::sqrt(r2) * u.grid.h;
    discrete += w.at(f) * std::min(1.0, std::pow(lip * r, p));
  }
  discrete = (discrete + w.beyond()) / u.grid.cell_volume();
  const double mass = std::max(continuum, discrete);
  c.rhs = std::pow(2.0, p - 1.0) * (semi_u + mass * pth_power_sum(u, p));
  c.slack = c.rhs - c.lhs;
  c.holds = c.slack >= 0.0;
  return c;
}

double sobolev_norm(const GridFunction& u, const Kernel& k, double p, const GridSet* omega) {
  double lp = 0.0;
  for (std::size_t f = 0; f < u.values.size(); ++f)
    if (!omega || omega->cells[f]) lp += std::pow(std::abs(u.values[f]), p);
  lp *= u.grid.cell_volume();
  double semi = seminorm(u, k, p, omega).value;
  return std::pow(lp + semi, 1.0 / p);
}

nlohmann::json ExtensionReport::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back({{"name", s.name}, {"lp", s.lp}, {"semi", s.semi}});
  return {{"lp_in", lp_in},   {"semi_in", semi_in}, {"lp_out", lp_out},
          {"semi_out", semi_out}, {"ratio", ratio}, {"width", width},
          {"p", p},           {"reflection_symmetric_norm", reflection_symmetric_norm},
          {"stages", st},     {"warnings", warnings}};
}

std::pair<GridFunction, ExtensionReport> extend(const GridFunction& u, const Kernel& k, double p,
                                                const ExtensionOptions& opt) {
  const Grid& g = u.grid;
  const int d = g.d;
  if (k.dim() != d) throw std::invalid_argument("kernel and grid dimensions differ");
  double shortest = kInf;
  for (long n : g.n) shortest = std::min(shortest, n * g.h);
  const double width = opt.width > 0.0 ? opt.width : 0.5 * shortest;
  if (width > shortest * (1.0 + 1e-12)) throw std::invalid_argument("collar wider than the box cannot be reflected");

  ExtensionReport rep;
  rep.width = width;
  rep.p = p;
  if (!opt.certified) rep.warnings.push_back("kernel hypotheses (Dec), (Dou), (Nts) not certified; proceeding");
  rep.reflection_symmetric_norm = true;
  for (int a = 0; a < d; ++a) rep.reflection_symmetric_norm = rep.reflection_symmetric_norm && k.norm().reflection_symmetric(a);

  const long pad = static_cast<long>(std::ceil(width / g.h)) + 1;
  const Grid big = pad_grid(g, pad);
  GridFunction zero = embed(u, big);
  GridFunction reflected(big, 0.0), out(big, 0.0);
  std::vector<long> idx(d), src(d);
  for (std::size_t f = 0; f < out.values.size(); ++f) {
    big.unravel(f, idx.data());
    double dist2 = 0.0;
    bool inside = true;
    for (int a = 0; a < d; ++a) {
      long j = idx[a] - pad;
      if (j < 0 || j >= g.n[a]) inside = false;
      double c = big.center_along(a, idx[a]);
      double lo = g.origin[a], hi = g.origin[a] + g.n[a] * g.h;
      double gap = c < lo ? lo - c : (c > hi ? c - hi : 0.0);
      dist2 += gap * gap;
      src[a] = j < 0 ? -1 - j : (j >= g.n[a] ? 2 * g.n[a] - 1 - j : j);
    }
    if (inside) {
      out.values[f] = u.values[g.ravel(src.data())];
      reflected.values[f] = out.values[f];
      continue;
    }
    const double psi = std::max(0.0, 1.0 - std::sqrt(dist2) / width);
    if (psi == 0.0) continue;
    bool ok = true;
    for (int a = 0; a < d; ++a) ok = ok && src[a] >= 0 && src[a] < g.n[a];
    if (!ok) continue;
    reflected.values[f] = u.values[g.ravel(src.data())];
    out.values[f] = psi * reflected.values[f];
  }

  const GridSet omega = full_set(g);
  rep.lp_in = u.lp_norm(p);
  rep.semi_in = std::pow(seminorm(u, k, p, &omega).value, 1.0 / p);
  rep.stages.push_back({"zero-extension", zero.lp_norm(p), std::pow(seminorm(zero, k, p).value, 1.0 / p)});
  rep.stages.push_back({"reflection", reflected.lp_norm(p), std::pow(seminorm(reflected, k, p).value, 1.0 / p)});
  rep.lp_out = out.lp_norm(p);
  rep.semi_out = std::pow(seminorm(out, k, p).value, 1.0 / p);
  rep.stages.push_back({"collar", rep.lp_out, rep.semi_out});
  const double norm_in = std::pow(std::pow(rep.lp_in, p) + std::pow(rep.semi_in, p), 1.0 / p);
  const double norm_out = std::pow(std::pow(rep.lp_out, p) + std::pow(rep.semi_out, p), 1.0 / p);
  rep.ratio = norm_in > 0.0 ? norm_out / norm_in : 0.0;
  return {out, rep};
}

}  // namespace nonloc
