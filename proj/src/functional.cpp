#include "nonloc/functional.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "nonloc/kernel_integral.hpp"
#include "nonloc/parallel.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long fft_size(long n) {
  for (;; ++n) {
    long m = n;
    for (long f : {2L, 3L, 5L, 7L})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_as(b)) throw std::invalid_argument(std::string(what) + " must share a grid");
}

void require_spacing(const Grid& g, const WeightTable& w) {
  if (g.d != w.dim() || std::abs(g.h - w.spacing()) > 1e-12 * g.h)
    throw std::invalid_argument("weight table does not match the grid");
}

std::vector<double> as_values(const GridSet& s) { return std::vector<double>(s.cells.begin(), s.cells.end()); }

// Largest per-axis extent of the bounding box of the occupied cells, minus one.
long occupied_span(const GridSet& s) {
  const int d = s.grid.d;
  std::vector<long> lo(d, std::numeric_limits<long>::max()), hi(d, -1), idx(d);
  for (std::size_t f = 0; f < s.cells.size(); ++f) {
    if (!s.cells[f]) continue;
    s.grid.unravel(f, idx.data());
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], idx[i]);
      hi[i] = std::max(hi[i], idx[i]);
    }
  }
  long span = 0;
  for (int i = 0; i < d; ++i)
    if (hi[i] >= 0) span = std::max(span, hi[i] - lo[i]);
  return span;
}

bool exact_everywhere(const WeightTable& w) {
  return w.dim() == 1 && w.scheme().near == Scheme::NearField::CellPairCorrection && w.kernel().symmetric() &&
         w.kernel().antiderivatives();
}

bool computed_exactly(const WeightTable& w, const long* s) {
  if (exact_everywhere(w)) return true;
  return w.dim() > 1 && w.exact(s);
}

// Cell-pair weight from a fixed tensor rule; accurate enough off the near field to size the midpoint error.
double rough_pair_weight(const Kernel& k, double h, const long* s) {
  const int d = k.dim();
  std::vector<double> lo(d), hi(d), z(d);
  double total = 0.0;
  for (int mask = 0; mask < (1 << d); ++mask) {
    for (int i = 0; i < d; ++i) {
      lo[i] = (mask & (1 << i)) ? 0.0 : -h;
      hi[i] = (mask & (1 << i)) ? h : 0.0;
    }
    auto f = [&](const double* t) {
      double tent = 1.0;
      for (int i = 0; i < d; ++i) {
        z[i] = s[i] * h + t[i];
        tent *= h - std::abs(t[i]);
      }
      return k(z.data()) * tent;
    };
    total += quad::tensor_gauss(f, d, lo.data(), hi.data(), 6);
  }
  return total;
}

using TermFn = std::function<double(std::size_t flat, const long* s)>;

// Sums W(s) term(s) in shell-major order, plus tail_count * beyond, with shares and an error estimate.
EnergyReport accumulate(const WeightTable& w, const TermFn& term, double tail_count, bool include_centre = false) {
  EnergyReport r;
  r.scheme = w.scheme().name();
  const int d = w.dim();
  std::vector<long> s(d);
  double sum = 0.0, near = 0.0;
  auto visit = [&](std::size_t f) {
    w.offset(f, s.data());
    double t = term(f, s.data());
    if (t == 0.0) return;
    double W = w.at(f);
    if (W == 0.0) return;
    if (!std::isfinite(W)) {
      r.infinite = true;
      if (!computed_exactly(w, s.data())) r.inconclusive = true;
      return;
    }
    double c = W * t;
    sum += c;
    if (w.near(s.data())) near += c;
  };
  if (include_centre) visit(w.flat(std::vector<long>(d, 0).data()));
  for (std::size_t f : w.shell_order()) visit(f);

  double tail = 0.0;
  if (tail_count > 0.0 && w.scheme().tail_compensation) {
    if (!std::isfinite(w.beyond())) r.infinite = true;
    else tail = tail_count * w.beyond();
  }
  if (r.infinite) {
    r.value = kInf;
    r.error = 0.0;
    return r;
  }
  r.value = sum + tail;
  r.near_share = near;
  r.tail_share = tail;

  // Error: midpoint defect on the first shell outside the exactly integrated region, doubled to
  // cover the shells after it, plus the cube-ramp approximation of the tail.
  double err = 1e-12 * std::abs(r.value);
  if (!exact_everywhere(w)) {
    long probe = (d > 1 && w.scheme().near == Scheme::NearField::CellPairCorrection) ? w.scheme().near_cells + 1 : 1;
    if (probe <= w.extent()) {
      double defect = 0.0;
      std::map<std::vector<long>, double> seen;
      for (std::size_t f : w.shell_order()) {
        if (w.shell(f) != probe) continue;
        w.offset(f, s.data());
        double t = term(f, s.data());
        if (t == 0.0 || !std::isfinite(w.at(f)) || computed_exactly(w, s.data())) continue;
        std::vector<long> key(s);
        if (w.kernel().is_radial()) {
          for (long& v : key) v = std::labs(v);
          std::sort(key.begin(), key.end());
        }
        auto it = seen.find(key);
        if (it == seen.end()) it = seen.emplace(key, rough_pair_weight(w.kernel(), w.spacing(), s.data())).first;
        defect += (it->second - w.at(f)) * t;
      }
      err += 2.0 * std::abs(defect);
    }
  }
  if (d > 1) err += tail * d / (2.0 * w.extent() + 1.0);
  r.error = err;
  return r;
}

// Per-axis bounds of x with both x and x + s inside the box.
bool overlap(const Grid& g, const long* s, long* lo, long* hi) {
  for (int i = 0; i < g.d; ++i) {
    lo[i] = std::max(0L, -s[i]);
    hi[i] = std::min(g.n[i], g.n[i] - s[i]);
    if (lo[i] >= hi[i]) return false;
  }
  return true;
}

// Calls body(x_flat, y_flat, count) for runs of contiguous x along the last axis with y = x + s.
template <class Body>
void for_each_pair_run(const Grid& g, const long* s, Body&& body) {
  const int d = g.d;
  std::vector<long> lo(d), hi(d);
  if (!overlap(g, s, lo.data(), hi.data())) return;
  const std::vector<long> st = g.strides();
  long shift = 0;
  for (int i = 0; i < d; ++i) shift += s[i] * st[i];
  std::vector<long> idx(lo);
  const long run = hi[d - 1] - lo[d - 1];
  while (true) {
    long x = 0;
    for (int i = 0; i < d; ++i) x += idx[i] * st[i];
    body(static_cast<std::size_t>(x), static_cast<std::size_t>(x + shift), run);
    int a = d - 2;
    while (a >= 0) {
      if (++idx[a] < hi[a]) break;
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
}

double abs_pow(double v, double p) {
  v = std::abs(v);
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

// Difference sums U(s) for every table offset with non-zero weight. In whole-space mode the
// pairs with one point outside the box are added: T(s) = U(s) + B(s) + B(-s).
std::vector<double> difference_sums(const GridFunction& u, const WeightTable& w, double p, const GridSet* omega,
                                    double* total_p) {
  const Grid& g = u.grid;
  const int d = g.d;
  std::vector<double> up(u.values.size());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = abs_pow(u.values[i], p);
  *total_p = std::accumulate(up.begin(), up.end(), 0.0);
  std::vector<double> T(w.size(), 0.0);
  const std::vector<std::uint8_t>* mask = omega ? &omega->cells : nullptr;
  parallel_blocks(w.size(), 64, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<long> s(d);
    for (std::size_t f = b; f < e; ++f) {
      if (w.at(f) == 0.0) continue;
      w.offset(f, s.data());
      bool zero = true;
      for (long v : s) zero = zero && v == 0;
      if (zero) continue;
      double diff = 0.0, inside_x = 0.0, inside_y = 0.0;
      for_each_pair_run(g, s.data(), [&](std::size_t x, std::size_t y, long run) {
        for (long j = 0; j < run; ++j) {
          if (mask && !((*mask)[x + j] && (*mask)[y + j])) continue;
          diff += abs_pow(u.values[y + j] - u.values[x + j], p);
          inside_x += up[x + j];
          inside_y += up[y + j];
        }
      });
      T[f] = mask ? diff : diff + 2.0 * *total_p - inside_x - inside_y;
      if (!mask && T[f] < 0.0) T[f] = 0.0;
    }
  });
  return T;
}

std::size_t window_flat(long L, int d, const long* s) {
  std::size_t f = 0;
  for (int i = 0; i < d; ++i) f = f * static_cast<std::size_t>(2 * L + 1) + static_cast<std::size_t>(s[i] + L);
  return f;
}

bool within(long L, int d, const long* s) {
  for (int i = 0; i < d; ++i)
    if (std::labs(s[i]) > L) return false;
  return true;
}

std::vector<double> rounded_correlation(const Grid& g, const GridSet& a, const GridSet& b, long L) {
  std::vector<double> c = correlate(g, as_values(a), as_values(b), L);
  for (double& v : c) v = std::max(0.0, std::round(v));
  return c;
}

}  // namespace

nlohmann::json EnergyReport::to_json() const {
  nlohmann::json j;
  j["value"] = infinite ? nlohmann::json("inf") : nlohmann::json(value);
  j["error"] = error;
  j["near_share"] = near_share;
  j["tail_share"] = tail_share;
  j["method"] = method;
  j["scheme"] = scheme;
  j["infinite"] = infinite;
  j["inconclusive"] = inconclusive;
  return j;
}

long full_extent(const Grid& grid) {
  long L = 0;
  for (long n : grid.n) L = std::max(L, n - 1);
  return L;
}

std::vector<double> correlate(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b,
                              long extent) {
  const int d = grid.d;
  if (a.size() != grid.size() || b.size() != grid.size()) throw std::invalid_argument("correlate: size mismatch");
  if (extent < 0) throw std::invalid_argument("correlate: negative extent");
  std::vector<int> dims(d);
  std::size_t real_n = 1;
  for (int i = 0; i < d; ++i) {
    dims[i] = static_cast<int>(fft_size(grid.n[i] + extent));
    real_n *= static_cast<std::size_t>(dims[i]);
  }
  const std::size_t last = static_cast<std::size_t>(dims[d - 1] / 2 + 1);
  const std::size_t complex_n = real_n / static_cast<std::size_t>(dims[d - 1]) * last;

  std::vector<double> ra(real_n, 0.0), rb(real_n, 0.0);
  std::vector<std::complex<double>> ca(complex_n), cb(complex_n);
  std::vector<long> idx(d);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    if (a[f] == 0.0 && b[f] == 0.0) continue;
    grid.unravel(f, idx.data());
    std::size_t p = 0;
    for (int i = 0; i < d; ++i) p = p * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(idx[i]);
    ra[p] = a[f];
    rb[p] = b[f];
  }
  auto* fa = reinterpret_cast<fftw_complex*>(ca.data());
  auto* fb = reinterpret_cast<fftw_complex*>(cb.data());
  fftw_plan pa, pb, pc;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    pa = fftw_plan_dft_r2c(d, dims.data(), ra.data(), fa, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c(d, dims.data(), rb.data(), fb, FFTW_ESTIMATE);
    pc = fftw_plan_dft_c2r(d, dims.data(), fa, ra.data(), FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < complex_n; ++i) ca[i] = std::conj(ca[i]) * cb[i];
  fftw_execute(pc);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pc);
  }
  const long side = 2 * extent + 1;
  std::size_t out_n = 1;
  for (int i = 0; i < d; ++i) out_n *= static_cast<std::size_t>(side);
  std::vector<double> out(out_n);
  const double scale = 1.0 / static_cast<double>(real_n);
  std::vector<long> s(d);
  for (std::size_t f = 0; f < out_n; ++f) {
    std::size_t g = f;
    for (int i = d - 1; i >= 0; --i) {
      s[i] = static_cast<long>(g % static_cast<std::size_t>(side)) - extent;
      g /= static_cast<std::size_t>(side);
    }
    std::size_t p = 0;
    for (int i = 0; i < d; ++i) {
      long m = ((s[i] % dims[i]) + dims[i]) % dims[i];
      p = p * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(m);
    }
    out[f] = ra[p] * scale;
  }
  return out;
}

EnergyReport seminorm(const GridFunction& u, const WeightTable& w, double p, const GridSet* omega) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  require_spacing(u.grid, w);
  if (omega) require_same_grid(u.grid, omega->grid, "u and Omega");
  if (w.extent() < full_extent(u.grid)) throw std::invalid_argument("weight window does not cover the grid");
  double total_p = 0.0;
  std::vector<double> T = difference_sums(u, w, p, omega, &total_p);
  EnergyReport r = accumulate(w, [&](std::size_t f, const long*) { return T[f]; }, omega ? 0.0 : 2.0 * total_p);
  r.method = "direct";
  return r;
}

EnergyReport seminorm(const GridFunction& u, const Kernel& k, double p, const GridSet* omega, const Scheme& scheme) {
  if (k.dim() != u.grid.d) throw std::invalid_argument("kernel and grid dimensions differ");
  WeightTable w(k, u.grid.h, full_extent(u.grid), scheme);
  return seminorm(u, w, p, omega);
}

EnergyReport perimeter(const GridSet& e, const WeightTable& w, const GridSet* omega) {
  require_spacing(e.grid, w);
  const Grid& g = e.grid;
  const int d = g.d;
  EnergyReport r;
  r.method = "fft";
  r.scheme = w.scheme().name();
  if (!omega) {
    const double nE = static_cast<double>(e.count());
    if (nE == 0.0) return r;
    if (w.extent() < occupied_span(e)) throw std::invalid_argument("weight window does not cover the set");
    const long Lc = std::min(w.extent(), full_extent(g));
    std::vector<double> A = rounded_correlation(g, e, e, Lc);
    r = accumulate(
        w,
        [&](std::size_t, const long* s) { return within(Lc, d, s) ? nE - A[window_flat(Lc, d, s)] : nE; }, nE);
    r.method = "fft";
    return r;
  }
  require_same_grid(g, omega->grid, "E and Omega");
  if (w.extent() < full_extent(g)) throw std::invalid_argument("weight window does not cover the grid");
  const GridSet a = e.intersect(*omega);
  const double nA = static_cast<double>(a.count());
  const GridSet om_minus_e = omega->minus(e);
  const GridSet e_minus_om = e.minus(*omega);
  const GridSet both = omega->unite(e);
  const long L = full_extent(g);
  std::vector<double> ab, ac, bd;
  if (nA > 0.0) {
    ab = rounded_correlation(g, a, om_minus_e, L);
    ac = rounded_correlation(g, a, both, L);
  }
  const bool outer = e_minus_om.count() > 0 && om_minus_e.count() > 0;
  if (outer) bd = rounded_correlation(g, om_minus_e, e_minus_om, L);
  if (nA == 0.0 && !outer) return r;
  r = accumulate(
      w,
      [&](std::size_t, const long* s) {
        double t = 0.0;
        if (within(L, d, s)) {
          std::size_t f = window_flat(L, d, s);
          if (nA > 0.0) t += ab[f] + nA - ac[f];
          if (outer) t += bd[f];
        } else {
          t += nA;
        }
        return t;
      },
      nA);
  r.method = "fft";
  return r;
}

EnergyReport perimeter(const GridSet& e, const Kernel& k, const GridSet* omega, const Scheme& scheme) {
  if (k.dim() != e.grid.d) throw std::invalid_argument("kernel and grid dimensions differ");
  if (!omega && e.count() == 0) {
    EnergyReport r;
    r.method = "fft";
    r.scheme = scheme.name();
    return r;
  }
  long L = omega ? full_extent(e.grid) : std::max(1L, occupied_span(e));
  WeightTable w(k, e.grid.h, L, scheme);
  return perimeter(e, w, omega);
}

EnergyReport interaction_energy(const GridSet& e, const WeightTable& w, EnergyMethod method) {
  require_spacing(e.grid, w);
  if (!w.has_diagonal()) throw std::invalid_argument("interaction energy needs a table with the same-cell weight");
  const Grid& g = e.grid;
  const int d = g.d;
  EnergyReport r;
  r.method = method == EnergyMethod::Fft ? "fft" : "direct";
  r.scheme = w.scheme().name();
  const std::vector<std::size_t> members = e.members();
  if (members.empty()) return r;
  if (w.extent() < occupied_span(e)) throw std::invalid_argument("weight window does not cover the set");
  if (method == EnergyMethod::Fft) {
    if (w.kernel().singular_set() != SingularSet::None)
      throw std::invalid_argument("the fft path needs a bounded kernel; cap it first");
    const long Lc = std::min(w.extent(), full_extent(g));
    std::vector<double> A = rounded_correlation(g, e, e, Lc);
    r = accumulate(
        w, [&](std::size_t, const long* s) { return within(Lc, d, s) ? A[window_flat(Lc, d, s)] : 0.0; }, 0.0, true);
    r.method = "fft";
    return r;
  }

  // Direct double sum; window offsets are differences of per-member keys.
  const long side = w.side();
  std::vector<long> key(members.size());
  std::vector<long> idx(d);
  for (std::size_t m = 0; m < members.size(); ++m) {
    g.unravel(members[m], idx.data());
    long k = 0;
    for (int i = 0; i < d; ++i) k = k * side + idx[i];
    key[m] = k;
  }
  const long centre = static_cast<long>(w.flat(std::vector<long>(d, 0).data()));
  const std::vector<double>& W = w.values();
  const std::size_t block = 256;
  std::vector<double> partial(block_count(members.size(), block), 0.0);
  parallel_blocks(members.size(), block, [&](std::size_t bi, std::size_t b, std::size_t e_) {
    double acc = 0.0;
    for (std::size_t x = b; x < e_; ++x) {
      const long base = centre - key[x];
      double row = 0.0;
      for (std::size_t y = 0; y < key.size(); ++y) row += W[static_cast<std::size_t>(base + key[y])];
      acc += row;
    }
    partial[bi] = acc;
  });
  double v = 0.0;
  for (double p : partial) v += p;
  // Reuse the shell accumulator for shares and the error estimate; its value equals v up to rounding order.
  const long Lc = std::min(w.extent(), full_extent(g));
  std::vector<double> A = rounded_correlation(g, e, e, Lc);
  EnergyReport shape = accumulate(
      w, [&](std::size_t, const long* s) { return within(Lc, d, s) ? A[window_flat(Lc, d, s)] : 0.0; }, 0.0, true);
  r = shape;
  r.method = "direct";
  if (!r.infinite) r.value = v;
  return r;
}

EnergyReport interaction_energy(const GridSet& e, const Kernel& k, EnergyMethod method, const Scheme& scheme) {
  if (k.dim() != e.grid.d) throw std::invalid_argument("kernel and grid dimensions differ");
  if (method == EnergyMethod::Fft && k.singular_set() != SingularSet::None)
    throw std::invalid_argument("the fft path needs a bounded kernel; cap it first");
  Scheme sc = scheme;
  sc.tail_compensation = false;
  WeightTable w(k, e.grid.h, std::max(1L, occupied_span(e)), sc, true);
  return interaction_energy(e, w, method);
}

EnergyReport perimeter_via_energy(const GridSet& e, const Kernel& k, const Scheme& scheme) {
  if (!k.symmetric()) throw std::invalid_argument("perimeter via energy needs a symmetric kernel");
  IntegralResult mass = kernel_integral(k, Region::all());
  if (mass.infinite || !std::isfinite(mass.value)) throw std::invalid_argument("kernel is not integrable");
  EnergyReport r;
  r.scheme = scheme.name();
  r.method = "energy";
  if (e.count() == 0) return r;
  EnergyMethod m = k.singular_set() == SingularSet::None ? EnergyMethod::Fft : EnergyMethod::Direct;
  EnergyReport v = interaction_energy(e, k, m, scheme);
  if (v.infinite) throw std::invalid_argument("interaction energy is infinite");
  r.value = mass.value * e.volume() - v.value;
  r.error = mass.error * e.volume() + v.error + 1e-12 * mass.value * e.volume();
  r.near_share = v.near_share;
  r.inconclusive = mass.inconclusive || v.inconclusive;
  return r;
}

nlohmann::json ProbeResult::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["radii"] = radii;
  nlohmann::json p = nlohmann::json::array();
  for (double v : partial) p.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"));
  j["partial"] = p;
  j["growth"] = growth;
  j["converged"] = converged;
  return j;
}

ProbeResult divergence_probe(const GridFunction& u, const Kernel& k, double p, const ProbeOptions& opt) {
  if (k.dim() != u.grid.d) throw std::invalid_argument("kernel and grid dimensions differ");
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  const Grid& g = u.grid;
  const int d = g.d;
  const double h = g.h;
  const double hd = g.cell_volume();
  Scheme sc;
  sc.tail_compensation = false;
  const long L = std::max(1L, full_extent(g));
  WeightTable w(k, h, L, sc);
  double total_p = 0.0;
  std::vector<double> T = difference_sums(u, w, p, nullptr, &total_p);
  ProbeResult res;
  if (opt.doublings <= 0) throw std::invalid_argument("probe needs at least one radius");

  std::vector<long> s(d);
  auto offset_radius = [&](std::size_t f) {
    w.offset(f, s.data());
    double r2 = 0.0;
    for (long v : s) r2 += static_cast<double>(v * v);
    return std::sqrt(r2) * h;
  };

  if (k.singular_set() == SingularSet::Points) {
    res.mode = "exclusion";
    const auto& pts = k.singular_points();
    double rho_max = kInf;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double n = 0.0;
      for (double v : pts[i]) n += v * v;
      rho_max = std::min(rho_max, std::sqrt(n) / 4.0);
      for (std::size_t j = 0; j < i; ++j) {
        double m = 0.0;
        for (int a = 0; a < d; ++a) m += (pts[i][a] - pts[j][a]) * (pts[i][a] - pts[j][a]);
        rho_max = std::min(rho_max, std::sqrt(m) / 4.0);
      }
    }
    std::vector<double> radii = opt.exclusion_radii;
    if (radii.empty())
      for (int j = 0; j < opt.doublings; ++j) radii.push_back(std::ldexp(rho_max, -j));
    else
      rho_max = *std::max_element(radii.begin(), radii.end());
    // Offsets outside every excluded ball.
    double direct = 0.0;
    bool inf = false;
    for (std::size_t f : w.shell_order()) {
      if (T[f] == 0.0 || w.at(f) == 0.0) continue;
      w.offset(f, s.data());
      bool excluded = false;
      for (const auto& q : pts) {
        double m = 0.0;
        for (int a = 0; a < d; ++a) m += (s[a] * h - q[a]) * (s[a] * h - q[a]);
        if (std::sqrt(m) < rho_max) excluded = true;
      }
      if (excluded) continue;
      if (!std::isfinite(w.at(f))) inf = true;
      else direct += w.at(f) * T[f];
    }
    // Inside the balls the difference sum is frozen at the lattice point nearest the singularity.
    std::vector<double> Tq;
    for (const auto& q : pts) {
      bool in = true;
      for (int a = 0; a < d; ++a) {
        s[a] = std::lround(q[a] / h);
        if (std::labs(s[a]) > L) in = false;
      }
      Tq.push_back(in ? T[w.flat(s.data())] : 2.0 * total_p);
    }
    for (double rho : radii) {
      double v = direct;
      for (std::size_t i = 0; i < pts.size() && rho < rho_max; ++i) {
        if (Tq[i] == 0.0) continue;
        IntegralResult m = annulus_around(k, pts[i], rho, rho_max);
        if (m.infinite) v = kInf;
        else v += Tq[i] * hd * m.value;
      }
      res.radii.push_back(rho);
      res.partial.push_back(inf ? kInf : v);
    }
  } else {
    res.mode = "shells";
    const double r0 = opt.r0 > 0.0 ? opt.r0 : 2.0 * h;
    const double rw = L * h;
    std::vector<std::size_t> order = w.shell_order();
    std::vector<double> rad(w.size(), 0.0);
    for (std::size_t f : order) rad[f] = offset_radius(f);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rad[a] < rad[b]; });
    std::size_t next = 0;
    double direct = 0.0;
    bool inf = false;
    for (int kk = 0; kk < opt.doublings; ++kk) {
      const double R = std::ldexp(r0, kk);
      const double reach = std::min(R, rw);
      while (next < order.size() && rad[order[next]] <= reach * (1.0 + 1e-12)) {
        std::size_t f = order[next++];
        if (T[f] == 0.0 || w.at(f) == 0.0) continue;
        if (!std::isfinite(w.at(f))) inf = true;
        else direct += w.at(f) * T[f];
      }
      double v = direct;
      if (R > rw && total_p > 0.0 && !inf) {
        IntegralResult m = kernel_integral(k, Region::annulus(rw, R));
        if (m.infinite) v = kInf;
        else v += 2.0 * total_p * hd * m.value;
      }
      res.radii.push_back(R);
      res.partial.push_back(inf ? kInf : v);
    }
  }

  double first = 0.0;
  for (double v : res.partial)
    if (v > 0.0) {
      first = v;
      break;
    }
  const double lastv = res.partial.back();
  res.growth = first > 0.0 ? lastv / first : 0.0;
  if (res.partial.size() >= 2) {
    double prev = res.partial[res.partial.size() - 2];
    res.converged = std::isfinite(lastv) && std::abs(lastv - prev) <= 0.01 * std::abs(lastv);
  } else {
    res.converged = std::isfinite(lastv);
  }
  return res;
}

}  // namespace nonloc
