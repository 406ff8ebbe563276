#include "nonloc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nonloc/parallel.hpp"

namespace nonloc {

Grid::Grid(int d_, double h_, std::vector<long> n_, std::vector<double> origin_)
    : d(d_), h(h_), n(std::move(n_)), origin(std::move(origin_)) {
  if (d < 1) throw std::invalid_argument("grid dimension must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (static_cast<int>(n.size()) != d || static_cast<int>(origin.size()) != d)
    throw std::invalid_argument("grid needs one count and one origin per axis");
  for (long c : n)
    if (c < 1) throw std::invalid_argument("grid needs at least one cell per axis");
}

Grid Grid::centered_cube(int d, double h, double half) {
  long m = static_cast<long>(std::ceil(half / h - 1e-9));
  return Grid(d, h, std::vector<long>(d, 2 * m), std::vector<double>(d, -m * h));
}

Grid Grid::box(const std::vector<double>& lo, const std::vector<double>& hi, double h) {
  int d = static_cast<int>(lo.size());
  std::vector<long> n(d);
  for (int i = 0; i < d; ++i) n[i] = std::max(1L, static_cast<long>(std::ceil((hi[i] - lo[i]) / h - 1e-9)));
  return Grid(d, h, n, lo);
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (long c : n) s *= static_cast<std::size_t>(c);
  return s;
}

double Grid::cell_volume() const { return std::pow(h, d); }

std::vector<long> Grid::strides() const {
  std::vector<long> s(d);
  long acc = 1;
  for (int i = d - 1; i >= 0; --i) {
    s[i] = acc;
    acc *= n[i];
  }
  return s;
}

void Grid::unravel(std::size_t flat, long* idx) const {
  for (int i = d - 1; i >= 0; --i) {
    idx[i] = static_cast<long>(flat % static_cast<std::size_t>(n[i]));
    flat /= static_cast<std::size_t>(n[i]);
  }
}

std::size_t Grid::ravel(const long* idx) const {
  std::size_t f = 0;
  for (int i = 0; i < d; ++i) f = f * static_cast<std::size_t>(n[i]) + static_cast<std::size_t>(idx[i]);
  return f;
}

bool Grid::inside(const long* idx) const {
  for (int i = 0; i < d; ++i)
    if (idx[i] < 0 || idx[i] >= n[i]) return false;
  return true;
}

void Grid::center(std::size_t flat, double* x) const {
  for (int i = d - 1; i >= 0; --i) {
    long k = static_cast<long>(flat % static_cast<std::size_t>(n[i]));
    flat /= static_cast<std::size_t>(n[i]);
    x[i] = origin[i] + (k + 0.5) * h;
  }
}

bool Grid::same_as(const Grid& o) const { return d == o.d && h == o.h && n == o.n && origin == o.origin; }

std::string Grid::header() const {
  std::ostringstream s;
  s.precision(17);
  s << d << ' ' << h;
  for (long c : n) s << ' ' << c;
  for (double o : origin) s << ' ' << o;
  return s.str();
}

std::size_t GridSet::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

std::vector<std::size_t> GridSet::members() const {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i]) m.push_back(i);
  return m;
}

GridSet GridSet::complement() const {
  GridSet out(grid);
  for (std::size_t i = 0; i < cells.size(); ++i) out.cells[i] = cells[i] ? 0 : 1;
  return out;
}

namespace {
void require_same(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) throw std::invalid_argument("grid sets live on different grids");
}
}  // namespace

GridSet GridSet::intersect(const GridSet& o) const {
  require_same(grid, o.grid);
  GridSet out(grid);
  for (std::size_t i = 0; i < cells.size(); ++i) out.cells[i] = cells[i] & o.cells[i];
  return out;
}

GridSet GridSet::unite(const GridSet& o) const {
  require_same(grid, o.grid);
  GridSet out(grid);
  for (std::size_t i = 0; i < cells.size(); ++i) out.cells[i] = cells[i] | o.cells[i];
  return out;
}

GridSet GridSet::minus(const GridSet& o) const {
  require_same(grid, o.grid);
  GridSet out(grid);
  for (std::size_t i = 0; i < cells.size(); ++i) out.cells[i] = cells[i] & (o.cells[i] ^ 1);
  return out;
}

GridFunction GridFunction::indicator(const GridSet& s) {
  GridFunction u(s.grid);
  for (std::size_t i = 0; i < s.cells.size(); ++i) u.values[i] = s.cells[i];
  return u;
}

double GridFunction::lp_norm(double p) const {
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

Shape Shape::ball(double radius, std::vector<double> center) {
  Shape s;
  s.balls.push_back({radius, std::move(center)});
  return s;
}

Shape Shape::box(std::vector<double> lo, std::vector<double> hi) {
  Shape s;
  s.boxes.push_back({std::move(lo), std::move(hi)});
  return s;
}

Shape Shape::union_of(const std::vector<Shape>& parts) {
  Shape s;
  for (const auto& p : parts) {
    s.balls.insert(s.balls.end(), p.balls.begin(), p.balls.end());
    s.boxes.insert(s.boxes.end(), p.boxes.begin(), p.boxes.end());
  }
  return s;
}

bool Shape::contains(const double* x, int d) const {
  for (const auto& b : balls) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += (x[i] - b.center[i]) * (x[i] - b.center[i]);
    if (s < b.radius * b.radius) return true;
  }
  for (const auto& b : boxes) {
    bool in = true;
    for (int i = 0; i < d && in; ++i) in = x[i] > b.lo[i] && x[i] < b.hi[i];
    if (in) return true;
  }
  return false;
}

GridSet rasterize(const Grid& grid, const Shape& shape, bool* empty) {
  for (const auto& b : shape.balls)
    if (static_cast<int>(b.center.size()) != grid.d) throw std::invalid_argument("ball center has wrong dimension");
  for (const auto& b : shape.boxes)
    if (static_cast<int>(b.lo.size()) != grid.d || static_cast<int>(b.hi.size()) != grid.d)
      throw std::invalid_argument("box corners have wrong dimension");
  GridSet out(grid);
  parallel_blocks(grid.size(), 1 << 14, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> x(grid.d);
    for (std::size_t i = b; i < e; ++i) {
      grid.center(i, x.data());
      out.cells[i] = shape.contains(x.data(), grid.d) ? 1 : 0;
    }
  });
  if (empty) *empty = out.count() == 0;
  return out;
}

GridFunction forward_difference(const GridFunction& u, const std::vector<long>& shift) {
  const Grid& g = u.grid;
  if (static_cast<int>(shift.size()) != g.d) throw std::invalid_argument("shift has wrong dimension");
  GridFunction out(g);
  auto st = g.strides();
  long off = 0;
  for (int i = 0; i < g.d; ++i) off += shift[i] * st[i];
  parallel_blocks(g.size(), 1 << 14, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<long> idx(g.d);
    for (std::size_t i = b; i < e; ++i) {
      g.unravel(i, idx.data());
      bool in = true;
      for (int a = 0; a < g.d; ++a) {
        long k = idx[a] + shift[a];
        if (k < 0 || k >= g.n[a]) in = false;
      }
      double partner = in ? u.values[static_cast<std::size_t>(static_cast<long>(i) + off)] : 0.0;
      out.values[i] = partner - u.values[i];
    }
  });
  return out;
}

GridFunction mollify(const GridFunction& u, double eps, MollifierBoundary boundary) {
  const Grid& g = u.grid;
  if (!(eps >= g.h)) throw std::invalid_argument("mollifier radius must be at least the grid spacing");
  const int d = g.d;
  const long m = static_cast<long>(std::floor(eps / g.h));
  // Stencil offsets and weights.
  std::vector<std::vector<long>> offs;
  std::vector<double> w;
  std::vector<long> o(d, -m);
  for (;;) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += static_cast<double>(o[i] * o[i]);
    double t = 1.0 - r2 * g.h * g.h / (eps * eps);
    if (t > 0.0) {
      offs.push_back(o);
      w.push_back(t * t);
    }
    int ax = d - 1;
    while (ax >= 0 && ++o[ax] > m) o[ax--] = -m;
    if (ax < 0) break;
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  GridFunction out(g);
  parallel_blocks(g.size(), 1 << 12, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<long> idx(d), k(d);
    for (std::size_t i = b; i < e; ++i) {
      g.unravel(i, idx.data());
      double s = 0.0, mass = 0.0;
      for (std::size_t j = 0; j < offs.size(); ++j) {
        for (int a = 0; a < d; ++a) k[a] = idx[a] - offs[j][a];
        if (!g.inside(k.data())) continue;
        s += w[j] * u.values[g.ravel(k.data())];
        mass += w[j];
      }
      out.values[i] = boundary == MollifierBoundary::Renormalize ? s / mass : s;
    }
  });
  return out;
}

std::vector<std::size_t> distance_ranking(const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> r2(n);
  std::vector<double> x(grid.d);
  for (std::size_t i = 0; i < n; ++i) {
    grid.center(i, x.data());
    double s = 0.0;
    for (double c : x) s += c * c;
    r2[i] = s;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r2[a] < r2[b]; });
  return order;
}

GridSet rearrange(const GridSet& s) {
  auto order = distance_ranking(s.grid);
  GridSet out(s.grid);
  std::size_t c = s.count();
  for (std::size_t i = 0; i < c; ++i) out.cells[order[i]] = 1;
  return out;
}

GridFunction rearrange(const GridFunction& u) {
  auto order = distance_ranking(u.grid);
  std::vector<double> a(u.values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(u.values[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  GridFunction out(u.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out.values[order[i]] = a[i];
  return out;
}

double mean(const GridFunction& u, const GridSet& omega) {
  require_same(u.grid, omega.grid);
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i)
    if (omega.cells[i]) {
      s += u.values[i];
      ++c;
    }
  if (c == 0) throw std::invalid_argument("mean over an empty set");
  return s / static_cast<double>(c);
}

void write_grid(const std::string& path, const GridFunction& u, bool binary, const std::string& comment) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  if (!comment.empty()) f << "# " << comment << '\n';
  if (binary) {
    f << "binary " << u.grid.header() << '\n';
    f.write(reinterpret_cast<const char*>(u.values.data()),
            static_cast<std::streamsize>(u.values.size() * sizeof(double)));
    return;
  }
  f << u.grid.header() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", u.values[i]);
    f << buf << ((i + 1) % static_cast<std::size_t>(u.grid.n.back()) == 0 ? '\n' : ' ');
  }
}

void write_grid(const std::string& path, const GridSet& s, const std::string& comment) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  if (!comment.empty()) f << "# " << comment << '\n';
  f << s.grid.header() << '\n';
  for (std::size_t i = 0; i < s.cells.size(); ++i)
    f << static_cast<int>(s.cells[i]) << ((i + 1) % static_cast<std::size_t>(s.grid.n.back()) == 0 ? '\n' : ' ');
}

GridFunction read_grid_function(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(f, line) && line.rfind('#', 0) == 0) {
  }
  std::istringstream hs(line);
  bool binary = false;
  if (line.rfind("binary", 0) == 0) {
    binary = true;
    std::string tag;
    hs >> tag;
  }
  int d = 0;
  double h = 0.0;
  if (!(hs >> d >> h) || d < 1) throw std::runtime_error(path + ": malformed grid header");
  std::vector<long> n(d);
  std::vector<double> o(d);
  for (auto& c : n)
    if (!(hs >> c)) throw std::runtime_error(path + ": malformed grid header");
  for (auto& c : o)
    if (!(hs >> c)) throw std::runtime_error(path + ": malformed grid header");
  GridFunction u(Grid(d, h, n, o));
  if (binary) {
    f.read(reinterpret_cast<char*>(u.values.data()), static_cast<std::streamsize>(u.values.size() * sizeof(double)));
    if (!f) throw std::runtime_error(path + ": truncated binary grid");
  } else {
    for (auto& v : u.values)
      if (!(f >> v)) throw std::runtime_error(path + ": expected " + std::to_string(u.values.size()) + " values");
  }
  for (double v : u.values)
    if (!std::isfinite(v)) throw std::runtime_error(path + ": grid values must be finite");
  return u;
}

GridSet read_grid_set(const std::string& path) {
  GridFunction u = read_grid_function(path);
  GridSet s(u.grid);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (u.values[i] != 0.0 && u.values[i] != 1.0) throw std::runtime_error(path + ": set values must be 0 or 1");
    s.cells[i] = u.values[i] == 1.0;
  }
  return s;
}

}  // namespace nonloc
