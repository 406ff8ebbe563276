#include "run_config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace nonloc::cli {

const std::vector<std::string> kCommands = {"certify",  "integral",       "seminorm",    "perimeter", "energy",
                                            "curvature", "closedform",     "extend",      "ballcurve", "optimize",
                                            "counterexample", "poincare",  "sobolev-check", "rel-iso", "probe"};

namespace {

const std::set<std::string> kKeys = {
    "command", "kernel", "output", "seed", "norm",
    "grid_h", "grid_half", "grid_lo", "grid_hi",
    "scheme_near", "scheme_near_cells", "scheme_tail",
    "set_file", "set_ball", "set_box", "omega_file", "omega_ball", "omega_box",
    "function_file", "function_bump",
    "p", "q", "r", "radii", "masses", "point", "eps0", "levels", "method",
    "hypothesis", "samples", "r_min", "r_max", "nts_p", "doubling_radius",
    "region", "radius", "inner", "outer", "weight_p",
    "width", "mode", "iterations", "cooling", "t0", "moves_per_temperature",
    "delta", "x0", "count", "slope_tol", "r0", "doublings", "exclusion_radii"};

const std::set<std::string> kRepeatable = {"set_ball", "set_box", "omega_ball", "omega_box"};

ParseError at(const SpecEntry& e, const std::string& msg) { return ParseError(e.line, e.value_column, msg); }

}  // namespace

RunConfig RunConfig::parse(const std::string& contents, const std::string& base_dir) {
  RunConfig c;
  c.text = KeyValueText::parse(contents);
  c.base_dir = base_dir;
  std::set<std::string> seen;
  for (const auto& e : c.text.entries()) {
    if (!kKeys.count(e.key)) throw ParseError(e.line, 1, "unknown key '" + e.key + "'");
    if (!kRepeatable.count(e.key) && !seen.insert(e.key).second)
      throw ParseError(e.line, 1, "duplicate key '" + e.key + "'");
    if (e.key == "command" && std::find(kCommands.begin(), kCommands.end(), e.value) == kCommands.end())
      throw at(e, "unknown command '" + e.value + "'");
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return parse(ss.str(), dir.empty() ? "." : dir.string());
}

std::string RunConfig::to_text() const { return text.to_text(); }

std::uint64_t RunConfig::seed() const {
  const SpecEntry* e = text.find("seed");
  if (!e) return 1;
  double v = parse_number(*e);
  if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) throw at(*e, "seed must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::string RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

std::string RunConfig::kernel_text() const {
  const SpecEntry* e = text.find("kernel");
  if (!e) throw ParseError(0, 0, "missing required key 'kernel'");
  std::ifstream f(resolve(e->value));
  if (!f) throw at(*e, "cannot open kernel spec '" + e->value + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Kernel RunConfig::kernel() const {
  std::string body = kernel_text();
  try {
    return construct_from_text(body);
  } catch (const ParseError& ex) {
    const SpecEntry* e = text.find("kernel");
    throw ParseError(ex.line(), ex.column(), "in kernel spec '" + e->value + "': " + ex.what());
  }
}

std::string RunConfig::hash() const {
  std::string canon;
  for (const auto& e : text.entries())
    if (e.key != "output") canon += e.key + " = " + e.value + "\n";
  canon += "--- kernel ---\n";
  canon += KeyValueText::parse(kernel_text()).to_text();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canon.data(), canon.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Scheme RunConfig::scheme() const {
  Scheme s;
  if (const SpecEntry* e = text.find("scheme_near")) {
    if (e->value == "exclude-diagonal") s.near = Scheme::NearField::ExcludeDiagonal;
    else if (e->value == "cell-pair-correction") s.near = Scheme::NearField::CellPairCorrection;
    else throw at(*e, "expected exclude-diagonal or cell-pair-correction");
  }
  s.near_cells = static_cast<int>(text.get_int("scheme_near_cells", s.near_cells));
  if (const SpecEntry* e = text.find("scheme_tail")) {
    if (e->value == "true") s.tail_compensation = true;
    else if (e->value == "false") s.tail_compensation = false;
    else throw at(*e, "expected true or false");
  }
  return s;
}

Grid RunConfig::grid(int d) const {
  if (d < 1 || d > 3) throw ParseError(0, 0, "the command line tool supports dimensions 1 to 3");
  const SpecEntry* he = text.find("grid_h");
  if (!he) throw ParseError(0, 0, "missing required key 'grid_h'");
  double h = parse_number(*he);
  if (!(h > 0.0)) throw at(*he, "grid_h must be positive");
  if (text.has("grid_lo") || text.has("grid_hi")) {
    std::vector<double> lo = text.get_list("grid_lo"), hi = text.get_list("grid_hi");
    const SpecEntry* e = text.find(text.has("grid_lo") ? "grid_lo" : "grid_hi");
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
      throw at(*e, "grid_lo and grid_hi need " + std::to_string(d) + " entries each");
    for (int i = 0; i < d; ++i)
      if (!(hi[i] > lo[i])) throw at(*e, "grid_hi must exceed grid_lo");
    return Grid::box(lo, hi, h);
  }
  const SpecEntry* ce = text.find("grid_half");
  if (!ce) throw ParseError(0, 0, "missing grid extent: give grid_half or grid_lo/grid_hi");
  double half = parse_number(*ce);
  if (!(half > 0.0)) throw at(*ce, "grid_half must be positive");
  return Grid::centered_cube(d, h, half);
}

bool RunConfig::has_set(const std::string& prefix) const {
  return text.has(prefix + "_file") || text.has(prefix + "_ball") || text.has(prefix + "_box");
}

GridSet RunConfig::set(const std::string& prefix, int d, const Grid* on) const {
  if (const SpecEntry* f = text.find(prefix + "_file")) {
    GridSet s;
    try {
      s = read_grid_set(resolve(f->value));
    } catch (const std::runtime_error& ex) {
      throw at(*f, ex.what());
    }
    if (s.grid.d != d) throw at(*f, "set dimension does not match the kernel");
    return s;
  }
  Grid g = on ? *on : grid(d);
  std::vector<Shape> parts;
  for (const auto& e : text.entries()) {
    if (e.key == prefix + "_ball") {
      std::vector<double> v = parse_number_list(e);
      if (static_cast<int>(v.size()) != d + 1) throw at(e, "expected radius followed by " + std::to_string(d) + " center coordinates");
      if (!(v[0] > 0.0)) throw at(e, "radius must be positive");
      parts.push_back(Shape::ball(v[0], std::vector<double>(v.begin() + 1, v.end())));
    } else if (e.key == prefix + "_box") {
      std::vector<double> v = parse_number_list(e);
      if (static_cast<int>(v.size()) != 2 * d) throw at(e, "expected " + std::to_string(d) + " low then " + std::to_string(d) + " high coordinates");
      parts.push_back(Shape::box(std::vector<double>(v.begin(), v.begin() + d), std::vector<double>(v.begin() + d, v.end())));
    }
  }
  if (parts.empty()) throw ParseError(0, 0, "missing " + prefix + "_file, " + prefix + "_ball or " + prefix + "_box");
  bool empty = false;
  GridSet s = rasterize(g, Shape::union_of(parts), &empty);
  if (empty) {
    const SpecEntry* e = text.find(prefix + "_ball");
    if (!e) e = text.find(prefix + "_box");
    throw at(*e, prefix + " covers no grid cell");
  }
  return s;
}

GridFunction RunConfig::function(int d) const {
  if (const SpecEntry* f = text.find("function_file")) {
    GridFunction u;
    try {
      u = read_grid_function(resolve(f->value));
    } catch (const std::runtime_error& ex) {
      throw at(*f, ex.what());
    }
    if (u.grid.d != d) throw at(*f, "function dimension does not match the kernel");
    return u;
  }
  const SpecEntry* b = text.find("function_bump");
  if (!b) throw ParseError(0, 0, "missing function_file or function_bump");
  std::vector<double> v = parse_number_list(*b);
  if (static_cast<int>(v.size()) != d + 1) throw at(*b, "expected radius followed by " + std::to_string(d) + " center coordinates");
  if (!(v[0] > 0.0)) throw at(*b, "radius must be positive");
  Grid g = grid(d);
  GridFunction u(g);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.center(i, x.data());
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (x[a] - v[a + 1]) * (x[a] - v[a + 1]);
    double t = std::max(0.0, 1.0 - r2 / (v[0] * v[0]));
    u.values[i] = t * t;
  }
  return u;
}

}  // namespace nonloc::cli
