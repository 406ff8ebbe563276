#include "nonloc/isoperimetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "nonloc/closedform1d.hpp"
#include "nonloc/functional.hpp"
#include "nonloc/kernel_integral.hpp"
#include "nonloc/parallel.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ball_volume(int d, double r) { return sphere_area(d) * std::pow(r, d) / d; }

double ball_radius(int d, double m) { return std::pow(m * d / sphere_area(d), 1.0 / d); }

double kernel_mass(const Kernel& k) {
  IntegralResult m = kernel_integral(k, Region::all());
  if (m.infinite) throw std::invalid_argument("kernel is not integrable");
  return m.value;
}

// Grid with cell faces on the lattice h Z^d covering [-half, half]^d.
Grid lattice_cube(int d, double h, double half) {
  long c = static_cast<long>(std::ceil(half / h - 1e-9));
  return Grid(d, h, std::vector<long>(d, 2 * c), std::vector<double>(d, -c * h));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Face-connected components of a cell set; returns the component label per member.
std::vector<int> components(const GridSet& s, const std::vector<std::size_t>& members, int* count) {
  const Grid& g = s.grid;
  std::vector<int> label(g.size(), -1);
  std::vector<int> out(members.size(), -1);
  int c = 0;
  std::vector<long> idx(g.d);
  for (std::size_t m : members) {
    if (label[m] >= 0) continue;
    std::vector<std::size_t> stack{m};
    label[m] = c;
    while (!stack.empty()) {
      std::size_t cur = stack.back();
      stack.pop_back();
      g.unravel(cur, idx.data());
      for (int a = 0; a < g.d; ++a) {
        for (int dir : {-1, 1}) {
          idx[a] += dir;
          if (g.inside(idx.data())) {
            std::size_t nb = g.ravel(idx.data());
            if (s.cells[nb] && label[nb] < 0) {
              label[nb] = c;
              stack.push_back(nb);
            }
          }
          idx[a] -= dir;
        }
      }
    }
    ++c;
  }
  for (std::size_t i = 0; i < members.size(); ++i) out[i] = label[members[i]];
  *count = c;
  return out;
}

}  // namespace

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["lhs"] = number(lhs);
  j["rhs"] = number(rhs);
  j["constant"] = number(constant);
  j["verdict"] = verdict;
  j["details"] = details;
  return j;
}

// ---- ball curves ----

nlohmann::json BallCurve::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["h"] = h;
  j["radii"] = radii;
  nlohmann::json p = nlohmann::json::array(), e = nlohmann::json::array();
  for (double v : perimeter) p.push_back(number(v));
  for (double v : error) e.push_back(number(v));
  j["perimeter"] = p;
  j["error"] = e;
  j["volume"] = volume;
  j["monotone"] = monotone;
  j["verdict"] = verdict;
  return j;
}

std::string BallCurve::to_csv() const {
  std::ostringstream os;
  os << "r [length],P_K(B_r) [kernel mass x length^d],error [same as P],volume [length^d]\n";
  for (std::size_t i = 0; i < radii.size(); ++i)
    os << fmt(radii[i]) << ',' << fmt(perimeter[i]) << ',' << fmt(error[i]) << ',' << fmt(volume[i]) << '\n';
  return os.str();
}

BallCurve ball_curve(const Kernel& k, const std::vector<double>& radii, double h, const Scheme& scheme) {
  if (radii.empty()) throw std::invalid_argument("radii must not be empty");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must increase");
  }
  const int d = k.dim();
  BallCurve c;
  c.d = d;
  c.h = h;
  c.radii = radii;
  Grid g = lattice_cube(d, h, radii.back() + h);
  WeightTable w(k, h, full_extent(g), scheme);
  const std::vector<double> origin(d, 0.0);
  for (double r : radii) {
    GridSet e = rasterize(g, Shape::ball(r, origin));
    EnergyReport rep = perimeter(e, w);
    double vol = e.volume(), exact = ball_volume(d, r);
    double raster = std::isfinite(rep.value) ? std::abs(rep.value) * std::abs(vol - exact) / exact : 0.0;
    c.perimeter.push_back(rep.value);
    c.error.push_back(rep.error + raster);
    c.volume.push_back(vol);
  }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    double a = c.perimeter[i], b = c.perimeter[i + 1];
    if (std::isinf(b)) continue;
    if (std::isinf(a)) {
      c.monotone = false;
      continue;
    }
    double slack = c.error[i] + c.error[i + 1] + 1e-12 * std::max(std::abs(a), std::abs(b));
    if (b < a - slack) c.monotone = false;
  }
  c.verdict = c.monotone ? "pass" : "fail";
  return c;
}

// ---- first variation ----

nlohmann::json FirstVariation::to_json() const {
  return {{"r", r},
          {"derivative", derivative},
          {"surface_sum", surface_sum},
          {"discrepancy", discrepancy},
          {"jitters", jitters}};
}

FirstVariation first_variation_check(const Kernel& k, double r, double h, double step, int jitters,
                                     int boundary_points, std::uint64_t seed) {
  const int d = k.dim();
  if (d > 2) throw std::invalid_argument("first variation check supports d = 1 and d = 2");
  if (k.singular_set() != SingularSet::None) throw std::invalid_argument("kernel must be bounded; cap it first");
  if (!(h > 0.0) || !(r > 0.0)) throw std::invalid_argument("r and h must be positive");
  FirstVariation out;
  if (d == 1) {
    // Faces on the lattice make the rasterized intervals exact.
    r = std::max(1.0, std::round(r / h)) * h;
    step = step > 0.0 ? std::max(1.0, std::round(step / h)) * h : 2.0 * h;
    if (step >= r) throw std::invalid_argument("step must be smaller than r");
    jitters = 1;
  } else {
    if (step <= 0.0) step = std::max(2.0 * h, 0.1 * r);
    if (jitters <= 0) jitters = 4;
  }
  out.r = r;
  out.jitters = jitters;
  const double mass = kernel_mass(k);
  Grid g = lattice_cube(d, h, r + step + 4.0 * h);
  WeightTable w(k, h, full_extent(g));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jit(-0.5 * h, 0.5 * h);
  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j < jitters; ++j) {
    std::vector<double> c(d, 0.0);
    if (d > 1)
      for (int i = 0; i < d; ++i) c[i] = jit(rng);
    double up = perimeter(rasterize(g, Shape::ball(r + step, c)), w).value;
    double down = perimeter(rasterize(g, Shape::ball(r - step, c)), w).value;
    lhs += (up - down) / (2.0 * step);
    GridSet e = rasterize(g, Shape::ball(r, c));
    double surf = 0.0;
    if (d == 1) {
      surf = curvature_bounded(e, {c[0] + r}, k, mass) + curvature_bounded(e, {c[0] - r}, k, mass);
    } else {
      const int n = boundary_points;
      for (int t = 0; t < n; ++t) {
        double th = 2.0 * std::numbers::pi * (t + 0.5) / n;
        std::vector<double> x{c[0] + r * std::cos(th), c[1] + r * std::sin(th)};
        surf += curvature_bounded(e, x, k, mass) * (2.0 * std::numbers::pi * r / n);
      }
    }
    rhs += surf;
  }
  out.derivative = lhs / jitters;
  out.surface_sum = rhs / jitters;
  double scale = std::max(std::abs(out.derivative), std::abs(out.surface_sum));
  if (scale <= 1e-9 * std::max(1.0, mass)) out.discrepancy = 0.0;
  else out.discrepancy = std::abs(out.derivative - out.surface_sum) / std::max(std::abs(out.derivative), 1e-300);
  return out;
}

// ---- two-ball counterexample ----

InequalityReport two_ball_counterexample(const Kernel& base, double delta, double r, const std::vector<double>& x0,
                                         double h) {
  const int d = base.dim();
  if (static_cast<int>(x0.size()) != d) throw std::invalid_argument("x0 dimension mismatch");
  if (!(delta > 0.0) || !(r > 0.0) || !(h > 0.0)) throw std::invalid_argument("delta, r and h must be positive");
  if (r > 0.5 * delta) throw std::invalid_argument("r must not exceed delta / 2: the ball would interact with itself");
  Kernel kd = truncate(base, {Truncation::Mode::OutsideBall, delta});
  double dist = 0.0;
  for (double v : x0) dist += v * v;
  dist = std::sqrt(dist);
  if (!(dist > delta) || !(kd.at(x0) > 0.0))
    throw std::invalid_argument("x0 must lie in the interior of the positivity set of the truncated kernel");
  const double mass = kernel_mass(kd);
  const double r2 = r / std::pow(2.0, 1.0 / d);

  double reach = r;
  for (double v : x0) reach = std::max(reach, 0.5 * std::abs(v) + r2);
  Grid g = lattice_cube(d, h, reach + 2.0 * h);
  std::vector<double> plus(d), minus(d);
  for (int i = 0; i < d; ++i) {
    plus[i] = 0.5 * x0[i];
    minus[i] = -0.5 * x0[i];
  }
  GridSet single = rasterize(g, Shape::ball(r, std::vector<double>(d, 0.0)));
  GridSet two = rasterize(g, Shape::union_of({Shape::ball(r2, plus), Shape::ball(r2, minus)}));

  WeightTable w(kd, h, full_extent(g), Scheme{}, true);
  double v_ball = interaction_energy(single, w, EnergyMethod::Direct).value;
  double v_two = interaction_energy(two, w, EnergyMethod::Direct).value;
  GridSet half_one = rasterize(g, Shape::ball(r2, plus));
  GridSet half_two = rasterize(g, Shape::ball(r2, minus));
  double v_self = interaction_energy(half_one, w, EnergyMethod::Direct).value +
                  interaction_energy(half_two, w, EnergyMethod::Direct).value;
  double v_cross = v_two - v_self;
  double p_ball = mass * single.volume() - v_ball;
  double p_two = mass * two.volume() - v_two;

  // Cross pairs have offsets in the ball of radius 2 r2 around x0.
  double kmin = kInf;
  bool sampled = false;
  if (dist - 2.0 * r2 < delta) {
    kmin = 0.0;
  } else if (kd.is_radial() && base.radially_nonincreasing()) {
    kmin = kd.radial(dist + 2.0 * r2);
  } else {
    sampled = true;
    const int n = 64;
    std::vector<double> z(d);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b <= 8; ++b) {
        double rad = 2.0 * r2 * b / 8.0;
        for (int i = 0; i < d; ++i) z[i] = x0[i];
        if (d == 1) z[0] += (a % 2 ? rad : -rad);
        else {
          double th = 2.0 * std::numbers::pi * a / n;
          z[0] += rad * std::cos(th);
          z[1] += rad * std::sin(th);
        }
        kmin = std::min(kmin, kd(z.data()));
      }
    }
  }
  const double half_mass = 0.5 * ball_volume(d, r);
  const double lower = 2.0 * half_mass * half_mass * kmin;
  const double margin = 0.5 * lower;

  InequalityReport rep;
  rep.id = "two-ball";
  rep.lhs = p_two;
  rep.rhs = p_ball;
  rep.constant = 1.0;
  rep.verdict = (v_cross > 0.0 && p_two + margin <= p_ball) ? "holds" : "fails";
  rep.details = {{"kernel_mass", mass},
                 {"delta", delta},
                 {"r", r},
                 {"r_half", r2},
                 {"x0", x0},
                 {"h", h},
                 {"volume_ball", single.volume()},
                 {"volume_two", two.volume()},
                 {"energy_ball", v_ball},
                 {"energy_cross", v_cross},
                 {"cross_lower_bound", lower},
                 {"lower_bound_sampled", sampled},
                 {"margin", margin},
                 {"perimeter_ball", p_ball},
                 {"perimeter_two", p_two}};
  return rep;
}

// ---- Poincare ----

namespace {

struct Rayleigh {
  const Eigen::MatrixXd& a;
  double p;
  double cell;

  double semi(const Eigen::VectorXd& u) const {
    const long n = u.size();
    double s = 0.0;
    for (long i = 0; i < n; ++i)
      for (long j = i + 1; j < n; ++j) {
        double w = a(i, j);
        if (w != 0.0) s += w * std::pow(std::abs(u[i] - u[j]), p);
      }
    return 2.0 * s;
  }
  double dev(const Eigen::VectorXd& u) const {
    double m = u.mean(), s = 0.0;
    for (long i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i] - m), p);
    return s * cell;
  }
  double quotient(const Eigen::VectorXd& u) const {
    double dv = dev(u);
    if (!(dv > 0.0)) return kInf;
    return semi(u) / dv;
  }

  // One sweep of coordinate descent with golden-section line searches.
  void sweep(Eigen::VectorXd& u) const {
    const long n = u.size();
    double lo = u.minCoeff(), hi = u.maxCoeff();
    if (!(hi > lo)) return;
    double sv = semi(u), total = u.sum();
    for (long i = 0; i < n; ++i) {
      const double old = u[i];
      auto q_at = [&](double t, double* s_out) {
        double ds = 0.0;
        for (long j = 0; j < n; ++j) {
          if (j == i) continue;
          double w = a(i, j);
          if (w != 0.0) ds += w * (std::pow(std::abs(t - u[j]), p) - std::pow(std::abs(old - u[j]), p));
        }
        double s = sv + 2.0 * ds;
        double m = (total - old + t) / static_cast<double>(n), dv = std::pow(std::abs(t - m), p);
        for (long j = 0; j < n; ++j)
          if (j != i) dv += std::pow(std::abs(u[j] - m), p);
        dv *= cell;
        if (s_out) *s_out = s;
        return dv > 0.0 ? s / dv : kInf;
      };
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = q_at(x1, nullptr), f2 = q_at(x2, nullptr);
      double a0 = lo, b0 = hi;
      for (int it = 0; it < 30; ++it) {
        if (f1 < f2) {
          b0 = x2;
          x2 = x1;
          f2 = f1;
          x1 = b0 - gr * (b0 - a0);
          f1 = q_at(x1, nullptr);
        } else {
          a0 = x1;
          x1 = x2;
          f1 = f2;
          x2 = a0 + gr * (b0 - a0);
          f2 = q_at(x2, nullptr);
        }
      }
      double t = f1 < f2 ? x1 : x2;
      double s_new = 0.0;
      double q_new = q_at(t, &s_new), q_old = q_at(old, nullptr);
      if (q_new < q_old) {
        u[i] = t;
        sv = s_new;
        total += t - old;
      }
    }
  }
};

double inf_on_ball(const Kernel& k, double radius, bool* sampled) {
  const int d = k.dim();
  const int nr = 2000;
  double m = kInf;
  if (k.is_radial()) {
    *sampled = false;
    for (int i = 1; i <= nr; ++i) m = std::min(m, k.radial(radius * i / nr));
    for (double b : k.radial_breaks()) {
      if (b <= 0.0 || b > radius) continue;
      for (double t : {b * (1.0 - 1e-12), b, std::min(radius, b * (1.0 + 1e-12))}) m = std::min(m, k.radial(t));
    }
    return m;
  }
  *sampled = true;
  std::vector<std::vector<double>> dirs;
  if (d == 1) dirs = {{1.0}, {-1.0}};
  else if (d == 2)
    for (int a = 0; a < 64; ++a) {
      double th = 2.0 * std::numbers::pi * a / 64;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  else
    for (int a = 0; a < 256; ++a) {
      double zc = 1.0 - 2.0 * (a + 0.5) / 256, rr = std::sqrt(1.0 - zc * zc), th = a * 2.399963229728653;
      dirs.push_back({rr * std::cos(th), rr * std::sin(th), zc});
    }
  std::vector<double> z(d);
  for (const auto& e : dirs)
    for (int i = 1; i <= nr / 10; ++i) {
      for (int a = 0; a < d; ++a) z[a] = e[a] * radius * i / (nr / 10);
      m = std::min(m, k(z.data()));
    }
  return m;
}

}  // namespace

InequalityReport poincare_constant(const GridSet& omega, const Kernel& k, double p, PoincareMode mode,
                                   std::uint64_t seed) {
  const Grid& g = omega.grid;
  const int d = g.d;
  if (k.dim() != d) throw std::invalid_argument("dimension mismatch");
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  std::vector<std::size_t> members = omega.members();
  const long n = static_cast<long>(members.size());
  if (n == 0) throw std::invalid_argument("Omega is empty");
  const double cell = g.cell_volume();
  const double vol = n * cell;

  InequalityReport rep;
  rep.details["p"] = p;
  rep.details["cells"] = n;
  rep.details["volume"] = vol;

  std::vector<std::vector<double>> centers(n, std::vector<double>(d));
  for (long i = 0; i < n; ++i) g.center(members[i], centers[i].data());

  if (mode == PoincareMode::RemarkBound) {
    rep.id = "poincare-remark-bound";
    double diam = 0.0;
    std::vector<double> lo(d, kInf), hi(d, -kInf);
    for (const auto& c : centers)
      for (int i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], c[i] - 0.5 * g.h);
        hi[i] = std::max(hi[i], c[i] + 0.5 * g.h);
      }
    if (n <= 4000) {
      for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) {
          double s = 0.0;
          for (int a = 0; a < d; ++a) {
            double t = std::abs(centers[i][a] - centers[j][a]) + g.h;
            s += t * t;
          }
          diam = std::max(diam, s);
        }
      diam = std::max(std::sqrt(diam), std::sqrt(static_cast<double>(d)) * g.h);
    } else {
      for (int i = 0; i < d; ++i) diam += (hi[i] - lo[i]) * (hi[i] - lo[i]);
      diam = std::sqrt(diam);
    }
    bool sampled = false;
    double kinf = inf_on_ball(k, diam, &sampled);
    rep.details["diameter"] = diam;
    rep.details["kernel_inf"] = kinf;
    rep.details["kernel_inf_sampled"] = sampled;
    if (!(kinf > 0.0)) {
      rep.constant = kInf;
      rep.verdict = "inconclusive";
      rep.details["note"] = "kernel vanishes somewhere on the diameter ball";
      return rep;
    }
    rep.constant = std::pow(1.0 / (vol * kinf), 1.0 / p);
    // Evaluate both sides on the first coordinate function.
    GridFunction u(g);
    for (long i = 0; i < n; ++i) u.values[members[i]] = centers[i][0];
    double mean_u = mean(u, omega), dev = 0.0;
    for (long i = 0; i < n; ++i) dev += std::pow(std::abs(centers[i][0] - mean_u), p) * cell;
    EnergyReport s = seminorm(u, k, p, &omega);
    rep.lhs = std::pow(dev, 1.0 / p);
    rep.rhs = std::pow(s.value, 1.0 / p);
    rep.verdict = rep.lhs <= rep.constant * rep.rhs * (1.0 + 1e-9) + 1e-12 ? "holds" : "fails";
    return rep;
  }

  rep.id = "poincare-rayleigh-estimate";
  if (n > 2500) throw std::invalid_argument("rayleigh minimization supports at most 2500 cells");
  WeightTable w(k, g.h, full_extent(g));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  {
    std::vector<long> ii(d), jj(d), s(d);
    for (long i = 0; i < n; ++i) {
      g.unravel(members[i], ii.data());
      for (long j = i + 1; j < n; ++j) {
        g.unravel(members[j], jj.data());
        for (int t = 0; t < d; ++t) s[t] = jj[t] - ii[t];
        double v = w(s.data());
        a(i, j) = v;
        a(j, i) = v;
      }
    }
  }
  if (!a.allFinite()) throw std::invalid_argument("cell-pair weights are not finite");
  Rayleigh ray{a, p, cell};

  auto to_grid = [&](const Eigen::VectorXd& u) {
    GridFunction f(g);
    for (long i = 0; i < n; ++i) f.values[members[i]] = u[i];
    return f;
  };

  // Components of the interaction graph: any split gives a zero quotient.
  // Weights below round-off of the largest one count as no interaction.
  const double cut = 1e-12 * a.cwiseAbs().maxCoeff();
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (long s0 = 0; s0 < n; ++s0) {
    if (comp[s0] >= 0) continue;
    std::vector<long> stack{s0};
    comp[s0] = ncomp;
    while (!stack.empty()) {
      long i = stack.back();
      stack.pop_back();
      for (long j = 0; j < n; ++j)
        if (comp[j] < 0 && a(i, j) > cut) {
          comp[j] = ncomp;
          stack.push_back(j);
        }
    }
    ++ncomp;
  }
  rep.details["interaction_components"] = ncomp;
  if (ncomp > 1) {
    Eigen::VectorXd u(n);
    for (long i = 0; i < n; ++i) u[i] = comp[i] == 0 ? 0.0 : 1.0;
    double sv = ray.semi(u), dv = ray.dev(u);
    rep.lhs = std::pow(dv, 1.0 / p);
    rep.rhs = std::pow(sv, 1.0 / p);
    rep.constant = kInf;
    rep.verdict = "fails";
    rep.details["quotient"] = sv / dv;
    rep.details["witness"] = "0 on the first interaction component, 1 elsewhere";
    rep.witness = to_grid(u);
    return rep;
  }

  std::vector<Eigen::VectorXd> starts;
  if (n >= 2) {
    Eigen::MatrixXd lap = -a;
    for (long i = 0; i < n; ++i) lap(i, i) = a.row(i).sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    for (long c = 1; c < std::min<long>(n, 3); ++c) starts.push_back(es.eigenvectors().col(c));
    // Threshold sets of the second eigenvector.
    Eigen::VectorXd f = es.eigenvectors().col(1);
    std::vector<double> sorted(f.data(), f.data() + n);
    std::sort(sorted.begin(), sorted.end());
    for (int t = 1; t < 32; ++t) {
      double thr = sorted[std::min<long>(n - 1, t * n / 32)];
      Eigen::VectorXd u(n);
      for (long i = 0; i < n; ++i) u[i] = f[i] >= thr ? 1.0 : 0.0;
      starts.push_back(u);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int r = 0; r < 4; ++r) {
    Eigen::VectorXd u(n);
    for (long i = 0; i < n; ++i) u[i] = uni(rng);
    starts.push_back(u);
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < starts.size(); ++i) ranked.push_back({ray.quotient(starts[i]), i});
  std::sort(ranked.begin(), ranked.end());
  Eigen::VectorXd best = starts[ranked.front().second];
  double best_q = ranked.front().first;
  // The second eigenvector is the exact discrete minimizer for p = 2.
  if (p != 2.0) {
    const int sweeps = static_cast<int>(std::clamp(2e8 / (30.0 * n * n), 1.0, 20.0));
    for (std::size_t c = 0; c < std::min<std::size_t>(3, ranked.size()); ++c) {
      Eigen::VectorXd u = starts[ranked[c].second];
      if (!std::isfinite(ranked[c].first)) continue;
      for (int s = 0; s < sweeps; ++s) {
        ray.sweep(u);
        double dv = std::pow(ray.dev(u), 1.0 / p);
        if (dv > 0.0) u = (u.array() - u.mean()) / dv;
      }
      double q = ray.quotient(u);
      if (q < best_q) {
        best_q = q;
        best = u;
      }
    }
  }
  double dv = ray.dev(best), sv = ray.semi(best);
  rep.lhs = std::pow(dv, 1.0 / p);
  rep.rhs = std::pow(sv, 1.0 / p);
  rep.constant = best_q > 0.0 ? std::pow(1.0 / best_q, 1.0 / p) : kInf;
  rep.verdict = std::isfinite(rep.constant) ? "holds" : "fails";
  rep.details["quotient"] = best_q;
  rep.details["label"] = "estimate";
  rep.details["starts"] = starts.size();
  rep.witness = to_grid(best);
  return rep;
}

// ---- Sobolev assumption ----

Kernel rearranged_kernel(const Kernel& k, double h, double half) {
  if (k.is_radial() && k.radially_nonincreasing()) return k;
  const int d = k.dim();
  if (!(h > 0.0) || !(half > h)) throw std::invalid_argument("rearrangement box must hold several cells");
  Grid g = lattice_cube(d, h, half);
  std::vector<double> v(g.size());
  std::vector<double> x(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.center(i, x.data());
    v[i] = k(x.data());
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  const double cell = g.cell_volume();
  const std::size_t n = v.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 512);
  std::vector<double> radii, values;
  for (std::size_t j = 0; j < n; j += stride) {
    double r = ball_radius(d, (j + 0.5) * cell);
    if (!radii.empty() && !(r > radii.back())) continue;
    radii.push_back(r);
    values.push_back(std::isfinite(v[j]) ? v[j] : v[std::min(n - 1, j + 1)]);
  }
  double tail = static_cast<double>(d) + 1.0;
  if (k.homogeneity()) tail = *k.homogeneity();
  else if (values.size() >= 4 && values.back() > 0.0) {
    std::size_t mid = values.size() / 2;
    double ratio = values[mid] / values.back();
    if (ratio > 1.0) tail = std::log(ratio) / std::log(radii.back() / radii[mid]);
  }
  return kernels::tabulated_radial(d, radii, values, tail);
}

InequalityReport sobolev_assumption_check(const Kernel& k, double q, const std::vector<double>& masses, double h,
                                          double slope_tol) {
  if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
  if (masses.size() < 2) throw std::invalid_argument("need at least two masses");
  std::vector<double> m = masses;
  std::sort(m.begin(), m.end());
  for (double v : m)
    if (!(v > 0.0)) throw std::invalid_argument("masses must be positive");
  const int d = k.dim();
  Kernel ks = k;
  bool rearranged = false;
  if (!(k.is_radial() && k.radially_nonincreasing())) {
    double r_hi = ball_radius(d, m.back());
    double hh = h > 0.0 ? h : ball_radius(d, m.front()) / 16.0;
    ks = rearranged_kernel(k, hh, std::max(2.0 * r_hi, 32.0 * hh));
    rearranged = true;
  }

  std::vector<double> per(m.size()), rho(m.size());
  if (d == 1) {
    bool infinite = false;
    Profile1D prof;
    try {
      prof = build_profile(ks);
    } catch (const std::invalid_argument&) {
      infinite = true;
    }
    for (std::size_t i = 0; i < m.size(); ++i) per[i] = infinite ? kInf : interval_perimeter(prof, 0.5 * m[i]);
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) {
      double r = ball_radius(d, m[i]);
      double hh = h > 0.0 ? h : r / 16.0;
      per[i] = ball_curve(ks, {r}, hh).perimeter[0];
    }
  }
  for (std::size_t i = 0; i < m.size(); ++i) rho[i] = per[i] * std::pow(m[i], -1.0 / q);

  InequalityReport rep;
  rep.id = "sobolev-assumption";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) rows.push_back({{"m", m[i]}, {"perimeter", number(per[i])}, {"rho", number(rho[i])}});
  rep.details["rows"] = rows;
  rep.details["q"] = q;
  rep.details["rearranged"] = rearranged;

  std::vector<std::size_t> fin;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (std::isfinite(rho[i])) fin.push_back(i);
  if (fin.empty()) {
    rep.lhs = std::pow(m.front(), 1.0 / q);
    rep.rhs = kInf;
    rep.constant = 0.0;
    rep.verdict = "holds";
    rep.details["vacuous"] = true;
    return rep;
  }
  rep.details["vacuous"] = false;
  std::size_t arg = fin.front();
  for (std::size_t i : fin)
    if (rho[i] < rho[arg]) arg = i;
  rep.lhs = std::pow(m[arg], 1.0 / q);
  rep.rhs = per[arg];
  double sampled_c = rho[arg] > 0.0 ? 1.0 / rho[arg] : kInf;
  rep.details["sampled_constant"] = number(sampled_c);
  if (fin.size() < 2) {
    rep.constant = sampled_c;
    rep.verdict = "inconclusive";
    return rep;
  }
  auto slope = [&](std::size_t a, std::size_t b) { return std::log(rho[b] / rho[a]) / std::log(m[b] / m[a]); };
  double s_small = slope(fin[0], fin[1]);
  double s_large = slope(fin[fin.size() - 2], fin.back());
  rep.details["slope_small"] = s_small;
  rep.details["slope_large"] = s_large;
  rep.details["slope_tolerance"] = slope_tol;
  double lo = *std::min_element(rho.begin(), rho.end()), hi = 0.0;
  for (std::size_t i : fin) hi = std::max(hi, rho[i]);
  rep.details["spread"] = hi > 0.0 ? (hi - lo) / hi : 0.0;
  bool holds = rho[arg] > 0.0 && s_small <= slope_tol && s_large >= -slope_tol;
  rep.verdict = holds ? "holds" : "fails";
  rep.constant = holds ? sampled_c : kInf;
  return rep;
}

// ---- relative isoperimetry ----

InequalityReport relative_isoperimetric_check(const GridSet& e, const GridSet& omega, const Kernel& k, double q) {
  if (!e.grid.same_as(omega.grid)) throw std::invalid_argument("E and Omega must share a grid");
  if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
  InequalityReport rep;
  rep.id = "relative-isoperimetric";
  double in = e.intersect(omega).volume(), out = omega.minus(e).volume();
  rep.lhs = std::pow(std::min(in, out), 1.0 / q);
  EnergyReport p = perimeter(e, k, &omega);
  rep.rhs = p.value;
  if (rep.lhs == 0.0) rep.constant = 0.0;
  else if (rep.rhs > 0.0) rep.constant = rep.lhs / rep.rhs;
  else rep.constant = kInf;
  rep.verdict = std::isfinite(rep.constant) ? "holds" : "fails";
  nlohmann::json warnings = nlohmann::json::array();
  if (!(k.is_radial() && k.radially_nonincreasing() && k.symmetric()))
    warnings.push_back("kernel hypotheses not certified (needs a radial non-increasing symmetric kernel)");
  int ncomp = 0;
  std::vector<std::size_t> mem = omega.members();
  components(omega, mem, &ncomp);
  if (ncomp != 1) warnings.push_back("Omega is not connected");
  rep.details = {{"q", q}, {"inside", in}, {"outside", out}, {"perimeter_error", p.error}, {"warnings", warnings}};
  return rep;
}

InequalityReport relative_isoperimetric_suite(const GridSet& omega, const Kernel& k, double q, int count,
                                              std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("count must be positive");
  const Grid& g = omega.grid;
  const int d = g.d;
  WeightTable w(k, g.h, full_extent(g));
  std::mt19937_64 rng(seed);
  std::vector<double> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = g.origin[i];
    hi[i] = g.origin[i] + g.n[i] * g.h;
  }
  InequalityReport rep;
  rep.id = "relative-isoperimetric-suite";
  double cmin = kInf, cmax = 0.0;
  int done = 0, tries = 0;
  nlohmann::json constants = nlohmann::json::array();
  while (done < count && tries < 20 * count) {
    ++tries;
    int boxes = 1 + static_cast<int>(rng() % 3);
    std::vector<Shape> parts;
    for (int b = 0; b < boxes; ++b) {
      std::vector<double> a(d), c(d);
      for (int i = 0; i < d; ++i) {
        std::uniform_real_distribution<double> u(lo[i], hi[i]);
        double x = u(rng), y = u(rng);
        a[i] = std::min(x, y);
        c[i] = std::max(x, y);
      }
      parts.push_back(Shape::box(a, c));
    }
    GridSet e = rasterize(g, Shape::union_of(parts));
    double in = e.intersect(omega).volume(), out = omega.minus(e).volume();
    double left = std::pow(std::min(in, out), 1.0 / q);
    if (!(left > 0.0)) continue;
    double right = perimeter(e, w, &omega).value;
    double c = right > 0.0 ? left / right : kInf;
    constants.push_back(number(c));
    if (c > cmax) {
      cmax = c;
      rep.lhs = left;
      rep.rhs = right;
    }
    cmin = std::min(cmin, c);
    ++done;
  }
  if (done == 0) throw std::invalid_argument("no random set split Omega");
  rep.constant = cmax;
  rep.verdict = std::isfinite(cmax) ? "holds" : "fails";
  rep.details = {{"q", q}, {"count", done}, {"seed", seed}, {"min_constant", number(cmin)}, {"constants", constants}};
  return rep;
}

}  // namespace nonloc
