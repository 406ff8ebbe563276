#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nonloc/certify.hpp"
#include "nonloc/closedform1d.hpp"
#include "nonloc/extension.hpp"
#include "nonloc/functional.hpp"
#include "nonloc/isoperimetry.hpp"
#include "nonloc/kernel_integral.hpp"

namespace nonloc::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int code_for(const std::string& verdict) {
  if (verdict == "holds" || verdict == "pass" || verdict == "eventually constant" || verdict == "converges") return 0;
  if (verdict == "inconclusive") return 3;
  return 2;
}

class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, const std::string& command, const Kernel& k)
      : dir_(cfg.output_dir()), hash_(cfg.hash()), seed_(cfg.seed()), command_(command), kernel_(k.to_json()) {
    std::filesystem::create_directories(dir_);
  }

  const std::string& hash() const { return hash_; }
  std::string stamp() const { return "config_hash=" + hash_ + " seed=" + std::to_string(seed_); }

  void report(const std::string& name, const json& result) const {
    json j;
    j["command"] = command_;
    j["config_hash"] = hash_;
    j["seed"] = seed_;
    j["kernel"] = kernel_;
    j["result"] = result;
    std::ofstream f(path(name));
    f << j.dump(2) << '\n';
  }

  // body starts with the header line.
  void csv(const std::string& name, const std::string& body) const {
    std::ofstream f(path(name));
    f << "# " << stamp() << '\n' << body;
  }

  void grid(const std::string& name, const GridSet& s) const { write_grid(path(name), s, stamp()); }
  void grid(const std::string& name, const GridFunction& u) const { write_grid(path(name), u, false, stamp()); }

 private:
  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

  std::string dir_, hash_;
  std::uint64_t seed_;
  std::string command_;
  json kernel_;
};

std::vector<double> require_list(const RunConfig& cfg, const std::string& key) {
  if (!cfg.text.has(key)) throw ParseError(0, 0, "missing required key '" + key + "'");
  return cfg.text.get_list(key);
}

double positive(const RunConfig& cfg, const std::string& key, double fallback) {
  double v = cfg.text.get_double(key, fallback);
  if (!(v > 0.0)) {
    const SpecEntry* e = cfg.text.find(key);
    if (e) throw ParseError(e->line, e->value_column, key + " must be positive");
    throw ParseError(0, 0, "missing required key '" + key + "'");
  }
  return v;
}

Outcome energy_outcome(const std::string& name, const EnergyReport& r, const Artifacts& a) {
  a.report(name + ".json", r.to_json());
  Outcome o;
  o.code = r.inconclusive ? 3 : 0;
  o.summary = name + ": value=" + (r.infinite ? std::string("inf") : fmt(r.value)) + " error=" + fmt(r.error) +
              (r.inconclusive ? " inconclusive" : "");
  return o;
}

Outcome inequality_outcome(const std::string& name, const InequalityReport& r, const Artifacts& a) {
  a.report(name + ".json", r.to_json());
  return {code_for(r.verdict), name + ": " + r.verdict + " lhs=" + fmt(r.lhs) + " rhs=" + fmt(r.rhs) +
                                   " constant=" + fmt(r.constant)};
}

Outcome cmd_certify(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  std::vector<Hypothesis> hyps;
  std::string list = cfg.text.get("hypothesis", "dec");
  if (list == "all") {
    hyps = {Hypothesis::Nint, Hypothesis::Far, Hypothesis::Dec, Hypothesis::Dou,
            Hypothesis::Nts, Hypothesis::Sym, Hypothesis::Pos, Hypothesis::Inf};
  } else {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      try {
        hyps.push_back(parse_hypothesis(item));
      } catch (const std::invalid_argument& ex) {
        const SpecEntry* e = cfg.text.find("hypothesis");
        throw ParseError(e->line, e->value_column, ex.what());
      }
    }
  }
  SamplingConfig sc;
  sc.seed = cfg.seed();
  sc.samples = static_cast<std::size_t>(cfg.text.get_int("samples", static_cast<long>(sc.samples)));
  sc.r_min = positive(cfg, "r_min", sc.r_min);
  sc.r_max = positive(cfg, "r_max", sc.r_max);
  sc.nts_p = positive(cfg, "nts_p", sc.nts_p);
  if (cfg.text.has("doubling_radius")) sc.doubling_radius = positive(cfg, "doubling_radius", 1.0);
  Norm norm = k.norm();
  if (const SpecEntry* e = cfg.text.find("norm")) {
    try {
      norm = Norm::parse(e->value);
    } catch (const std::exception& ex) {
      throw ParseError(e->line, e->value_column, ex.what());
    }
  }
  json reports = json::array();
  std::string verdict = "holds", line;
  for (Hypothesis h : hyps) {
    CertificateReport r = certify(k, h, norm, sc);
    reports.push_back(r.to_json());
    if (r.verdict == Verdict::Fails) verdict = "fails";
    else if (r.verdict == Verdict::Inconclusive && verdict == "holds") verdict = "inconclusive";
    line += " " + to_string(h) + "=" + to_string(r.verdict);
  }
  a.report("certify.json", json{{"verdict", verdict}, {"reports", reports}});
  return {code_for(verdict), "certify:" + line};
}

Outcome cmd_integral(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  std::string kind = cfg.text.get("region", "all");
  Region region;
  if (kind == "all") region = Region::all();
  else if (kind == "tail") region = Region::tail(positive(cfg, "radius", 0.0));
  else if (kind == "ball") region = Region::ball(positive(cfg, "radius", 0.0));
  else if (kind == "annulus") region = Region::annulus(positive(cfg, "inner", 0.0), positive(cfg, "outer", 0.0));
  else if (kind == "outside_cube") region = Region::outside_cube(positive(cfg, "radius", 0.0));
  else {
    const SpecEntry* e = cfg.text.find("region");
    throw ParseError(e->line, e->value_column, "region must be all, tail, ball, annulus or outside_cube");
  }
  Weight w = cfg.text.has("weight_p") ? Weight::min_pow(positive(cfg, "weight_p", 1.0)) : Weight::one();
  IntegralResult r = kernel_integral(k, region, w);
  a.report("integral.json", json{{"region", kind},
                                 {"value", r.infinite ? json("inf") : json(r.value)},
                                 {"error", r.error},
                                 {"infinite", r.infinite},
                                 {"inconclusive", r.inconclusive}});
  return {r.inconclusive ? 3 : 0,
          "integral: " + kind + " value=" + (r.infinite ? std::string("inf") : fmt(r.value)) + " error=" + fmt(r.error)};
}

Outcome cmd_seminorm(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridFunction u = cfg.function(k.dim());
  double p = cfg.text.get_double("p", 1.0);
  if (cfg.has_set("omega")) {
    GridSet omega = cfg.set("omega", k.dim(), &u.grid);
    return energy_outcome("seminorm", seminorm(u, k, p, &omega, cfg.scheme()), a);
  }
  return energy_outcome("seminorm", seminorm(u, k, p, nullptr, cfg.scheme()), a);
}

Outcome cmd_perimeter(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet e = cfg.set("set", k.dim());
  if (cfg.has_set("omega")) {
    GridSet omega = cfg.set("omega", k.dim(), &e.grid);
    return energy_outcome("perimeter", perimeter(e, k, &omega, cfg.scheme()), a);
  }
  return energy_outcome("perimeter", perimeter(e, k, nullptr, cfg.scheme()), a);
}

Outcome cmd_energy(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet e = cfg.set("set", k.dim());
  std::string m = cfg.text.get("method", k.singular_set() == SingularSet::None ? "fft" : "direct");
  EnergyMethod method;
  if (m == "fft") method = EnergyMethod::Fft;
  else if (m == "direct") method = EnergyMethod::Direct;
  else {
    const SpecEntry* s = cfg.text.find("method");
    throw ParseError(s->line, s->value_column, "method must be fft or direct");
  }
  return energy_outcome("energy", interaction_energy(e, k, method, cfg.scheme()), a);
}

Outcome cmd_curvature(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet e = cfg.set("set", k.dim());
  std::vector<double> x = require_list(cfg, "point");
  if (static_cast<int>(x.size()) != k.dim()) {
    const SpecEntry* s = cfg.text.find("point");
    throw ParseError(s->line, s->value_column, "point needs " + std::to_string(k.dim()) + " coordinates");
  }
  CurvatureOptions opt;
  opt.eps0 = cfg.text.get_double("eps0", 0.0);
  opt.levels = static_cast<int>(cfg.text.get_int("levels", 0));
  CurvatureResult r = curvature(e, x, k, opt);
  a.report("curvature.json", r.to_json());
  return {r.inconclusive ? 3 : 0, "curvature: value=" + fmt(r.value) + " error=" + fmt(r.error) +
                                      (r.inconclusive ? " inconclusive" : "")};
}

Outcome cmd_closedform(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  std::vector<double> radii = cfg.text.has("radii") ? cfg.text.get_list("radii")
                                                    : std::vector<double>{positive(cfg, "r", 0.0)};
  Profile1D prof = build_profile(k);
  CurveReport rep = perimeter_curve_report(prof, radii);
  json j = rep.to_json();
  j["provenance"] = prof.provenance;
  a.report("closedform.json", j);
  a.csv("closedform.csv", rep.to_csv());
  std::string head = "closedform: " + rep.verdict;
  if (!rep.perimeter.empty()) head += " P(" + fmt(rep.radii.front()) + ")=" + fmt(rep.perimeter.front());
  return {code_for(rep.verdict), head};
}

Outcome cmd_extend(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridFunction u = cfg.function(k.dim());
  ExtensionOptions opt;
  opt.width = cfg.text.get_double("width", 0.0);
  auto [ext, rep] = extend(u, k, cfg.text.get_double("p", 1.0), opt);
  a.report("extension.json", rep.to_json());
  a.grid("extended.grid", ext);
  return {0, "extend: ratio=" + fmt(rep.ratio) + " width=" + fmt(rep.width)};
}

Outcome cmd_ballcurve(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  std::vector<double> radii = require_list(cfg, "radii");
  BallCurve c = ball_curve(k, radii, positive(cfg, "grid_h", 0.0), cfg.scheme());
  a.report("ballcurve.json", c.to_json());
  a.csv("ballcurve.csv", c.to_csv());
  return {code_for(c.verdict), "ballcurve: " + c.verdict + " radii=" + std::to_string(radii.size())};
}

Outcome cmd_optimize(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet init = cfg.set("set", k.dim());
  OptimizeOptions opt;
  std::string mode = cfg.text.get("mode", "greedy");
  if (mode == "greedy") opt.mode = OptimizeOptions::Mode::Greedy;
  else if (mode == "anneal") opt.mode = OptimizeOptions::Mode::Anneal;
  else {
    const SpecEntry* e = cfg.text.find("mode");
    throw ParseError(e->line, e->value_column, "mode must be greedy or anneal");
  }
  opt.seed = cfg.seed();
  opt.max_iterations = cfg.text.get_int("iterations", opt.max_iterations);
  opt.cooling = cfg.text.get_double("cooling", opt.cooling);
  opt.moves_per_temperature = cfg.text.get_int("moves_per_temperature", 0);
  if (cfg.text.has("t0")) opt.t0 = positive(cfg, "t0", 1.0);
  ShapeResult r = optimize(init, k, opt, cfg.scheme());
  a.report("optimize.json", r.to_json());
  a.grid("best_set.grid", r.best);
  a.csv("trace.csv", r.trace_csv());
  return {0, "optimize: " + r.mode + " initial=" + fmt(r.initial) + " best=" + fmt(r.profile) +
                 " accepted=" + std::to_string(r.accepted)};
}

Outcome cmd_counterexample(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  InequalityReport r = two_ball_counterexample(k, positive(cfg, "delta", 0.0), positive(cfg, "r", 0.0),
                                               require_list(cfg, "x0"), positive(cfg, "grid_h", 0.0));
  return inequality_outcome("counterexample", r, a);
}

Outcome cmd_poincare(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet omega = cfg.set("omega", k.dim());
  std::string mode = cfg.text.get("mode", "rayleigh-min");
  PoincareMode m;
  if (mode == "rayleigh-min") m = PoincareMode::RayleighMin;
  else if (mode == "remark-bound") m = PoincareMode::RemarkBound;
  else {
    const SpecEntry* e = cfg.text.find("mode");
    throw ParseError(e->line, e->value_column, "mode must be rayleigh-min or remark-bound");
  }
  InequalityReport r = poincare_constant(omega, k, cfg.text.get_double("p", 1.0), m, cfg.seed());
  if (r.witness) a.grid("witness.grid", *r.witness);
  return inequality_outcome("poincare", r, a);
}

Outcome cmd_sobolev(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  InequalityReport r = sobolev_assumption_check(k, positive(cfg, "q", 0.0), require_list(cfg, "masses"),
                                                cfg.text.get_double("grid_h", 0.0),
                                                cfg.text.get_double("slope_tol", 0.02));
  std::ostringstream os;
  os << "m [length^d],rho [kernel mass x length^(d - d/q)]\n";
  for (const auto& row : r.details["rows"]) {
    os << fmt(row["m"].get<double>()) << ',';
    if (row["rho"].is_number()) os << fmt(row["rho"].get<double>());
    else os << row["rho"].get<std::string>();
    os << '\n';
  }
  a.csv("sobolev.csv", os.str());
  return inequality_outcome("sobolev-check", r, a);
}

Outcome cmd_reliso(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridSet omega = cfg.set("omega", k.dim());
  double q = positive(cfg, "q", 0.0);
  if (cfg.has_set("set")) {
    GridSet e = cfg.set("set", k.dim(), &omega.grid);
    return inequality_outcome("rel-iso", relative_isoperimetric_check(e, omega, k, q), a);
  }
  int count = static_cast<int>(cfg.text.get_int("count", 50));
  return inequality_outcome("rel-iso", relative_isoperimetric_suite(omega, k, q, count, cfg.seed()), a);
}

Outcome cmd_probe(const RunConfig& cfg, const Kernel& k, const Artifacts& a) {
  GridFunction u = cfg.function(k.dim());
  ProbeOptions opt;
  opt.r0 = cfg.text.get_double("r0", 0.0);
  opt.doublings = static_cast<int>(cfg.text.get_int("doublings", opt.doublings));
  opt.exclusion_radii = cfg.text.get_list("exclusion_radii");
  ProbeResult r = divergence_probe(u, k, cfg.text.get_double("p", 1.0), opt);
  json j = r.to_json();
  std::string verdict = r.converged ? "converges" : "diverges";
  j["verdict"] = verdict;
  a.report("probe.json", j);
  std::ostringstream os;
  os << "shell_index [count],radius [length],partial_seminorm [seminorm^p]\n";
  for (std::size_t i = 0; i < r.partial.size(); ++i)
    os << i << ',' << fmt(r.radii[i]) << ',' << (std::isfinite(r.partial[i]) ? fmt(r.partial[i]) : "inf") << '\n';
  a.csv("probe.csv", os.str());
  return {code_for(verdict), "probe: " + verdict + " growth=" + fmt(r.growth)};
}

}  // namespace

Outcome run_command(const std::string& command, const RunConfig& cfg) {
  using Fn = std::function<Outcome(const RunConfig&, const Kernel&, const Artifacts&)>;
  static const std::map<std::string, Fn> table = {
      {"certify", cmd_certify},       {"integral", cmd_integral},
      {"seminorm", cmd_seminorm},     {"perimeter", cmd_perimeter},
      {"energy", cmd_energy},         {"curvature", cmd_curvature},
      {"closedform", cmd_closedform}, {"extend", cmd_extend},
      {"ballcurve", cmd_ballcurve},   {"optimize", cmd_optimize},
      {"counterexample", cmd_counterexample}, {"poincare", cmd_poincare},
      {"sobolev-check", cmd_sobolev}, {"rel-iso", cmd_reliso},
      {"probe", cmd_probe}};
  auto it = table.find(command);
  if (it == table.end()) throw ParseError(0, 0, "unknown command '" + command + "'");
  Kernel k = cfg.kernel();
  if (k.dim() > 3) throw ParseError(0, 0, "the command line tool supports dimensions 1 to 3");
  Artifacts a(cfg, command, k);
  Outcome o = it->second(cfg, k, a);
  o.summary += " [" + a.hash().substr(0, 12) + "]";
  return o;
}

}  // namespace nonloc::cli
