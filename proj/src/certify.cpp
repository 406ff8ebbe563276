#include "nonloc/certify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nonloc/kernel_integral.hpp"
#include "nonloc/parallel.hpp"

namespace nonloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 1024;

struct Sample {
  std::vector<double> x;
  std::vector<double> y;
};

// Random point with |x|_* = radius.
std::vector<double> on_sphere(std::mt19937_64& rng, const Norm& norm, int d, double radius) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  double n = 0.0;
  while (n == 0.0) {
    for (double& c : v) c = g(rng);
    n = norm(v.data(), d);
  }
  for (double& c : v) c *= radius / n;
  return v;
}

// Fills samples in fixed chunks, each chunk with its own seed derived from (seed, chunk).
template <class Make>
std::vector<Sample> draw(const SamplingConfig& cfg, Make make) {
  std::vector<Sample> out(cfg.samples);
  parallel_blocks(cfg.samples, kChunk, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    for (std::size_t i = b; i < e; ++i) out[i] = make(rng);
  });
  return out;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return lo * std::exp(u(rng) * std::log(hi / lo));
}

nlohmann::json point(const std::vector<double>& x) { return nlohmann::json(x); }

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); }

void from_integral(CertificateReport& rep, const IntegralResult& r, bool finite_is_good, const std::string& name) {
  rep.constants[name] = number(r.value);
  rep.constants[name + "_error"] = r.error;
  if (r.inconclusive && !r.infinite) {
    rep.verdict = Verdict::Inconclusive;
    return;
  }
  bool finite = !r.infinite;
  rep.verdict = (finite == finite_is_good) ? Verdict::Holds : Verdict::Fails;
  if (rep.verdict == Verdict::Fails) rep.witnesses.push_back({{name, number(r.value)}, {"error", r.error}});
}

void check_dec(CertificateReport& rep, const Kernel& k, const Norm& norm, const SamplingConfig& cfg) {
  const int d = k.dim();
  auto samples = draw(cfg, [&](std::mt19937_64& rng) {
    return Sample{on_sphere(rng, norm, d, log_uniform(rng, cfg.r_min, cfg.r_max)), {}};
  });
  const std::size_t n = samples.size();
  std::vector<double> r(n), v(n);
  parallel_blocks(n, kChunk, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      r[i] = norm(samples[i].x.data(), d);
      v[i] = k(samples[i].x.data());
    }
  });
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(v[i])) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] != r[b] ? r[a] < r[b] : a < b; });
  // Walk from the outside in, tracking the largest value at larger norm.
  double best = kInf;
  std::size_t wx = 0, wy = 0;
  std::size_t arg = n;
  double suffix = 0.0;
  bool any = false;
  for (std::size_t t = order.size(); t-- > 0;) {
    std::size_t i = order[t];
    if (v[i] >= suffix) {
      suffix = v[i];
      arg = i;
    }
    if (suffix <= 0.0) continue;
    any = true;
    double c = v[i] / suffix;
    if (c < best) {
      best = c;
      wx = i;
      wy = arg;
    }
  }
  if (!any) {
    rep.verdict = Verdict::Inconclusive;
    return;
  }
  rep.constants["c0"] = best;
  if (auto c = k.dec_constant(); c && norm.describe() == k.norm().describe()) rep.constants["c0_analytic"] = *c;
  if (best > 0.0) {
    rep.verdict = Verdict::Holds;
  } else {
    rep.verdict = Verdict::Fails;
    rep.witnesses.push_back({{"x", point(samples[wx].x)}, {"y", point(samples[wy].x)},
                             {"K(x)", v[wx]}, {"K(y)", v[wy]}});
  }
}

void check_dou(CertificateReport& rep, const Kernel& k, const Norm& norm, const SamplingConfig& cfg) {
  const int d = k.dim();
  double D = cfg.doubling_radius ? *cfg.doubling_radius
                                 : (std::isfinite(k.support_radius()) ? k.support_radius() / 2.0 : 1.0);
  rep.constants["D"] = D;
  auto samples = draw(cfg, [&](std::mt19937_64& rng) {
    double rad = log_uniform(rng, D * 1e-6, D);
    return Sample{on_sphere(rng, norm, d, rad), on_sphere(rng, norm, d, 2.0 * rad)};
  });
  double worst = 0.0;
  std::size_t arg = samples.size();
  bool any = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double kx = k(samples[i].x.data()), ky = k(samples[i].y.data());
    if (!std::isfinite(kx) || !std::isfinite(ky)) continue;
    if (kx == 0.0) continue;
    any = true;
    double ratio = ky > 0.0 ? kx / ky : kInf;
    if (ratio > worst) {
      worst = ratio;
      arg = i;
    }
  }
  if (!any) {
    rep.verdict = Verdict::Inconclusive;
    return;
  }
  rep.constants["C_D"] = number(worst);
  if (std::isfinite(worst)) {
    rep.verdict = Verdict::Holds;
  } else {
    rep.verdict = Verdict::Fails;
    rep.witnesses.push_back({{"x", point(samples[arg].x)}, {"y", point(samples[arg].y)},
                             {"K(x)", k(samples[arg].x.data())}, {"K(y)", 0.0}});
  }
}

void check_pointwise(CertificateReport& rep, const Kernel& k, const Norm& norm, const SamplingConfig& cfg,
                     bool symmetry) {
  const int d = k.dim();
  auto samples = draw(cfg, [&](std::mt19937_64& rng) {
    return Sample{on_sphere(rng, norm, d, log_uniform(rng, cfg.r_min, cfg.r_max)), {}};
  });
  std::size_t checked = 0;
  double worst = 0.0;
  for (const auto& s : samples) {
    double a = k(s.x.data());
    if (symmetry) {
      std::vector<double> m(s.x);
      for (double& c : m) c = -c;
      double b = k(m.data());
      if (std::isinf(a) || std::isinf(b)) {
        if (a == b) continue;
      }
      ++checked;
      double gap = std::abs(a - b);
      double scale = std::max(std::abs(a), std::abs(b));
      worst = std::max(worst, scale > 0.0 ? gap / scale : 0.0);
      if (gap > 1e-12 * scale) {
        rep.verdict = Verdict::Fails;
        rep.witnesses.push_back({{"x", point(s.x)}, {"K(x)", a}, {"K(-x)", b}});
        rep.constants["max_relative_asymmetry"] = worst;
        return;
      }
    } else {
      ++checked;
      if (!(a > 0.0)) {
        rep.verdict = Verdict::Fails;
        rep.witnesses.push_back({{"x", point(s.x)}, {"K(x)", a}});
        return;
      }
    }
  }
  if (symmetry) rep.constants["max_relative_asymmetry"] = worst;
  rep.constants["checked"] = checked;
  rep.verdict = checked > 0 ? Verdict::Holds : Verdict::Inconclusive;
}

void check_inf(CertificateReport& rep, const Kernel& k, const Norm& norm, const SamplingConfig& cfg) {
  const int d = k.dim();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> zero_at;
  for (int level = 0; level <= 10; ++level) {
    double radius = std::ldexp(1.0, -level);
    SamplingConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(level) * 0x9E3779B97F4A7C15ULL;
    auto samples = draw(c, [&](std::mt19937_64& rng) {
      // Uniform in the euclidean ball of this radius.
      std::normal_distribution<double> g(0.0, 1.0);
      std::vector<double> v(d);
      double n = 0.0;
      while (n == 0.0) {
        n = 0.0;
        for (double& x : v) {
          x = g(rng);
          n += x * x;
        }
        n = std::sqrt(n);
      }
      double rad = radius * std::pow(u01(rng), 1.0 / d);
      for (double& x : v) x *= rad / n;
      return Sample{v, {}};
    });
    double mu = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double v = k(samples[i].x.data());
      if (v < mu) {
        mu = v;
        arg = i;
      }
    }
    if (mu > 0.0) {
      rep.verdict = Verdict::Holds;
      rep.constants["r"] = radius;
      rep.constants["mu"] = number(mu);
      return;
    }
    if (level == 10) {
      rep.verdict = Verdict::Fails;
      rep.constants["r"] = radius;
      rep.constants["mu"] = 0.0;
      rep.witnesses.push_back({{"x", point(samples[arg].x)}, {"K(x)", 0.0}});
    }
  }
  (void)norm;
}

}  // namespace

Hypothesis parse_hypothesis(const std::string& text) {
  // Case-insensitive: "dec", "Dec" and "DEC" all name the same hypothesis.
  std::string name = text;
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (name == "nint") return Hypothesis::Nint;
  if (name == "far") return Hypothesis::Far;
  if (name == "dec") return Hypothesis::Dec;
  if (name == "dou") return Hypothesis::Dou;
  if (name == "nts" || name.rfind("nts_", 0) == 0) return Hypothesis::Nts;
  if (name == "sym") return Hypothesis::Sym;
  if (name == "pos") return Hypothesis::Pos;
  if (name == "inf") return Hypothesis::Inf;
  throw std::invalid_argument("unknown hypothesis '" + text + "'");
}

std::string to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::Nint: return "Nint";
    case Hypothesis::Far: return "Far";
    case Hypothesis::Dec: return "Dec";
    case Hypothesis::Dou: return "Dou";
    case Hypothesis::Nts: return "Nts";
    case Hypothesis::Sym: return "Sym";
    case Hypothesis::Pos: return "Pos";
    case Hypothesis::Inf: return "Inf";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

nlohmann::json SamplingConfig::to_json() const {
  nlohmann::json j{{"seed", seed}, {"samples", samples}, {"r_min", r_min}, {"r_max", r_max}, {"nts_p", nts_p}};
  if (doubling_radius) j["D"] = *doubling_radius;
  return j;
}

nlohmann::json CertificateReport::to_json() const {
  return {{"hypothesis", to_string(hypothesis)}, {"verdict", to_string(verdict)}, {"constants", constants},
          {"witnesses", witnesses}, {"config", config}};
}

CertificateReport certify(const Kernel& k, Hypothesis h, const Norm& norm, const SamplingConfig& cfg) {
  norm.check_dimension(k.dim());
  if (cfg.samples == 0 || !(cfg.r_min > 0.0) || !(cfg.r_max > cfg.r_min))
    throw std::invalid_argument("sampling config needs samples > 0 and 0 < r_min < r_max");
  CertificateReport rep;
  rep.hypothesis = h;
  rep.config = cfg.to_json();
  rep.config["norm"] = norm.describe();
  rep.config["kernel"] = k.to_json();
  switch (h) {
    case Hypothesis::Nint:
      from_integral(rep, kernel_integral(k, Region::all()), false, "integral");
      break;
    case Hypothesis::Far: {
      rep.verdict = Verdict::Holds;
      nlohmann::json tails = nlohmann::json::array();
      for (double r : {1.0, 0.1, 0.01, 0.001}) {
        IntegralResult t = kernel_integral(k, Region::tail(r));
        tails.push_back({{"r", r}, {"mass", number(t.value)}});
        if (t.infinite) {
          rep.verdict = Verdict::Fails;
          rep.witnesses.push_back({{"r", r}, {"tail", "inf"}});
          break;
        }
        if (t.inconclusive) rep.verdict = Verdict::Inconclusive;
      }
      rep.constants["tails"] = tails;
      break;
    }
    case Hypothesis::Nts:
      from_integral(rep, kernel_integral(k, Region::all(), Weight::min_pow(cfg.nts_p)), true, "integral");
      rep.constants["p"] = cfg.nts_p;
      break;
    case Hypothesis::Dec: check_dec(rep, k, norm, cfg); break;
    case Hypothesis::Dou: check_dou(rep, k, norm, cfg); break;
    case Hypothesis::Sym: check_pointwise(rep, k, norm, cfg, true); break;
    case Hypothesis::Pos: check_pointwise(rep, k, norm, cfg, false); break;
    case Hypothesis::Inf: check_inf(rep, k, norm, cfg); break;
  }
  return rep;
}

}  // namespace nonloc
