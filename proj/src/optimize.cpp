#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nonloc/functional.hpp"
#include "nonloc/isoperimetry.hpp"
#include "nonloc/parallel.hpp"

namespace nonloc {

namespace {

// Perimeter bookkeeping for volume-preserving swaps. With f(x) = sum_{y in E, y != x} W(x - y),
// moving cell a out and cell b in changes P by 2 f(a) - 2 f(b) + 2 W(b - a).
class SwapState {
 public:
  SwapState(const GridSet& init, const WeightTable& w) : set_(init), w_(w), g_(init.grid), d_(g_.d) {
    if (d_ > 3) throw std::invalid_argument("optimization supports d <= 3");
    coords_.resize(g_.size() * d_);
    for (std::size_t i = 0; i < g_.size(); ++i) g_.unravel(i, &coords_[i * d_]);
    field_.assign(g_.size(), 0.0);
    std::vector<std::size_t> members = set_.members();
    parallel_blocks(g_.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
      std::vector<long> x(d_), y(d_), s(d_);
      for (std::size_t i = b; i < e; ++i) {
        g_.unravel(i, x.data());
        double acc = 0.0;
        for (std::size_t m : members) {
          if (m == i) continue;
          g_.unravel(m, y.data());
          for (int a = 0; a < d_; ++a) s[a] = x[a] - y[a];
          acc += w_(s.data());
        }
        field_[i] = acc;
      }
    });
    refresh();
  }

  double pair(std::size_t a, std::size_t b) const {
    long s[3];
    for (int i = 0; i < d_; ++i) s[i] = coords_[b * d_ + i] - coords_[a * d_ + i];
    return w_(s);
  }

  double delta(std::size_t out, std::size_t in) const {
    return 2.0 * field_[out] - 2.0 * field_[in] + 2.0 * pair(out, in);
  }

  void apply(std::size_t out, std::size_t in) {
    for (std::size_t i = 0; i < g_.size(); ++i) {
      double add = i != in ? pair(in, i) : 0.0;
      double sub = i != out ? pair(out, i) : 0.0;
      field_[i] += add - sub;
    }
    set_.cells[out] = 0;
    set_.cells[in] = 1;
    refresh();
  }

  const GridSet& set() const { return set_; }
  // Cells of E with a face neighbour outside E (or on the grid boundary).
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  const std::vector<std::size_t>& outside() const { return outside_; }
  const std::vector<std::size_t>& frontier() const { return frontier_; }

 private:
  void refresh() {
    boundary_.clear();
    outside_.clear();
    frontier_.clear();
    std::vector<long> idx(d_);
    for (std::size_t i = 0; i < g_.size(); ++i) {
      g_.unravel(i, idx.data());
      bool mixed = false;
      for (int a = 0; a < d_ && !mixed; ++a)
        for (int dir : {-1, 1}) {
          idx[a] += dir;
          bool other = g_.inside(idx.data()) ? (set_.cells[g_.ravel(idx.data())] != set_.cells[i]) : set_.cells[i] != 0;
          idx[a] -= dir;
          if (other) {
            mixed = true;
            break;
          }
        }
      if (set_.cells[i]) {
        if (mixed) boundary_.push_back(i);
      } else {
        outside_.push_back(i);
        if (mixed) frontier_.push_back(i);
      }
    }
  }

  GridSet set_;
  const WeightTable& w_;
  const Grid& g_;
  int d_;
  std::vector<long> coords_;
  std::vector<double> field_;
  std::vector<std::size_t> boundary_, outside_, frontier_;
};

}  // namespace

nlohmann::json ShapeResult::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["seed"] = seed;
  j["cells"] = best.count();
  j["volume"] = best.volume();
  j["initial_perimeter"] = initial;
  j["profile_upper_bound"] = profile;
  j["accepted"] = accepted;
  j["rejected"] = rejected;
  j["converged"] = converged;
  j["trace_length"] = trace.size();
  return j;
}

std::string ShapeResult::trace_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "iteration [moves],perimeter [kernel mass x length^d]\n";
  for (const auto& [it, p] : trace) os << it << ',' << p << '\n';
  return os.str();
}

ShapeResult optimize(const GridSet& init, const Kernel& k, const OptimizeOptions& opt, const Scheme& scheme) {
  if (!k.symmetric()) throw std::invalid_argument("optimization needs a symmetric kernel");
  if (k.dim() != init.grid.d) throw std::invalid_argument("dimension mismatch");
  if (init.count() == 0) throw std::invalid_argument("initial set is empty");
  WeightTable w(k, init.grid.h, full_extent(init.grid), scheme);
  ShapeResult res;
  res.seed = opt.seed;
  res.mode = opt.mode == OptimizeOptions::Mode::Greedy ? "greedy" : "anneal";
  res.initial = perimeter(init, w).value;
  if (!std::isfinite(res.initial)) throw std::invalid_argument("initial perimeter is infinite");

  SwapState st(init, w);
  double current = res.initial;
  res.trace.push_back({0, current});

  if (opt.mode == OptimizeOptions::Mode::Greedy) {
    const double floor = 1e-13 * std::max(1.0, std::abs(res.initial));
    long it = 0;
    while (it < opt.max_iterations) {
      const auto& out = st.boundary();
      const auto& in = st.outside();
      if (out.empty() || in.empty()) {
        res.converged = true;
        break;
      }
      double best = 0.0;
      std::size_t ba = 0, bb = 0;
      bool found = false;
      for (std::size_t a : out)
        for (std::size_t b : in) {
          double dp = st.delta(a, b);
          if (dp < best) {
            best = dp;
            ba = a;
            bb = b;
            found = true;
          }
        }
      if (!found || !(best < -floor)) {
        res.converged = true;
        break;
      }
      st.apply(ba, bb);
      current += best;
      ++it;
      ++res.accepted;
      res.trace.push_back({it, current});
    }
    res.best = st.set();
  } else {
    std::mt19937_64 rng(opt.seed);
    auto propose = [&](std::size_t* a, std::size_t* b) {
      const auto& out = st.boundary();
      if (out.empty() || st.outside().empty()) return false;
      *a = out[rng() % out.size()];
      // Half the proposals stay next to the set, the rest may land anywhere.
      const auto& pool = (rng() % 2 == 0 && !st.frontier().empty()) ? st.frontier() : st.outside();
      *b = pool[rng() % pool.size()];
      return true;
    };
    double t0 = 0.0;
    if (opt.t0) t0 = *opt.t0;
    else {
      std::vector<double> probes;
      for (int i = 0; i < 100; ++i) {
        std::size_t a = 0, b = 0;
        if (!propose(&a, &b)) break;
        probes.push_back(std::abs(st.delta(a, b)));
      }
      if (!probes.empty()) {
        std::nth_element(probes.begin(), probes.begin() + probes.size() / 2, probes.end());
        t0 = probes[probes.size() / 2];
      }
      if (!(t0 > 0.0)) t0 = 1e-6 * std::max(1.0, std::abs(res.initial));
    }
    const long per_level = opt.moves_per_temperature > 0 ? opt.moves_per_temperature
                                                         : static_cast<long>(init.count());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    GridSet best = st.set();
    double best_p = current;
    for (long it = 1; it <= opt.max_iterations; ++it) {
      std::size_t a = 0, b = 0;
      if (!propose(&a, &b)) {
        res.converged = true;
        break;
      }
      double temp = t0 * std::pow(opt.cooling, static_cast<double>((it - 1) / per_level));
      double dp = st.delta(a, b);
      bool take = dp <= 0.0 || (temp > 0.0 && uni(rng) < std::exp(-dp / temp));
      if (!take) {
        ++res.rejected;
        continue;
      }
      st.apply(a, b);
      current += dp;
      ++res.accepted;
      res.trace.push_back({it, current});
      if (current < best_p) {
        best_p = current;
        best = st.set();
      }
    }
    res.best = best;
  }
  res.profile = perimeter(res.best, w).value;
  return res;
}

}  // namespace nonloc
