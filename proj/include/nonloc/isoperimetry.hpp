#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonloc/grid.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/weights.hpp"

namespace nonloc {

struct InequalityReport {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  std::string verdict;  // "holds", "fails" or "inconclusive"
  nlohmann::json details = nlohmann::json::object();
  std::optional<GridFunction> witness;  // extremal function or set, when one was found
  nlohmann::json to_json() const;
};

struct BallCurve {
  int d = 1;
  double h = 0.0;
  std::vector<double> radii;
  std::vector<double> perimeter;
  std::vector<double> error;  // quadrature error plus a rasterization allowance
  std::vector<double> volume; // rasterized volume
  bool monotone = true;
  std::string verdict;        // "pass" or "fail"
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// P_K(B_r) on a grid of spacing h for each radius, with the non-decreasing verdict judged
// against the combined error bars.
BallCurve ball_curve(const Kernel& k, const std::vector<double>& radii, double h, const Scheme& scheme = {});

struct FirstVariation {
  double r = 0.0;
  double derivative = 0.0;     // central difference of P_K(B_r)
  double surface_sum = 0.0;    // sum of curvature times surface weight over boundary samples
  double discrepancy = 0.0;    // |derivative - surface_sum| / |derivative|
  int jitters = 1;
  nlohmann::json to_json() const;
};

// d = 1 or 2, bounded kernels. d = 2 averages over sub-cell jitters of the ball centre.
FirstVariation first_variation_check(const Kernel& k, double r, double h, double step = 0.0, int jitters = 0,
                                     int boundary_points = 64, std::uint64_t seed = 1);

// Two balls of half the volume at +-x0/2 against the single ball B_r, for K truncated outside
// the ball of radius delta.
InequalityReport two_ball_counterexample(const Kernel& base, double delta, double r, const std::vector<double>& x0,
                                         double h);

enum class PoincareMode { RayleighMin, RemarkBound };

// rayleigh-min: smallest [u]^p / ||u - u_Omega||_p^p found over spectral, threshold and random
// starts refined by coordinate descent; the constant is its inverse to the power 1/p (an
// estimate). remark-bound: C^p = 1 / (|Omega| inf_{|z| <= diam} K).
InequalityReport poincare_constant(const GridSet& omega, const Kernel& k, double p, PoincareMode mode,
                                   std::uint64_t seed = 1);

// Rearranged kernel: K itself when radial and non-increasing, otherwise the layer-cake
// rearrangement of samples on [-half, half]^d with a power tail appended.
Kernel rearranged_kernel(const Kernel& k, double h, double half);

// rho(m) = P_{K*}(B^(m)) m^(-1/q) over the masses; holds when rho stays bounded below at both
// ends of the mass range (log-log slopes within tolerance).
InequalityReport sobolev_assumption_check(const Kernel& k, double q, const std::vector<double>& masses,
                                          double h = 0.0, double slope_tol = 0.02);

// min{|E n Omega|, |Omega \ E|}^(1/q) against P_K(E; Omega).
InequalityReport relative_isoperimetric_check(const GridSet& e, const GridSet& omega, const Kernel& k, double q);

// Largest implied constant over random unions of boxes inside Omega's grid.
InequalityReport relative_isoperimetric_suite(const GridSet& omega, const Kernel& k, double q, int count,
                                              std::uint64_t seed);

struct OptimizeOptions {
  enum class Mode { Greedy, Anneal };
  Mode mode = Mode::Greedy;
  std::uint64_t seed = 1;
  long max_iterations = 2000;  // greedy: accepted moves; anneal: proposals
  double cooling = 0.97;       // T_k = T_0 cooling^k
  long moves_per_temperature = 0;  // 0: cell count of the set
  std::optional<double> t0;        // default: median |dP| over 100 random probe moves
};

struct ShapeResult {
  GridSet best;
  double profile = 0.0;          // P_K(best), an upper bound on p_K(m)
  double initial = 0.0;
  std::vector<std::pair<long, double>> trace;  // (iteration, perimeter) of accepted states
  long accepted = 0;
  long rejected = 0;
  bool converged = false;        // greedy found no improving move
  std::uint64_t seed = 0;
  std::string mode;
  nlohmann::json to_json() const;
  std::string trace_csv() const;
};

// Volume-preserving swaps: one cell of the set that touches its complement leaves, one cell of
// the complement joins. Needs a symmetric kernel.
ShapeResult optimize(const GridSet& init, const Kernel& k, const OptimizeOptions& opt = {}, const Scheme& scheme = {});

}  // namespace nonloc
