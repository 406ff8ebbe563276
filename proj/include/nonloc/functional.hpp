#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonloc/grid.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/weights.hpp"

namespace nonloc {

struct EnergyReport {
  double value = 0.0;
  double error = 0.0;
  double near_share = 0.0;
  double tail_share = 0.0;
  std::string method = "direct";
  std::string scheme;
  bool infinite = false;
  bool inconclusive = false;
  nlohmann::json to_json() const;
};

// c(s) = sum_x a(x) b(x + s) for |s|_inf <= extent, laid out like a WeightTable window.
std::vector<double> correlate(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b,
                              long extent);

// Window extent needed to cover every pair of cells in the grid.
long full_extent(const Grid& grid);

// [u]^p over Omega x Omega, or over R^d x R^d with u extended by zero when omega is null.
EnergyReport seminorm(const GridFunction& u, const WeightTable& w, double p, const GridSet* omega = nullptr);
EnergyReport seminorm(const GridFunction& u, const Kernel& k, double p, const GridSet* omega = nullptr,
                      const Scheme& scheme = {});

// K-perimeter of E in R^d (omega null) or relative to Omega.
EnergyReport perimeter(const GridSet& e, const WeightTable& w, const GridSet* omega = nullptr);
EnergyReport perimeter(const GridSet& e, const Kernel& k, const GridSet* omega = nullptr, const Scheme& scheme = {});

enum class EnergyMethod { Direct, Fft };

// V_K(E), the double sum over E x E including same-cell pairs.
EnergyReport interaction_energy(const GridSet& e, const WeightTable& w, EnergyMethod method);
EnergyReport interaction_energy(const GridSet& e, const Kernel& k, EnergyMethod method, const Scheme& scheme = {});

// ||K||_1 |E| - V_K(E) for integrable symmetric kernels.
EnergyReport perimeter_via_energy(const GridSet& e, const Kernel& k, const Scheme& scheme = {});

struct CurvatureOptions {
  double eps0 = 0.0;  // 0: 16 h
  int levels = 0;     // 0: halve down to h
  double spread_tolerance = 0.05;
};

struct CurvatureResult {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> eps;
  std::vector<double> iterates;
  bool inconclusive = false;
  nlohmann::json to_json() const;
};

// Non-local curvature of E at the boundary point x (snapped to the nearest half-cell lattice point).
// Outside the grid box the set is empty.
CurvatureResult curvature(const GridSet& e, const std::vector<double>& x, const Kernel& k,
                          const CurvatureOptions& opt = {});

// Integral of (chi_{E^c} - chi_E)(y) K(x - y) over R^d for bounded integrable kernels; x arbitrary.
double curvature_bounded(const GridSet& e, const std::vector<double>& x, const Kernel& k, double kernel_mass);

struct ProbeOptions {
  double r0 = 0.0;  // 0: 2 h
  int doublings = 40;
  std::vector<double> exclusion_radii;  // used when the kernel has isolated singular points
};

struct ProbeResult {
  std::string mode;               // "shells" or "exclusion"
  std::vector<double> radii;      // shell radius or exclusion radius
  std::vector<double> partial;    // partial seminorms
  double growth = 0.0;            // last / first positive entry
  bool converged = false;         // tail Cauchy within 1%
  nlohmann::json to_json() const;
};

// Partial whole-space seminorms over growing shells |z| <= R_k = r0 2^k, or over shrinking
// exclusions around isolated singular points.
ProbeResult divergence_probe(const GridFunction& u, const Kernel& k, double p, const ProbeOptions& opt = {});

}  // namespace nonloc
