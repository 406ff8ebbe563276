#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nonloc/grid.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/weights.hpp"

namespace nonloc {

// One side of a lemma inequality evaluated on the grid; holds when lhs <= rhs.
struct LemmaCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool holds = false;
  nlohmann::json to_json() const;
};

// Grid with `cells` extra cells on every side.
Grid pad_grid(const Grid& g, long cells);
// u placed into a larger grid that contains it cell for cell; zero elsewhere.
GridFunction embed(const GridFunction& u, const Grid& target);
GridSet embed(const GridSet& s, const Grid& target);

// Smallest euclidean gap between a cell of V and a cell outside Omega (the exterior of the
// grid box counts as outside).
double standoff(const GridSet& v, const GridSet& omega);

// u restricted to Omega and extended by zero onto the grid padded by `pad` cells. Requires u = 0
// outside V and a positive standoff between V and the complement of Omega.
GridFunction zero_extend(const GridFunction& u, const GridSet& omega, const GridSet& v, long pad);

// [zero_extend(u)]^p over R^d <= [u]^p over Omega + 2 ||u||_p^p * tail mass beyond the standoff.
LemmaCheck vanishing_check(const GridFunction& u, const GridSet& omega, const GridSet& v, const Kernel& k, double p);

// Even reflection across the low face of the grid box along `axis`; the output grid doubles
// along that axis. Cells are paired one to one.
GridFunction reflect_even(const GridFunction& u, int axis);

// Pointwise product; psi must lie in [0, 1].
GridFunction apply_cutoff(const GridFunction& u, const GridFunction& psi);

// Cutoff bound: [psi u]^p <= 2^(p-1) ([u]^p + M ||u||_p^p) with M the larger of the continuum
// mass int K min(1, (lip |z|)^p) (bounded via the Nts integral) and its discrete counterpart.
LemmaCheck cutoff_check(const GridFunction& u, const GridFunction& psi, double lip, const Kernel& k, double p);

struct ExtensionOptions {
  double width = 0.0;     // collar width outside the box; 0: half the shortest side
  bool certified = false; // caller checked (Dec), (Dou) and (Nts)
};

struct ExtensionStage {
  std::string name;
  double lp = 0.0;
  double semi = 0.0;
};

struct ExtensionReport {
  double lp_in = 0.0, semi_in = 0.0, lp_out = 0.0, semi_out = 0.0, ratio = 0.0;
  double width = 0.0;
  double p = 1.0;
  bool reflection_symmetric_norm = false;
  std::vector<ExtensionStage> stages;
  std::vector<std::string> warnings;
  nlohmann::json to_json() const;
};

// Extension of u from its grid box (Omega) to R^d: u itself on Omega, and outside it the even
// reflection across every face damped by a collar psi = (1 - dist(x, Omega) / width)_+.
// The result lives on the grid padded to hold the collar, equals u on Omega cell for cell, and
// the report measures ||ext||_{W^{K,p}} / ||u||_{W^{K,p}}.
std::pair<GridFunction, ExtensionReport> extend(const GridFunction& u, const Kernel& k, double p,
                                                const ExtensionOptions& opt = {});

// (||u||_p^p + [u]^p)^(1/p) with the seminorm over Omega (omega non-null) or R^d.
double sobolev_norm(const GridFunction& u, const Kernel& k, double p, const GridSet* omega);

}  // namespace nonloc
