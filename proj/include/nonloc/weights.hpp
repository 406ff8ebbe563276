#pragma once

#include <vector>

#include "nonloc/kernel.hpp"

namespace nonloc {

struct Scheme {
  enum class NearField { ExcludeDiagonal, CellPairCorrection };
  NearField near = NearField::CellPairCorrection;
  int near_cells = 2;             // offsets with |s|_inf <= near_cells get exact cell-pair weights (d >= 2)
  bool tail_compensation = true;  // add interactions beyond the offset window
  const char* name() const {
    return near == NearField::ExcludeDiagonal ? "exclude-diagonal" : "cell-pair-correction";
  }
};

// Interaction weights between grid cells: W(s) = integral over cell 0 x cell s of K(x - y),
// for integer offsets |s|_inf <= extent. Far offsets use the midpoint rule K(s h) h^(2d);
// near offsets (and every offset in 1D when antiderivatives are known) are integrated exactly.
class WeightTable {
 public:
  WeightTable(const Kernel& k, double h, long extent, const Scheme& scheme = {}, bool with_diagonal = false);

  int dim() const { return d_; }
  double spacing() const { return h_; }
  long extent() const { return L_; }
  long side() const { return 2 * L_ + 1; }
  std::size_t size() const { return w_.size(); }

  std::size_t flat(const long* s) const;
  void offset(std::size_t flat, long* s) const;
  double operator()(const long* s) const { return w_[flat(s)]; }
  double at(std::size_t flat) const { return w_[flat]; }
  const std::vector<double>& values() const { return w_; }
  // Midpoint value K(s h) h^(2d), the weight without near-field correction.
  double midpoint(const long* s) const;
  bool near(const long* s) const;
  // True when W(s) was integrated exactly: the near field, offsets whose cell pairs straddle a
  // radius where K jumps, and every offset in 1D when antiderivatives are known.
  bool exact(const long* s) const;

  // Sum of W(s) over offsets outside the window (0 when tail compensation is off); may be +inf.
  double beyond() const { return beyond_; }
  bool has_diagonal() const { return diagonal_; }
  bool any_infinite() const { return infinite_; }
  const Kernel& kernel() const { return k_; }
  const Scheme& scheme() const { return scheme_; }

  // Offsets in shell-major order (|s|_inf ascending, then lexicographic), excluding 0.
  const std::vector<std::size_t>& shell_order() const { return order_; }
  long shell(std::size_t flat) const;

 private:
  Kernel k_;
  int d_;
  double h_;
  long L_;
  Scheme scheme_;
  bool diagonal_;
  bool infinite_ = false;
  double beyond_ = 0.0;
  std::vector<double> w_;
  std::vector<std::size_t> order_;
  std::vector<double> jumps_;
};

// Exact cell-pair weight for one offset (used by the table and by tests).
double cell_pair_weight(const Kernel& k, double h, const std::vector<long>& s);

// Sum of W(s) over |s|_inf > extent.
double weight_beyond(const Kernel& k, double h, long extent);

}  // namespace nonloc
