#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nonloc {

// A norm on R^d measured against the euclidean one.
class Norm {
 public:
  enum class Kind { Euclidean, EllP, WeightedDiagonal };

  static Norm euclidean();
  static Norm ell_p(double p);
  static Norm weighted(std::vector<double> weights);
  // Parses "euclidean", "ell_p:<p>" or "weighted:<w1>,<w2>,...".
  static Norm parse(const std::string& text);

  Kind kind() const { return kind_; }
  double exponent() const { return p_; }
  const std::vector<double>& weights() const { return weights_; }

  double operator()(const double* x, int d) const;

  // (lower, upper) with lower |x|_2 <= |x| <= upper |x|_2 on R^d.
  std::pair<double, double> equivalence(int d) const;

  // Set when |x| = factor * |x|_2 on R^d.
  std::optional<double> euclidean_factor(int d) const;

  // |(x', x_axis)| = |(x', -x_axis)|; true for every supported kind.
  bool reflection_symmetric(int axis) const;

  void check_dimension(int d) const;
  std::string describe() const;
  nlohmann::json to_json() const;

 private:
  Kind kind_ = Kind::Euclidean;
  double p_ = 2.0;
  std::vector<double> weights_;
};

}  // namespace nonloc
