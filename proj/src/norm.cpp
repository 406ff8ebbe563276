#include "nonloc/norm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nonloc {

Norm Norm::euclidean() { return Norm{}; }

Norm Norm::ell_p(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("ell_p norm needs p >= 1");
  Norm n;
  n.kind_ = Kind::EllP;
  n.p_ = p;
  return n;
}

Norm Norm::weighted(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("weighted norm needs at least one weight");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weighted norm needs positive weights");
  Norm n;
  n.kind_ = Kind::WeightedDiagonal;
  n.weights_ = std::move(weights);
  return n;
}

Norm Norm::parse(const std::string& text) {
  if (text == "euclidean") return euclidean();
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "ell_p") {
    if (rest.empty()) throw std::invalid_argument("ell_p norm needs an exponent, e.g. ell_p:3");
    return ell_p(std::stod(rest));
  }
  if (head == "weighted") {
    std::vector<double> w;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) w.push_back(std::stod(item));
    return weighted(std::move(w));
  }
  throw std::invalid_argument("unknown norm '" + text + "'");
}

double Norm::operator()(const double* x, int d) const {
  switch (kind_) {
    case Kind::Euclidean: {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += x[i] * x[i];
      return std::sqrt(s);
    }
    case Kind::EllP: {
      if (std::isinf(p_)) {
        double m = 0.0;
        for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[i]));
        return m;
      }
      double m = 0.0;
      for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[i]));
      if (m == 0.0) return 0.0;
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += std::pow(std::abs(x[i]) / m, p_);
      return m * std::pow(s, 1.0 / p_);
    }
    case Kind::WeightedDiagonal: {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += weights_[i] * x[i] * x[i];
      return std::sqrt(s);
    }
  }
  return 0.0;
}

std::pair<double, double> Norm::equivalence(int d) const {
  switch (kind_) {
    case Kind::Euclidean:
      return {1.0, 1.0};
    case Kind::EllP: {
      double e = std::isinf(p_) ? -0.5 : 1.0 / p_ - 0.5;
      double f = std::pow(static_cast<double>(d), e);
      return p_ >= 2.0 ? std::pair{f, 1.0} : std::pair{1.0, f};
    }
    case Kind::WeightedDiagonal: {
      auto [lo, hi] = std::minmax_element(weights_.begin(), weights_.begin() + d);
      return {std::sqrt(*lo), std::sqrt(*hi)};
    }
  }
  return {1.0, 1.0};
}

std::optional<double> Norm::euclidean_factor(int d) const {
  switch (kind_) {
    case Kind::Euclidean:
      return 1.0;
    case Kind::EllP:
      if (d == 1) return 1.0;
      return std::nullopt;
    case Kind::WeightedDiagonal: {
      for (int i = 1; i < d; ++i)
        if (weights_[i] != weights_[0]) return std::nullopt;
      return std::sqrt(weights_[0]);
    }
  }
  return std::nullopt;
}

bool Norm::reflection_symmetric(int) const { return true; }

void Norm::check_dimension(int d) const {
  if (kind_ == Kind::WeightedDiagonal && static_cast<int>(weights_.size()) < d)
    throw std::invalid_argument("weighted norm has fewer weights than the dimension");
}

std::string Norm::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Euclidean:
      return "euclidean";
    case Kind::EllP:
      os << "ell_p:" << p_;
      return os.str();
    case Kind::WeightedDiagonal:
      os << "weighted:";
      for (std::size_t i = 0; i < weights_.size(); ++i) os << (i ? "," : "") << weights_[i];
      return os.str();
  }
  return "";
}

nlohmann::json Norm::to_json() const { return describe(); }

}  // namespace nonloc
