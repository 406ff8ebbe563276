#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonloc/norm.hpp"

namespace nonloc {

enum class SingularSet { None, Origin, Points };

// coeff * r^(-exponent) for lo < r <= hi (euclidean radius).
struct PowerPiece {
  double lo = 0.0;
  double hi = 0.0;
  double coeff = 0.0;
  double exponent = 0.0;
};

// One-dimensional antiderivatives on (0, inf): G' = K and H' = G.
struct Antiderivatives {
  std::function<double(double)> G;
  std::function<double(double)> H;
  double G_inf = 0.0;   // may be +inf
  double H_zero = 0.0;  // limit at 0+, may be +inf
};

struct KernelData {
  int d = 1;
  std::function<double(const double*)> eval;
  Norm norm;
  SingularSet singular = SingularSet::None;
  std::vector<std::vector<double>> points;
  double support = std::numeric_limits<double>::infinity();  // euclidean support radius
  bool symmetric = true;
  std::function<double(double)> radial;  // set when K(z) = radial(|z|_2)
  std::vector<double> breaks;            // radii where the radial profile is not smooth
  bool nonincreasing = false;            // radial profile non-increasing
  std::optional<double> homogeneity;     // K(t z) = t^(-a) K(z)
  std::vector<PowerPiece> pieces;        // radial profile as piecewise powers
  std::optional<Antiderivatives> anti;   // d = 1 closed forms
  std::optional<double> dec_c0;          // stated decay constant for the family
  std::optional<double> bound;           // finite sup K when known
  std::string family;
  std::map<std::string, double> params;
  std::map<std::string, std::vector<double>> lists;
  std::vector<std::string> transforms;
  std::uint64_t id = 0;
};

// Immutable, cheaply copyable handle to a kernel.
class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(KernelData data);

  int dim() const { return data_->d; }
  double operator()(const double* z) const { return data_->eval(z); }
  double at(const std::vector<double>& z) const { return data_->eval(z.data()); }
  double at1(double z) const { return data_->eval(&z); }

  SingularSet singular_set() const { return data_->singular; }
  const std::vector<std::vector<double>>& singular_points() const { return data_->points; }
  double support_radius() const { return data_->support; }
  bool symmetric() const { return data_->symmetric; }
  const Norm& norm() const { return data_->norm; }
  bool is_radial() const { return static_cast<bool>(data_->radial); }
  double radial(double r) const { return data_->radial(r); }
  const std::vector<double>& radial_breaks() const { return data_->breaks; }
  bool radially_nonincreasing() const { return data_->nonincreasing; }
  std::optional<double> homogeneity() const { return data_->homogeneity; }
  const std::vector<PowerPiece>& power_pieces() const { return data_->pieces; }
  const Antiderivatives* antiderivatives() const { return data_->anti ? &*data_->anti : nullptr; }
  std::optional<double> dec_constant() const { return data_->dec_c0; }
  std::optional<double> upper_bound() const { return data_->bound; }
  const std::string& family() const { return data_->family; }
  std::uint64_t id() const { return data_->id; }
  const KernelData& data() const { return *data_; }
  bool valid() const { return static_cast<bool>(data_); }

  nlohmann::json to_json() const;

 private:
  std::shared_ptr<const KernelData> data_;
};

namespace kernels {

Kernel fractional(int d, double s, double p = 1.0, const Norm& norm = Norm::euclidean());
Kernel power(int d, double exponent, const Norm& norm = Norm::euclidean());
Kernel piecewise_fractional(int d, const std::vector<double>& alphas, const std::vector<double>& s,
                            const std::vector<double>& radii, double p = 1.0,
                            const Norm& norm = Norm::euclidean());
Kernel log_fractional(int d, double s, double alpha, const Norm& norm = Norm::euclidean());
Kernel oscillating(int d, double s, double alpha, double beta, int M, const Norm& norm = Norm::euclidean());
// |z|^-d (-log|z|)^(gamma-1) on |z| < 1/3.
Kernel log_kernel(int d, double gamma);
Kernel indicator(int d, double radius, const Norm& norm = Norm::euclidean());
Kernel gaussian(int d, double sigma, double amplitude = 1.0, const Norm& norm = Norm::euclidean());
// d = 1: exp(-rate z) for z > 0, zero otherwise.
Kernel one_sided_exponential(double rate = 1.0);
// |z|^(-d-sp) * phi(z), phi(z) = alpha + (beta - alpha)(1 + sin(freq z_1))/2 in [alpha, beta].
Kernel modulated_fractional(int d, double s, double p, double alpha, double beta, double freq,
                            const Norm& norm = Norm::euclidean());
// Sum over +-offset e_1 of |z -+ offset e_1|^-exponent restricted to radius `radius`.
Kernel shifted_singular(int d, double offset, double exponent, double radius);
// Radial profile tabulated at increasing radii (linear interpolation), power tail beyond.
Kernel tabulated_radial(int d, const std::vector<double>& radii, const std::vector<double>& values,
                        double tail_exponent);

}  // namespace kernels

// (K(z) + K(-z)) / 2. Returns the input unchanged when it is already symmetric.
Kernel symmetrize(const Kernel& k);

struct Truncation {
  enum class Mode { OutsideBall, Cap, ExcludeBall };
  Mode mode = Mode::OutsideBall;
  double value = 1.0;
};

// OutsideBall and ExcludeBall zero K on the open euclidean ball; Cap takes min(value, K).
Kernel truncate(const Kernel& k, const Truncation& t);

// Antiderivatives of a symmetric 1D radial kernel given as piecewise powers.
Antiderivatives piecewise_antiderivatives(const std::vector<PowerPiece>& pieces);

}  // namespace nonloc
