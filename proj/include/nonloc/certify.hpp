#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "nonloc/kernel.hpp"

namespace nonloc {

enum class Hypothesis { Nint, Far, Dec, Dou, Nts, Sym, Pos, Inf };
enum class Verdict { Holds, Fails, Inconclusive };

Hypothesis parse_hypothesis(const std::string& name);
std::string to_string(Hypothesis h);
std::string to_string(Verdict v);

struct SamplingConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 20000;
  double r_min = 1e-3;                // sampling radii in the chosen norm
  double r_max = 1e3;
  std::optional<double> doubling_radius;  // D; defaults to support/2 or 1
  double nts_p = 1.0;
  nlohmann::json to_json() const;
};

struct CertificateReport {
  Hypothesis hypothesis = Hypothesis::Dec;
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::json constants = nlohmann::json::object();
  nlohmann::json witnesses = nlohmann::json::array();
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json to_json() const;
};

// Sampling-based check of one hypothesis. `fails` always comes with re-evaluable witnesses.
// Deterministic for a given seed regardless of the worker count.
CertificateReport certify(const Kernel& k, Hypothesis h, const Norm& norm, const SamplingConfig& cfg = {});

}  // namespace nonloc
