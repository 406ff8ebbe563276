#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nonloc/grid.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/kernel_spec.hpp"
#include "nonloc/weights.hpp"

namespace nonloc::cli {

extern const std::vector<std::string> kCommands;

// Key/value run configuration. Keys may repeat only for set_ball, set_box, omega_ball and
// omega_box (the shapes are united). `kernel` names a kernel spec file relative to base_dir.
struct RunConfig {
  KeyValueText text;
  std::string base_dir = ".";
  std::string output_override;  // command-line -o, wins over `output`

  static RunConfig parse(const std::string& contents, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);
  std::string to_text() const;

  std::string command() const { return text.get("command", ""); }
  std::uint64_t seed() const;
  std::string output_dir() const { return output_override.empty() ? text.get("output", "out") : output_override; }
  std::string resolve(const std::string& path) const;

  Kernel kernel() const;
  std::string kernel_text() const;
  // SHA-256 (hex) of the canonical config (without `output`) and the kernel spec text.
  std::string hash() const;

  Scheme scheme() const;
  Grid grid(int d) const;
  bool has_set(const std::string& prefix) const;
  // Shapes `<prefix>_ball` / `<prefix>_box` rasterized on `on` (default grid(d)), or `<prefix>_file`.
  GridSet set(const std::string& prefix, int d, const Grid* on = nullptr) const;
  // `function_file`, or `function_bump = radius, c1, .., cd` for (1 - |x - c|^2 / radius^2)_+^2.
  GridFunction function(int d) const;
};

}  // namespace nonloc::cli
