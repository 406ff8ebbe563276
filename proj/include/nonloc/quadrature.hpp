#pragma once

#include <functional>
#include <vector>

namespace nonloc::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool infinite = false;   // divergence detected by the escalation rule
  bool converged = true;   // false: budget exhausted, value is partial
  int levels = 0;
};

using Fn1 = std::function<double(double)>;
using FnN = std::function<double(const double*)>;

// Adaptive Gauss-Kronrod on a finite interval; `breaks` are interior points where f is not smooth.
Estimate gauss_kronrod(const Fn1& f, double a, double b, double rtol = 1e-12,
                       const std::vector<double>& breaks = {});

// Double-exponential rule for integrable endpoint singularities on [a, b].
Estimate tanh_sinh(const Fn1& f, double a, double b, double rtol = 1e-12);

struct ShellOptions {
  double growth_factor = 1.5;  // escalation rule threshold
  int max_levels = 80;
  int stall_levels = 6;        // non-shrinking increments in a row => divergent
  double rtol = 1e-12;
};

// Integral of f over [a, end) (end may be +inf) as a sum over dyadic shells [a 2^k, a 2^(k+1)].
Estimate outward_shells(const Fn1& f, double a, double end, const ShellOptions& opt = {},
                        const std::vector<double>& breaks = {});

// Integral of f over (0, b] as a sum over dyadic shells [b 2^-(k+1), b 2^-k].
Estimate inward_shells(const Fn1& f, double b, const ShellOptions& opt = {},
                       const std::vector<double>& breaks = {});

// Shell-sequence driver shared by the two routines above; shell(k) integrates level k.
Estimate shell_series(const std::function<Estimate(int)>& shell, int last_level,
                      const ShellOptions& opt);

// h-adaptive tensor Gauss-Legendre cubature over the box [lo, hi] in d dimensions.
Estimate cubature(const FnN& f, int d, const double* lo, const double* hi, double abs_tol,
                  double rel_tol, long max_evals = 2'000'000);

// Fixed tensor Gauss-Legendre rule with n points per axis (n in {1,2,3,4,6,8}).
double tensor_gauss(const FnN& f, int d, const double* lo, const double* hi, int n);

}  // namespace nonloc::quad
