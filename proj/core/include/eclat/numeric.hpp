#pragma once

#include <cstddef>
#include <functional>

namespace eclat::numeric {

struct Minimum {
  double x;
  double value;
  int iterations;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than rel_tol * max(|x|, abs_floor).
Minimum golden_section(const std::function<double(double)>& f, double lo,
                       double hi, double rel_tol = 1e-6,
                       double abs_floor = 1e-12, int max_iter = 500);

/// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double* error_estimate = nullptr);

/// Binomial coefficient C(n, j) as a double.
double binomial(int n, int j);

}  // namespace eclat::numeric
