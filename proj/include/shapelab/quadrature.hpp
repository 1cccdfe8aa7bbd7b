#pragma once

#include <functional>
#include <vector>

namespace shapelab {

struct QuadResult {
  double value = 0.0;
  double abs_err = 0.0;   // accumulated error estimate
  long evals = 0;
  bool converged = true;  // false when the eval budget ran out first
};

// Adaptive Simpson on [a,b]. `breakpoints` are interior locations where the
// integrand is allowed to kink or jump; integration restarts on each piece.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol_abs = 1e-10, long max_evals = 2'000'000,
                     const std::vector<double>& breakpoints = {});

// Gauss-Legendre nodes/weights on [-1,1], n in {8, 16, 32}. Used by the fixed
// low-order rules in the density integrals.
const std::vector<double>& gauss_nodes(int n);
const std::vector<double>& gauss_weights(int n);

}  // namespace shapelab
