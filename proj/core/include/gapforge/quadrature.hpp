#pragma once

#include <functional>

namespace gapforge {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive Gauss-Kronrod on [a, b]. Throws Error(QuadratureFailure) with the
/// achieved error estimate when the relative tolerance cannot be met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12);

/// Same, after the substitution x = exp(t). Requires 0 < a; suited to
/// integrands that vary on a logarithmic scale near a.
QuadratureResult integrate_log(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-12);

}  // namespace gapforge
