#include "gapforge/quadrature.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

// Accept the estimate if it is within this multiple of the requested
// tolerance; Kronrod estimates are pessimistic for smooth integrands.
constexpr double kAcceptFactor = 1e4;

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol) {
  if (a == b) return {0.0, 0.0};
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 30, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > kAcceptFactor * rel_tol * std::max(l1, 1e-300)) {
    throw Error(ErrorCode::QuadratureFailure,
                "quadrature did not converge: estimate " + std::to_string(value) +
                    ", error estimate " + std::to_string(error));
  }
  return {value, error};
}

QuadratureResult integrate_log(const std::function<double(double)>& f, double a, double b,
                               double rel_tol) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::QuadratureFailure, "integrate_log: limits must be positive");
  }
  auto g = [&f](double t) {
    const double x = std::exp(t);
    return f(x) * x;
  };
  return integrate(g, std::log(a), std::log(b), rel_tol);
}

}  // namespace gapforge
