#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "gapforge/homogenized.hpp"
#include "gapforge/interval_set.hpp"

namespace gapforge {

/// F(lambda) = 1 + sum_j sigma_j rho_j / (sigma_j - lambda).
double f_eval(const HomogenizedModel& model, double lambda);

/// lambda * F(lambda). Strictly increasing between consecutive poles.
double dispersion_eval(const HomogenizedModel& model, double lambda);

/// Roots of F: one in each (sigma_j, sigma_{j+1}) and one above sigma_m.
/// Bisection on the known sign structure, run to machine resolution.
std::vector<double> mu_roots(const HomogenizedModel& model);

/// Same as mu_roots but stores the result in `model.mu`.
const std::vector<double>& cache_mu(HomogenizedModel& model);

/// All m+1 real solutions of lambda F(lambda) = a for a >= 0, one per
/// monotone branch, ascending.
std::vector<double> level_set_roots(const HomogenizedModel& model, double a);

/// Coefficients (ascending powers) of the degree m+1 polynomial obtained by
/// clearing the denominators of lambda F(lambda) - a.
std::vector<double> level_set_polynomial(const HomogenizedModel& model, double a);

/// Real roots of level_set_polynomial via companion-matrix eigenvalues; an
/// independent cross-check for level_set_roots.
std::vector<double> level_set_roots_polynomial(const HomogenizedModel& model, double a);

struct LimitSpectrum {
  IntervalSet bands;  // closed
  IntervalSet gaps;   // open: (sigma_j, mu_j)
};

/// Band/gap structure of the limit operator on [0, L].
LimitSpectrum limit_spectrum(const HomogenizedModel& model, double L);

struct CurveSample {
  double lambda = 0.0;
  double value = 0.0;  // NaN when pole_adjacent
  bool pole_adjacent = false;
};

struct DispersionCurve {
  std::vector<CurveSample> samples;
  HomogenizedModel model;
};

inline constexpr double kPoleAdjacency = 1e-6;

/// Uniform grid on [lo, hi] with `count` points; samples within
/// kPoleAdjacency of a resonance are flagged and carry no value.
DispersionCurve sample_curve(const HomogenizedModel& model, std::pair<double, double> range,
                             int count);

/// CSV with header `lambda,value,pole_adjacent`.
void write_curve_csv(std::ostream& os, const DispersionCurve& curve);

}  // namespace gapforge
