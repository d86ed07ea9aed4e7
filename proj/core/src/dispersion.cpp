#include "gapforge/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

constexpr double kPoleRelTol = 1e-14;

double f_unchecked(const HomogenizedModel& model, double lambda) {
  double f = 1.0;
  for (std::size_t j = 0; j < model.m(); ++j) {
    f += model.sigma[j] * model.rho[j] / (model.sigma[j] - lambda);
  }
  return f;
}

void check_pole(const HomogenizedModel& model, double lambda) {
  for (double s : model.sigma) {
    if (std::abs(lambda - s) < kPoleRelTol * s) {
      throw Error(ErrorCode::PoleEvaluation,
                  "dispersion evaluated at the resonance sigma = " + std::to_string(s));
    }
  }
}

// Root of an increasing function on the open interval (lo, hi) given
// g(lo+) < 0 < g(hi-). Runs until the bracket cannot shrink further.
template <typename G>
double bisect_increasing(G&& g, double lo, double hi) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double v = g(mid);
    if (v == 0.0) return mid;
    if (v < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

// Safe starting bound for the root above the last resonance.
double upper_bracket_seed(const HomogenizedModel& model) {
  double rho_sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < model.m(); ++j) {
    rho_sum += model.rho[j];
    weighted += model.sigma[j] * model.rho[j];
  }
  return model.sigma.back() * (1.0 + rho_sum) + weighted;
}

std::vector<double> poly_mul_linear(const std::vector<double>& p, double c0, double c1) {
  // p(x) * (c0 + c1 x)
  std::vector<double> out(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] += c0 * p[k];
    out[k + 1] += c1 * p[k];
  }
  return out;
}

}  // namespace

double f_eval(const HomogenizedModel& model, double lambda) {
  check_pole(model, lambda);
  return f_unchecked(model, lambda);
}

double dispersion_eval(const HomogenizedModel& model, double lambda) {
  check_pole(model, lambda);
  return lambda * f_unchecked(model, lambda);
}

std::vector<double> mu_roots(const HomogenizedModel& model) {
  const auto m = model.m();
  std::vector<double> mu(m);
  auto F = [&](double x) { return f_unchecked(model, x); };
  for (std::size_t j = 0; j + 1 < m; ++j) {
    mu[j] = bisect_increasing(F, model.sigma[j], model.sigma[j + 1]);
  }
  if (m > 0) {
    double upper = upper_bracket_seed(model);
    int doublings = 0;
    while (!(F(upper) > 0.0)) {
      upper *= 2.0;
      if (++doublings > 200) {
        throw Error(ErrorCode::InternalInvariant, "mu_roots: no sign change above sigma_m");
      }
    }
    mu[m - 1] = bisect_increasing(F, model.sigma[m - 1], upper);
  }
  for (std::size_t j = 0; j < m; ++j) {
    const bool below_next = (j + 1 == m) || mu[j] < model.sigma[j + 1];
    if (!(mu[j] > model.sigma[j]) || !below_next) {
      throw Error(ErrorCode::InternalInvariant, "mu_roots: interlacing violated");
    }
  }
  return mu;
}

const std::vector<double>& cache_mu(HomogenizedModel& model) {
  model.mu = mu_roots(model);
  return *model.mu;
}

std::vector<double> level_set_roots(const HomogenizedModel& model, double a) {
  if (!(a >= 0.0)) {
    throw Error(ErrorCode::InvalidInterval, "level_set_roots: level must be nonnegative");
  }
  const auto m = model.m();
  if (m == 0) return {a};
  auto g = [&](double x) { return x * f_unchecked(model, x) - a; };
  std::vector<double> roots;
  roots.reserve(m + 1);
  roots.push_back(a == 0.0 ? 0.0 : bisect_increasing(g, 0.0, model.sigma[0]));
  for (std::size_t j = 0; j + 1 < m; ++j) {
    roots.push_back(bisect_increasing(g, model.sigma[j], model.sigma[j + 1]));
  }
  double upper = std::max(upper_bracket_seed(model), 2.0 * model.sigma.back()) + a;
  int doublings = 0;
  while (!(g(upper) > 0.0)) {
    upper *= 2.0;
    if (++doublings > 200) {
      throw Error(ErrorCode::InternalInvariant, "level_set_roots: no sign change on last branch");
    }
  }
  roots.push_back(bisect_increasing(g, model.sigma.back(), upper));
  return roots;
}

std::vector<double> level_set_polynomial(const HomogenizedModel& model, double a) {
  const auto m = model.m();
  // prod_j (sigma_j - x)
  std::vector<double> full{1.0};
  for (double s : model.sigma) full = poly_mul_linear(full, s, -1.0);
  std::vector<double> p = poly_mul_linear(full, -a, 1.0);  // (x - a) prod
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> partial{model.sigma[j] * model.rho[j]};
    for (std::size_t i = 0; i < m; ++i) {
      if (i != j) partial = poly_mul_linear(partial, model.sigma[i], -1.0);
    }
    partial = poly_mul_linear(partial, 0.0, 1.0);  // times x
    for (std::size_t k = 0; k < partial.size(); ++k) p[k] += partial[k];
  }
  return p;
}

std::vector<double> level_set_roots_polynomial(const HomogenizedModel& model, double a) {
  const auto p = level_set_polynomial(model, a);
  const auto degree = static_cast<Eigen::Index>(p.size()) - 1;
  if (degree == 1) return {-p[0] / p[1]};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
  for (Eigen::Index k = 0; k < degree; ++k) companion(k, degree - 1) = -p[k] / p[degree];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<double> roots;
  for (Eigen::Index k = 0; k < degree; ++k) {
    const std::complex<double> z = solver.eigenvalues()[k];
    if (std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z))) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

LimitSpectrum limit_spectrum(const HomogenizedModel& model, double L) {
  const auto m = model.m();
  const std::vector<double> mu = model.mu ? *model.mu : mu_roots(model);
  const double top = m == 0 ? 0.0 : std::max(mu.back(), model.sigma.back());
  if (!(L > top) || !(L > 0.0)) {
    throw Error(ErrorCode::HorizonTooSmall,
                "limit_spectrum: L must exceed the last gap edge " + std::to_string(top));
  }
  std::vector<Interval> gaps;
  std::vector<Interval> bands;
  double cursor = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    gaps.push_back({model.sigma[j], mu[j]});
    bands.push_back({cursor, model.sigma[j]});
    cursor = mu[j];
  }
  bands.push_back({cursor, L});
  return {IntervalSet::from_unsorted(std::move(bands)), IntervalSet::from_unsorted(std::move(gaps))};
}

DispersionCurve sample_curve(const HomogenizedModel& model, std::pair<double, double> range,
                             int count) {
  if (count < 2) {
    throw Error(ErrorCode::InvalidResolution, "sample_curve: count must be at least 2");
  }
  const auto [lo, hi] = range;
  if (!(hi > lo)) {
    throw Error(ErrorCode::InvalidInterval, "sample_curve: empty range");
  }
  DispersionCurve curve;
  curve.model = model;
  curve.samples.resize(static_cast<std::size_t>(count));
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) {
    auto& s = curve.samples[static_cast<std::size_t>(i)];
    s.lambda = (i == count - 1) ? hi : lo + i * step;
    s.pole_adjacent = std::any_of(model.sigma.begin(), model.sigma.end(), [&](double sigma) {
      return std::abs(s.lambda - sigma) < kPoleAdjacency;
    });
    s.value = s.pole_adjacent ? std::numeric_limits<double>::quiet_NaN()
                              : s.lambda * f_unchecked(model, s.lambda);
  }
  return curve;
}

void write_curve_csv(std::ostream& os, const DispersionCurve& curve) {
  os << "lambda,value,pole_adjacent\n";
  char buf[64];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.lambda);
    os << buf << ',';
    if (s.pole_adjacent) {
      os << "nan";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", s.value);
      os << buf;
    }
    os << ',' << (s.pole_adjacent ? 1 : 0) << '\n';
  }
}

}  // namespace gapforge
