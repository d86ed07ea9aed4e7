#include "gapforge/cell_spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "gapforge/error.hpp"
#include "gapforge/parallel.hpp"
#include "gapforge/quadrature.hpp"

namespace gapforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarterPi = 0.25 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

constexpr double kTrialTol = 1e-11;

// Three-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 3> kGaussX{-0.7745966692414833770, 0.0, 0.7745966692414833770};
constexpr std::array<double, 3> kGaussW{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// Integrates `f` over [a, b], splitting at pi/4 and switching to a log scale
// below it where the cap integrands behave like powers of theta.
template <typename F>
double integrate_cap(F&& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  if (a < kQuarterPi) {
    const double mid = std::min(b, kQuarterPi);
    total += integrate_log(f, a, mid, tol).value;
    a = mid;
  }
  if (b > a) total += integrate(f, a, b, tol).value;
  return total;
}

struct Element {
  double conductance = 0.0;  // int w / h^2
  double mass_first = 0.0;   // int m phi at the chain-earlier node
  double mass_second = 0.0;  // int m phi at the chain-later node
};

// P1 element on [x0, x1] with stiffness density w and mass density m.
template <typename W, typename M>
Element make_element(double x0, double x1, W&& w, M&& m) {
  const double h = x1 - x0;
  Element e;
  double w_int = 0.0;
  for (std::size_t q = 0; q < 3; ++q) {
    const double t = 0.5 * (kGaussX[q] + 1.0);
    const double x = x0 + t * h;
    const double g = 0.5 * kGaussW[q] * h;
    w_int += g * w(x);
    const double mx = g * m(x);
    e.mass_first += mx * (1.0 - t);
    e.mass_second += mx * t;
  }
  e.conductance = w_int / (h * h);
  return e;
}

std::vector<double> geometric_grid(double a, double b, int intervals) {
  std::vector<double> x(static_cast<std::size_t>(intervals) + 1);
  const double la = std::log(a);
  const double span = std::log(b) - la;
  for (int i = 0; i <= intervals; ++i) x[i] = std::exp(la + span * i / intervals);
  x.front() = a;
  x.back() = b;
  return x;
}

std::vector<double> uniform_grid(double a, double b, int intervals) {
  std::vector<double> x(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) x[i] = a + (b - a) * i / intervals;
  x.back() = b;
  return x;
}

// Graded toward the gluing circle (log spacing up to pi/4), uniform above.
std::vector<double> arc_grid(double theta, int nodes) {
  const int intervals = nodes - 1;
  if (!(theta < 0.5 * kQuarterPi)) return uniform_grid(theta, kPi, intervals);
  const int uniform = intervals - intervals / 2;
  const int graded = std::max(
      intervals / 2, static_cast<int>(std::ceil((std::log(kQuarterPi) - std::log(theta)) / kMaxLogStep)));
  auto x = geometric_grid(theta, kQuarterPi, graded);
  auto rest = uniform_grid(kQuarterPi, kPi, uniform);
  x.insert(x.end(), rest.begin() + 1, rest.end());
  return x;
}

// Chain pencil from elements listed from the natural end to the Dirichlet end.
ChainPencil chain_from_elements(const std::vector<Element>& elements) {
  ChainPencil p;
  const std::size_t nodes = elements.size();  // Dirichlet node dropped
  p.mass.assign(nodes, 0.0);
  for (std::size_t e = 0; e < elements.size(); ++e) {
    p.mass[e] += elements[e].mass_first;
    if (e + 1 < nodes) p.mass[e + 1] += elements[e].mass_second;
    if (e + 1 < elements.size()) p.conductance.push_back(elements[e].conductance);
  }
  p.right_boundary = elements.back().conductance;
  return p;
}

// Arc elements walked from theta = pi down to the gluing circle.
void append_arc_elements(std::vector<Element>& out, const std::vector<double>& theta, int n,
                         double b) {
  const double stiff_scale = std::pow(b, n - 2);
  const double mass_scale = std::pow(b, n);
  auto w = [&](double t) { return stiff_scale * std::pow(std::sin(t), n - 1); };
  auto m = [&](double t) { return mass_scale * std::pow(std::sin(t), n - 1); };
  for (std::size_t i = theta.size() - 1; i >= 1; --i) {
    Element e = make_element(theta[i - 1], theta[i], w, m);
    std::swap(e.mass_first, e.mass_second);
    out.push_back(e);
  }
}

void append_radial_elements(std::vector<Element>& out, const std::vector<double>& r, int n) {
  auto w = [n](double x) { return std::pow(x, n - 1); };
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    out.push_back(make_element(r[i], r[i + 1], w, w));
  }
}

}  // namespace

EpsGeometry eps_scale(const BubbleGeometry& base, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::InvalidGeometry, "eps_scale: eps must be positive");
  }
  EpsGeometry g;
  g.base = base;
  g.eps = eps;
  const int n = base.n;
  for (std::size_t j = 0; j < base.m(); ++j) {
    const auto& c = base.channels[j];
    ChannelScale s;
    if (n == 2) {
      s.log_d_eps = -1.0 / (c.d * eps * eps);
      s.d_eps = std::exp(s.log_d_eps);
      if (!(s.d_eps >= std::numeric_limits<double>::min())) {
        throw Error(ErrorCode::RepresentableScale,
                    "eps_scale: hole radius exp(" + std::to_string(s.log_d_eps) +
                        ") is below the smallest normal double; use a larger eps");
      }
    } else {
      s.d_eps = c.d * std::pow(eps, static_cast<double>(n) / (n - 2));
      if (!(s.d_eps >= std::numeric_limits<double>::min())) {
        throw Error(ErrorCode::RepresentableScale,
                    "eps_scale: hole radius underflows; use a larger eps");
      }
      s.log_d_eps = std::log(s.d_eps);
    }
    s.b_eps = c.b * eps;
    if (!(s.d_eps < s.b_eps)) {
      throw Error(ErrorCode::DegenerateGeometry,
                  "eps_scale: channel " + std::to_string(j) +
                      " has hole radius not below the bubble radius");
    }
    s.theta = std::asin(s.d_eps / s.b_eps);
    g.channels.push_back(s);
  }
  return g;
}

double angular_integral_F(double theta, int n) {
  if (theta == kHalfPi) return 0.0;
  if (!(theta > 0.0) || !(theta < kPi)) {
    throw Error(ErrorCode::DegenerateGeometry,
                "angular_integral_F: theta must lie strictly inside (0, pi)");
  }
  if (n < 2) throw Error(ErrorCode::InvalidDimension, "angular_integral_F: n must be >= 2");
  // Reduction formula for int csc^k from pi/2:
  //   I_k = -csc^{k-2} cot / (k-1) + (k-2)/(k-1) I_{k-2},
  //   I_0 = theta - pi/2,  I_1 = ln tan(theta/2).
  const int k = n - 1;
  const double csc = 1.0 / std::sin(theta);
  const double cot = std::cos(theta) * csc;
  double value = (k % 2 == 0) ? theta - kHalfPi : std::log(std::tan(0.5 * theta));
  for (int j = (k % 2 == 0) ? 2 : 3; j <= k; j += 2) {
    value = -std::pow(csc, j - 2) * cot / (j - 1) + (j - 2.0) / (j - 1) * value;
  }
  return value;
}

double cutoff(double theta) {
  if (theta <= kQuarterPi) return 1.0;
  if (theta >= kHalfPi) return 0.0;
  const double s = (theta - kQuarterPi) / kQuarterPi;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff_slope(double theta) {
  if (theta <= kQuarterPi || theta >= kHalfPi) return 0.0;
  const double s = (theta - kQuarterPi) / kQuarterPi;
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / kQuarterPi;
}

double TrialFunction::harmonic_annulus(double r) const {
  if (r >= zero_radius) return 0.0;
  if (n == 2) return A * std::log(r / zero_radius);
  return A * std::pow(r, 2 - n) + B;
}

double TrialFunction::harmonic_annulus_slope(double r) const {
  if (r >= zero_radius) return 0.0;
  if (n == 2) return A / r;
  return (2 - n) * A * std::pow(r, 1 - n);
}

double TrialFunction::harmonic_cap(double t) const {
  if (t >= kHalfPi) return 1.0;
  return C * angular_integral_F(t, n) + 1.0;
}

double TrialFunction::harmonic_cap_slope(double t) const {
  if (t >= kHalfPi) return 0.0;
  return C * std::pow(std::sin(t), 1 - n);
}

double TrialFunction::cutoff_cap(double t) const {
  if (t >= kHalfPi) return 1.0;
  const double phi = cutoff(t);
  return phi == 0.0 ? 1.0 : 1.0 + C * angular_integral_F(t, n) * phi;
}

double TrialFunction::cutoff_cap_slope(double t) const {
  if (t >= kHalfPi) return 0.0;
  const double phi = cutoff(t);
  const double dphi = cutoff_slope(t);
  double slope = C * std::pow(std::sin(t), 1 - n) * phi;
  if (dphi != 0.0) slope += C * angular_integral_F(t, n) * dphi;
  return slope;
}

TrialFunction trial_constants(const EpsGeometry& geom, std::size_t j) {
  const int n = geom.n();
  const auto& s = geom.channels.at(j);
  TrialFunction v;
  v.n = n;
  v.d_eps = s.d_eps;
  v.b_eps = s.b_eps;
  v.theta = s.theta;
  v.zero_radius = geom.half_separation();
  v.outer_radius = geom.outer_radius(j);
  if (!(s.d_eps < v.zero_radius)) {
    throw Error(ErrorCode::DegenerateGeometry,
                "trial_constants: hole radius must be below kappa eps / 2");
  }
  const double F_theta = angular_integral_F(s.theta, n);
  if (n == 2) {
    // A ln(r / (kappa eps / 2)) on the annulus, -A F(theta) + 1 on the cap;
    // the logs are formed from ln d_eps so exponentially small holes work.
    const double denom = (s.log_d_eps - std::log(v.zero_radius)) + F_theta;
    if (std::abs(denom) < 1e-14) {
      throw Error(ErrorCode::DegenerateGeometry, "trial_constants: degenerate denominator");
    }
    v.A = 1.0 / denom;
    v.B = -v.A * std::log(v.zero_radius);
    v.C = -v.A;
  } else {
    const double ratio_sep = std::pow(s.d_eps / v.zero_radius, n - 2);
    const double ratio_bub = std::pow(s.d_eps / s.b_eps, n - 2);
    const double denom = 1.0 - ratio_sep - (n - 2) * F_theta * ratio_bub;
    if (std::abs(denom) < 1e-14) {
      throw Error(ErrorCode::DegenerateGeometry, "trial_constants: degenerate denominator");
    }
    v.A = std::pow(s.d_eps, n - 2) / denom;
    v.B = -v.A / std::pow(v.zero_radius, n - 2);
    v.C = (n - 2) * v.A / std::pow(s.b_eps, n - 2);
  }
  const double inner = n == 2 ? v.A * (s.log_d_eps - std::log(v.zero_radius))
                              : v.harmonic_annulus(s.d_eps);
  const double cap = v.C * F_theta + 1.0;
  if (std::abs(inner - cap) > 1e-10 * std::max(1.0, std::abs(cap))) {
    throw Error(ErrorCode::InternalInvariant, "trial_constants: junction continuity violated");
  }
  return v;
}

RayleighBound trial_rayleigh(const EpsGeometry& geom, std::size_t j) {
  const TrialFunction v = trial_constants(geom, j);
  const int n = v.n;
  auto r_pow = [n](double r) { return std::pow(r, n - 1); };
  auto sin_pow = [n](double t) { return std::pow(std::sin(t), n - 1); };

  double annulus_grad = 0.0;
  double annulus_mass = 0.0;
  if (n == 2) {
    // Integrands are A^2/r and A^2 ln^2(r/r0) r; the log substitution handles
    // any hole size.
    const double la = geom.channels[j].log_d_eps;
    const double lb = std::log(v.zero_radius);
    annulus_grad = v.A * v.A * (lb - la);
    annulus_mass = integrate(
                       [&](double t) {
                         const double r = std::exp(t);
                         const double val = v.A * (t - lb);
                         return val * val * r * r;
                       },
                       la, lb, kTrialTol)
                       .value;
  } else {
    annulus_grad = integrate_log(
                       [&](double r) {
                         const double g = v.harmonic_annulus_slope(r);
                         return g * g * r_pow(r);
                       },
                       v.d_eps, v.zero_radius, kTrialTol)
                       .value;
    annulus_mass = integrate_log(
                       [&](double r) {
                         const double u = v.harmonic_annulus(r);
                         return u * u * r_pow(r);
                       },
                       v.d_eps, v.zero_radius, kTrialTol)
                       .value;
  }
  const double cap_grad = integrate_cap(
      [&](double t) {
        const double g = v.cutoff_cap_slope(t);
        return g * g * sin_pow(t);
      },
      v.theta, kHalfPi, kTrialTol);
  const double cap_mass = integrate_cap(
                              [&](double t) {
                                const double u = v.cutoff_cap(t);
                                return u * u * sin_pow(t);
                              },
                              v.theta, kHalfPi, kTrialTol) +
                          integrate(sin_pow, kHalfPi, kPi, kTrialTol).value;

  const double omega = sphere_measure(n - 1);
  RayleighBound out;
  out.numerator = omega * (annulus_grad + std::pow(v.b_eps, n - 2) * cap_grad);
  out.denominator = omega * (annulus_mass + std::pow(v.b_eps, n) * cap_mass);
  out.quotient = out.numerator / out.denominator;
  return out;
}

JunctionFlux junction_flux(const EpsGeometry& geom, std::size_t j) {
  const TrialFunction v = trial_constants(geom, j);
  const int n = geom.n();
  JunctionFlux out;
  out.flux = n == 2 ? -v.A * sphere_measure(1) : (n - 2) * v.A * sphere_measure(n - 1);
  const auto& c = geom.base.channels[j];
  out.ratio = out.flux /
              (channel_sigma(n, c) * channel_rho(n, c) * std::pow(geom.eps, n));
  return out;
}

RadialCell assemble_cell(const CellShape& shape, RadialResolution res, CellKind kind) {
  const int n = shape.n;
  if (n < 2) throw Error(ErrorCode::InvalidDimension, "radial cell: n must be >= 2");
  RadialCell cell;
  cell.n = n;
  cell.kind = kind;
  std::vector<Element> elements;
  switch (kind) {
    case CellKind::Full: {
      if (res.arc_nodes < 2 || res.annulus_nodes < 2) {
        throw Error(ErrorCode::InvalidResolution, "radial cell: too few nodes");
      }
      if (!(shape.outer_radius > shape.hole_radius)) {
        throw Error(ErrorCode::DegenerateGeometry, "radial cell: empty annulus");
      }
      cell.arc_nodes = arc_grid(shape.theta, res.arc_nodes);
      // Linear elements misjudge the conductance of an element spanning a
      // large radius ratio, so very thin holes get extra nodes.
      const double log_span = std::log(shape.outer_radius) - std::log(shape.hole_radius);
      const int intervals =
          std::max(res.annulus_nodes - 1, static_cast<int>(std::ceil(log_span / kMaxLogStep)));
      cell.annulus_nodes = geometric_grid(shape.hole_radius, shape.outer_radius, intervals);
      append_arc_elements(elements, cell.arc_nodes, n, shape.bubble_radius);
      append_radial_elements(elements, cell.annulus_nodes, n);
      break;
    }
    case CellKind::BubbleOnly: {
      if (res.arc_nodes < 3) throw Error(ErrorCode::InvalidResolution, "radial cell: too few nodes");
      cell.arc_nodes = arc_grid(shape.theta, res.arc_nodes);
      append_arc_elements(elements, cell.arc_nodes, n, shape.bubble_radius);
      break;
    }
    case CellKind::Disk: {
      if (res.annulus_nodes < 3) {
        throw Error(ErrorCode::InvalidResolution, "radial cell: too few nodes");
      }
      cell.annulus_nodes = uniform_grid(0.0, shape.outer_radius, res.annulus_nodes - 1);
      append_radial_elements(elements, cell.annulus_nodes, n);
      break;
    }
  }
  cell.pencil = chain_from_elements(elements);
  return cell;
}

RadialCell build_radial_cell(const EpsGeometry& geom, std::size_t j, RadialResolution res) {
  const auto& s = geom.channels.at(j);
  return assemble_cell({geom.n(), s.d_eps, s.b_eps, s.theta, geom.outer_radius(j)}, res,
                       CellKind::Full);
}

RadialCell build_bubble_cell(const EpsGeometry& geom, std::size_t j, int arc_nodes) {
  const auto& s = geom.channels.at(j);
  return assemble_cell({geom.n(), s.d_eps, s.b_eps, s.theta, 0.0}, {0, arc_nodes},
                       CellKind::BubbleOnly);
}

RadialCell build_disk_cell(int n, double radius, int nodes) {
  if (!(radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "disk cell: radius must be > 0");
  return assemble_cell({n, 0.0, 0.0, 0.0, radius}, {nodes, 0}, CellKind::Disk);
}

std::vector<double> radial_eigenvalues(const RadialCell& cell, std::size_t k) {
  const bool needs_arc = cell.kind != CellKind::Disk;
  const bool needs_annulus = cell.kind != CellKind::BubbleOnly;
  if ((needs_arc && cell.arc_nodes.size() < kMinSegmentNodes) ||
      (needs_annulus && cell.annulus_nodes.size() < kMinSegmentNodes)) {
    throw Error(ErrorCode::InvalidResolution,
                "radial_eigenvalues: each segment needs at least " +
                    std::to_string(kMinSegmentNodes) + " nodes");
  }
  return chain_eigenvalues(cell.pencil, k, 1e-14);
}

double disk_dirichlet_eigenvalue(int n, double radius) {
  constexpr int kCoarse = 1025;
  const double coarse = radial_eigenvalues(build_disk_cell(n, radius, kCoarse), 1)[0];
  const double fine = radial_eigenvalues(build_disk_cell(n, radius, 2 * kCoarse - 1), 1)[0];
  return fine + (fine - coarse) / 3.0;
}

ReferenceLimits reference_limits(const BubbleGeometry& base, double kappa, std::size_t j) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidGeometry, "reference_limits: kappa must be > 0");
  const int n = base.n;
  ReferenceLimits out;
  out.lambda1_D_disk = disk_dirichlet_eigenvalue(n, 0.5 * kappa);
  const double b = base.channels.at(j).b;
  out.lambda2_sphere = n / (b * b);
  out.lambda2_N_cube = kPi * kPi;
  out.Lj_lambda2 = std::min(out.lambda1_D_disk, out.lambda2_sphere);
  out.L_lambda_m_plus_2 = out.lambda2_N_cube;
  for (const auto& c : base.channels) {
    out.L_lambda_m_plus_2 = std::min(out.L_lambda_m_plus_2, n / (c.b * c.b));
  }
  return out;
}

std::vector<ConvergenceRow> convergence_table(const BubbleGeometry& base, double kappa,
                                              std::size_t j, const std::vector<double>& eps_list,
                                              RadialResolution res) {
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    if (!(eps_list[k] < eps_list[k - 1])) {
      throw Error(ErrorCode::InvalidGeometry, "convergence_table: eps_list must be decreasing");
    }
  }
  BubbleGeometry geom = base;
  geom.kappa = kappa;
  const ReferenceLimits ref = reference_limits(geom, kappa, j);
  const double sigma = channel_sigma(geom.n, geom.channels.at(j));
  std::vector<ConvergenceRow> rows(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t k) {
    const EpsGeometry g = eps_scale(geom, eps_list[k]);
    const auto eigs = radial_eigenvalues(build_radial_cell(g, j, res), 2);
    ConvergenceRow& row = rows[k];
    row.eps = eps_list[k];
    row.lambda1 = eigs[0];
    row.lambda2 = eigs[1];
    row.rayleigh_upper = trial_rayleigh(g, j).quotient;
    row.eps2_lambda2 = eps_list[k] * eps_list[k] * eigs[1];
    row.sigma_target = sigma;
    row.Lj_lambda2 = ref.Lj_lambda2;
    row.resolution = res;
  });
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "eps,lambda1,lambda2,rayleigh_upper,eps2_lambda2,sigma_target,Lj_lambda2,resolution\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.eps,
                  r.lambda1, r.lambda2, r.rayleigh_upper, r.eps2_lambda2, r.sigma_target,
                  r.Lj_lambda2, std::max(r.resolution.annulus_nodes, r.resolution.arc_nodes));
    os << buf;
  }
}

void to_json(nlohmann::json& j, const EpsGeometry& g) {
  std::vector<double> d, b, theta;
  for (const auto& c : g.channels) {
    d.push_back(c.d_eps);
    b.push_back(c.b_eps);
    theta.push_back(c.theta);
  }
  j = {{"n", g.n()}, {"eps", g.eps}, {"kappa", g.base.kappa},
       {"d_eps", d}, {"b_eps", b},   {"theta", theta}};
}

void to_json(nlohmann::json& j, const ReferenceLimits& r) {
  j = {{"lambda1_D_disk", r.lambda1_D_disk},
       {"lambda2_sphere", r.lambda2_sphere},
       {"lambda2_N_cube", r.lambda2_N_cube},
       {"Lj_lambda2", r.Lj_lambda2},
       {"L_lambda_m_plus_2", r.L_lambda_m_plus_2}};
}

void to_json(nlohmann::json& j, const ConvergenceRow& r) {
  j = {{"eps", r.eps},
       {"lambda1", r.lambda1},
       {"lambda2", r.lambda2},
       {"rayleigh_upper", r.rayleigh_upper},
       {"eps2_lambda2", r.eps2_lambda2},
       {"sigma_target", r.sigma_target},
       {"Lj_lambda2", r.Lj_lambda2},
       {"resolution", {{"annulus_nodes", r.resolution.annulus_nodes},
                       {"arc_nodes", r.resolution.arc_nodes}}}};
}

}  // namespace gapforge
