#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gapforge/chain_pencil.hpp"
#include "gapforge/homogenized.hpp"

namespace gapforge {

/// Physical radii of one channel at scale eps.
struct ChannelScale {
  double d_eps = 0.0;      // hole radius
  double log_d_eps = 0.0;  // ln d_eps, exact even where d_eps is tiny
  double b_eps = 0.0;      // bubble radius
  double theta = 0.0;      // polar angle of the gluing circle, asin(d_eps / b_eps)
};

struct EpsGeometry {
  BubbleGeometry base;
  double eps = 0.0;
  std::vector<ChannelScale> channels;

  int n() const { return base.n; }
  /// kappa * eps / 2
  double half_separation() const { return 0.5 * base.kappa * eps; }
  /// Radius of the Dirichlet sphere around hole j.
  double outer_radius(std::size_t j) const { return channels[j].d_eps + half_separation(); }
};

/// d_eps = d eps^{n/(n-2)} (n > 2) or exp(-1/(d eps^2)) (n = 2); b_eps = b eps.
EpsGeometry eps_scale(const BubbleGeometry& base, double eps);

/// int_{pi/2}^{theta} sin^{1-n}(psi) dpsi for theta in (0, pi).
double angular_integral_F(double theta, int n);

/// C^2 cutoff: 1 on [0, pi/4], 0 on [pi/2, inf).
double cutoff(double theta);
double cutoff_slope(double theta);

/// Harmonic profile on the annulus and the upper half of the cap used to
/// bound the first cell eigenvalue from above.
///   annulus (n > 2): A r^{2-n} + B     annulus (n = 2): A ln r + B
///   cap:             C F(theta) + 1
/// It vanishes at r = kappa eps / 2 and is continued by zero up to the
/// Dirichlet sphere, so it is admissible for the Dirichlet cell.
struct TrialFunction {
  int n = 0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double d_eps = 0.0;
  double b_eps = 0.0;
  double theta = 0.0;
  double zero_radius = 0.0;   // kappa eps / 2
  double outer_radius = 0.0;  // d_eps + kappa eps / 2

  double harmonic_annulus(double r) const;  // v-hat on [d_eps, outer_radius]
  double harmonic_annulus_slope(double r) const;
  double harmonic_cap(double theta) const;  // v-hat on [theta, pi]
  double harmonic_cap_slope(double theta) const;
  double cutoff_cap(double theta) const;  // bold v on the cap
  double cutoff_cap_slope(double theta) const;
};

TrialFunction trial_constants(const EpsGeometry& geom, std::size_t j);

struct RayleighBound {
  double numerator = 0.0;    // ||grad v||^2 over the cell
  double denominator = 0.0;  // ||v||^2 over the cell
  double quotient = 0.0;
};

RayleighBound trial_rayleigh(const EpsGeometry& geom, std::size_t j);

struct JunctionFlux {
  double flux = 0.0;   // (n-2) A omega_{n-1}; -A omega_1 for n = 2
  double ratio = 0.0;  // flux / (sigma_j rho_j eps^n)
};

JunctionFlux junction_flux(const EpsGeometry& geom, std::size_t j);

struct RadialResolution {
  int annulus_nodes = 1025;
  int arc_nodes = 1025;

  RadialResolution refined(int factor) const {
    return {(annulus_nodes - 1) * factor + 1, (arc_nodes - 1) * factor + 1};
  }
};

inline constexpr int kMinSegmentNodes = 64;
/// Largest log ratio between neighbouring nodes on the graded parts of the
/// annulus and the arc; node counts are raised above the requested
/// resolution when the hole is exponentially thin.
inline constexpr double kMaxLogStep = 0.02;

enum class CellKind {
  Full,        // annulus + cap, Dirichlet on the outer sphere
  BubbleOnly,  // cap alone, Dirichlet on the gluing circle
  Disk,        // flat ball, Dirichlet on its boundary
};

/// Shape of a zonally symmetric cell in absolute units.
struct CellShape {
  int n = 0;
  double hole_radius = 0.0;
  double bubble_radius = 0.0;
  double theta = 0.0;
  double outer_radius = 0.0;

  CellShape scaled(double factor) const {
    return {n, hole_radius * factor, bubble_radius * factor, theta, outer_radius * factor};
  }
};

/// 1-D P1 finite element discretization of the zonal problem on the cell,
/// ordered from the bubble pole (theta = pi) to the outer sphere.
struct RadialCell {
  int n = 0;
  CellKind kind = CellKind::Full;
  std::vector<double> arc_nodes;      // theta, ascending from the gluing circle
  std::vector<double> annulus_nodes;  // r, ascending from the hole
  ChainPencil pencil;                 // common factor omega_{n-1} dropped
};

RadialCell assemble_cell(const CellShape& shape, RadialResolution res, CellKind kind);
RadialCell build_radial_cell(const EpsGeometry& geom, std::size_t j, RadialResolution res);
RadialCell build_bubble_cell(const EpsGeometry& geom, std::size_t j, int arc_nodes);
RadialCell build_disk_cell(int n, double radius, int nodes);

/// First k zonal eigenvalues of the cell.
std::vector<double> radial_eigenvalues(const RadialCell& cell, std::size_t k);

struct ReferenceLimits {
  double lambda1_D_disk = 0.0;     // Dirichlet ball of radius kappa/2
  double lambda2_sphere = 0.0;     // n / b_j^2
  double lambda2_N_cube = 0.0;     // pi^2
  double Lj_lambda2 = 0.0;         // min(disk, sphere)
  double L_lambda_m_plus_2 = 0.0;  // min(pi^2, min_j n / b_j^2)
};

ReferenceLimits reference_limits(const BubbleGeometry& base, double kappa, std::size_t j);

/// Dirichlet eigenvalue of the flat ball by the radial solver, Richardson
/// extrapolated from two resolutions.
double disk_dirichlet_eigenvalue(int n, double radius);

struct ConvergenceRow {
  double eps = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rayleigh_upper = 0.0;
  double eps2_lambda2 = 0.0;
  double sigma_target = 0.0;
  double Lj_lambda2 = 0.0;
  RadialResolution resolution;
};

/// One row per eps. lambda2 is the second zonal eigenvalue; non-zonal modes
/// of the cell are not enumerated.
std::vector<ConvergenceRow> convergence_table(const BubbleGeometry& base, double kappa,
                                              std::size_t j, const std::vector<double>& eps_list,
                                              RadialResolution res);

/// Header `eps,lambda1,lambda2,rayleigh_upper,eps2_lambda2,sigma_target,Lj_lambda2,resolution`.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

void to_json(nlohmann::json& j, const EpsGeometry& g);
void to_json(nlohmann::json& j, const ReferenceLimits& r);
void to_json(nlohmann::json& j, const ConvergenceRow& r);

}  // namespace gapforge
