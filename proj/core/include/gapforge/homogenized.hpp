#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gapforge/interval_set.hpp"

namespace gapforge {

/// Riemannian k-volume of the unit k-sphere S^k (the boundary of the unit
/// ball in R^{k+1}): 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double sphere_measure(int k);

/// One hole/bubble pair. `d` scales the hole radius, `b` the bubble radius.
struct Channel {
  double d = 0.0;
  double b = 0.0;
};

struct BubbleGeometry {
  int n = 0;
  std::vector<Channel> channels;  // increasing resonance order
  double kappa = 0.0;             // separation constant

  std::size_t m() const { return channels.size(); }
};

/// Checks positivity and reorders channels by increasing resonance.
/// Throws DuplicateSigma when two channels resonate at the same frequency.
BubbleGeometry make_geometry(int n, std::vector<Channel> channels, double kappa);

/// Spectral data of the limit operator: resonances sigma_j (increasing),
/// mass weights rho_j, and optionally the cached upper gap edges mu_j.
struct HomogenizedModel {
  int n = 0;
  std::vector<double> sigma;
  std::vector<double> rho;
  std::optional<std::vector<double>> mu;

  std::size_t m() const { return sigma.size(); }
};

/// Validates ordering and positivity; does not touch `mu`.
HomogenizedModel make_model(int n, std::vector<double> sigma, std::vector<double> rho);

/// Resonance of a single channel in dimension n.
double channel_sigma(int n, const Channel& c);
/// Mass weight b^n omega_n of a single channel.
double channel_rho(int n, const Channel& c);

HomogenizedModel forward_model(const BubbleGeometry& geom);

/// rho_j = ((b_j - a_j) / a_j) * prod_{i != j} (b_i - a_j) / (a_i - a_j).
std::vector<double> weights_closed_form(const GapSpec& spec);

/// Solves sum_j a_j rho_j / (b_k - a_j) = 1, k = 1..m, by LU with partial
/// pivoting.
std::vector<double> solve_weight_system(const GapSpec& spec);

struct Design {
  BubbleGeometry geometry;
  HomogenizedModel model;  // mu populated
};

/// Inverse map: bubble constants whose limit spectrum has exactly the target
/// gaps. `kappa` is carried through unchanged.
Design design_geometry(const GapSpec& spec, double kappa = 0.5);

void to_json(nlohmann::json& j, const BubbleGeometry& g);
void from_json(const nlohmann::json& j, BubbleGeometry& g);
void to_json(nlohmann::json& j, const HomogenizedModel& m);
void from_json(const nlohmann::json& j, HomogenizedModel& m);

}  // namespace gapforge
