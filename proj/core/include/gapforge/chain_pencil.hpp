#pragma once

#include <cstddef>
#include <vector>

namespace gapforge {

/// Symmetric generalized tridiagonal pencil K - lambda M arising from a
/// weighted 1-D chain: nodes with lumped masses, conductances between
/// neighbours, and optional conductances tying the end nodes to a clamped
/// ghost node (Dirichlet). A zero boundary conductance is a natural end.
struct ChainPencil {
  std::vector<double> conductance;  // size N-1, edge i joins node i and i+1
  std::vector<double> mass;         // size N
  double left_boundary = 0.0;
  double right_boundary = 0.0;

  std::size_t size() const { return mass.size(); }
};

/// Number of eigenvalues strictly below x (Sylvester inertia of K - xM).
/// Pivots are carried in series-conductance form so no cancellation occurs
/// when x is small against the stiffness scale.
std::size_t count_below(const ChainPencil& pencil, double x);

/// Upper bound on the spectrum (Gershgorin on M^{-1} K).
double spectral_upper_bound(const ChainPencil& pencil);

/// The k smallest eigenvalues by Sturm bisection, each to relative
/// tolerance rel_tol.
std::vector<double> chain_eigenvalues(const ChainPencil& pencil, std::size_t k,
                                      double rel_tol = 1e-12);

}  // namespace gapforge
