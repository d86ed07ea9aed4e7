#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace gapforge {

using Complex = std::complex<double>;
using SparseHermitian = Eigen::SparseMatrix<Complex>;

/// Folded problems up to this many unknowns are solved densely.
inline constexpr std::size_t kDenseLimit = 600;

struct EigenOptions {
  // Normwise backward error: |A y - lambda y| <= tolerance * |A|_1 for the
  // scaled operator A = M^{-1/2} K M^{-1/2}. Eigenvalue error is then of
  // order residual^2 / gap.
  double tolerance = 1e-10;
  int block_size = 2;
  std::size_t basis_size = 0;  // Krylov basis width; 0 picks one from k
  std::size_t dense_limit = kDenseLimit;
  bool want_vectors = false;
  unsigned long long seed = 0x5eedULL;
};

struct EigenPairs {
  std::vector<double> values;  // ascending
  Eigen::MatrixXcd vectors;    // columns, M-orthonormal, only if requested
};

/// Lowest k eigenpairs of K u = lambda M u with K Hermitian positive
/// semidefinite and M = diag(mass) positive. Large problems use block
/// shift-invert Krylov on M^{-1/2} K M^{-1/2} with Rayleigh-Ritz restarts.
EigenPairs lowest_eigenpairs(const SparseHermitian& stiffness, const Eigen::VectorXd& mass,
                             std::size_t k, const EigenOptions& options = {});

/// Whole spectrum by a dense solve; the reference path.
std::vector<double> dense_spectrum(const Eigen::MatrixXcd& stiffness, const Eigen::VectorXd& mass);

}  // namespace gapforge
