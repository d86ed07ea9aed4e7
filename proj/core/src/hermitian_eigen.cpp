#include "gapforge/hermitian_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

SparseHermitian scaled_operator(const SparseHermitian& K, const VectorXd& inv_sqrt_mass) {
  SparseHermitian A = K;
  for (Index col = 0; col < A.outerSize(); ++col) {
    for (SparseHermitian::InnerIterator it(A, col); it; ++it) {
      it.valueRef() *= inv_sqrt_mass[it.row()] * inv_sqrt_mass[it.col()];
    }
  }
  return A;
}

MatrixXcd random_block(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXcd X(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) X(i, j) = Complex(normal(rng), normal(rng));
  }
  return X;
}

// Orthonormalizes the columns of W against the first `used` columns of V and
// each other, appending those that are not already in the span. Returns the
// new column count.
Index append_block(MatrixXcd& V, Index used, MatrixXcd W) {
  const Eigen::VectorXd before = W.colwise().norm();
  // A second pass is needed only when the first one cancelled most of a column.
  constexpr double kReorthogonalize = 0.7071067811865476;
  for (int pass = 0; pass < 2 && used > 0; ++pass) {
    W -= V.leftCols(used) * (V.leftCols(used).adjoint() * W);
    if (pass == 0 && (W.colwise().norm().array() >= kReorthogonalize * before.array()).all()) break;
  }
  const Index start = used;
  for (Index j = 0; j < W.cols() && used < V.cols(); ++j) {
    Eigen::VectorXcd w = W.col(j);
    for (int pass = 0; pass < 2 && used > start; ++pass) {
      w -= V.middleCols(start, used - start) * (V.middleCols(start, used - start).adjoint() * w);
    }
    const double after = w.norm();
    if (!(after > 1e-10 * before[j])) continue;
    V.col(used++) = w / after;
  }
  return used;
}

EigenPairs dense_pairs(const SparseHermitian& K, const VectorXd& inv_sqrt_mass, std::size_t k,
                       bool want_vectors) {
  MatrixXcd A = MatrixXcd(scaled_operator(K, inv_sqrt_mass));
  A = 0.5 * (A + A.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(
      A, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolverFailure, "dense Hermitian eigensolver did not converge");
  }
  EigenPairs out;
  const auto kk = static_cast<Index>(k);
  out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + kk);
  if (want_vectors) {
    out.vectors = inv_sqrt_mass.asDiagonal() * solver.eigenvectors().leftCols(kk);
  }
  return out;
}

}  // namespace

std::vector<double> dense_spectrum(const Eigen::MatrixXcd& stiffness, const Eigen::VectorXd& mass) {
  const VectorXd s = mass.cwiseSqrt().cwiseInverse();
  MatrixXcd A = s.asDiagonal() * stiffness * s.asDiagonal();
  A = 0.5 * (A + A.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolverFailure, "dense Hermitian eigensolver did not converge");
  }
  return {solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size()};
}

EigenPairs lowest_eigenpairs(const SparseHermitian& stiffness, const VectorXd& mass,
                             std::size_t k, const EigenOptions& options) {
  const Index n = stiffness.rows();
  if (stiffness.cols() != n || mass.size() != n) {
    throw Error(ErrorCode::InvalidGraph, "eigensolver: dimension mismatch");
  }
  if (k == 0 || static_cast<Index>(k) > n) {
    throw Error(ErrorCode::InvalidResolution,
                "eigensolver: requested " + std::to_string(k) + " eigenvalues of a dimension " +
                    std::to_string(n) + " problem");
  }
  if (!(mass.minCoeff() > 0.0)) {
    throw Error(ErrorCode::InvalidGraph, "eigensolver: masses must be positive");
  }
  const VectorXd inv_sqrt_mass = mass.cwiseSqrt().cwiseInverse();

  const Index p = std::max(1, options.block_size);
  const Index nev = static_cast<Index>(k);
  // Guard vectors keep a cluster that straddles the k-th eigenvalue inside
  // the converging window.
  const Index guarded = nev + p;
  Index ncv = options.basis_size > 0 ? static_cast<Index>(options.basis_size)
                                     : std::max(3 * guarded, guarded + 8 * p);
  ncv = std::max(ncv, guarded + 2 * p);
  ncv = (ncv + p - 1) / p * p;
  if (static_cast<std::size_t>(n) <= options.dense_limit || 2 * ncv >= n) {
    return dense_pairs(stiffness, inv_sqrt_mass, k, options.want_vectors);
  }

  const SparseHermitian A = scaled_operator(stiffness, inv_sqrt_mass);
  double mean_diag = 0.0;
  double anorm = 0.0;
  for (Index col = 0; col < A.outerSize(); ++col) {
    double row_sum = 0.0;
    for (SparseHermitian::InnerIterator it(A, col); it; ++it) {
      row_sum += std::abs(it.value());
      if (it.row() == col) mean_diag += it.value().real();
    }
    anorm = std::max(anorm, row_sum);
  }
  mean_diag /= static_cast<double>(n);
  const double shift = std::max(1e-4 * mean_diag, std::numeric_limits<double>::min());

  SparseHermitian shifted = A;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseHermitian> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolverFailure, "eigensolver: shifted factorization failed");
  }

  std::mt19937_64 rng(options.seed);
  MatrixXcd V(n, ncv);
  MatrixXcd AV(n, ncv);           // A V, valid on the first `projected` columns
  MatrixXcd H = MatrixXcd::Zero(ncv, ncv);  // V^* A V on the same columns
  Index used = append_block(V, 0, random_block(n, guarded, rng));
  Index projected = 0;
  Index source = 0;  // next basis column to push through the inverse

  constexpr int kMaxRestarts = 300;
  const double limit = options.tolerance * anorm;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    while (used < ncv) {
      const Index take = std::min(p, used - source);
      MatrixXcd W;
      if (take > 0) {
        W = factor.solve(V.middleCols(source, take));
        source += take;
      } else {
        W = random_block(n, p, rng);
      }
      used = append_block(V, used, std::move(W));
    }
    const Index fresh = ncv - projected;
    AV.rightCols(fresh) = A * V.rightCols(fresh);
    H.rightCols(fresh) = V.adjoint() * AV.rightCols(fresh);
    H.bottomLeftCorner(fresh, projected) = H.topRightCorner(projected, fresh).adjoint();
    H.bottomRightCorner(fresh, fresh) =
        0.5 * (H.bottomRightCorner(fresh, fresh) + H.bottomRightCorner(fresh, fresh).adjoint()).eval();
    projected = ncv;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> ritz(H);
    if (ritz.info() != Eigen::Success) {
      throw Error(ErrorCode::EigenSolverFailure, "eigensolver: Rayleigh-Ritz step failed");
    }
    const VectorXd& theta = ritz.eigenvalues();
    const Index keep = std::min(guarded + p, ncv - 2 * p);
    const MatrixXcd X = V * ritz.eigenvectors().leftCols(keep);
    const MatrixXcd AX = AV * ritz.eigenvectors().leftCols(keep);

    Index first_open = guarded;
    for (Index j = 0; j < guarded; ++j) {
      if (!((AX.col(j) - theta[j] * X.col(j)).norm() <= limit)) {
        first_open = j;
        break;
      }
    }
    if (first_open >= nev) {
      EigenPairs out;
      out.values.assign(theta.data(), theta.data() + nev);
      if (options.want_vectors) out.vectors = inv_sqrt_mass.asDiagonal() * X.leftCols(nev);
      return out;
    }

    // Thick restart: keep the lowest Ritz vectors, whose projection is the
    // diagonal of Ritz values, and continue from the first unconverged one.
    V.leftCols(keep) = X;
    AV.leftCols(keep) = AX;
    H.setZero();
    H.topLeftCorner(keep, keep).diagonal() = theta.head(keep).cast<Complex>();
    used = keep;
    projected = keep;
    source = first_open;
  }
  throw Error(ErrorCode::EigenSolverFailure,
              "eigensolver: no convergence after " + std::to_string(kMaxRestarts) + " restarts");
}

}  // namespace gapforge
