#include "gapforge/chain_pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

void validate(const ChainPencil& p) {
  if (p.mass.empty() || p.conductance.size() + 1 != p.mass.size()) {
    throw Error(ErrorCode::InvalidResolution, "chain pencil: inconsistent sizes");
  }
  for (double m : p.mass) {
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidResolution, "chain pencil: nonpositive mass");
  }
  for (double w : p.conductance) {
    if (!(w > 0.0)) {
      throw Error(ErrorCode::InvalidResolution, "chain pencil: nonpositive conductance");
    }
  }
}

}  // namespace

std::size_t count_below(const ChainPencil& pencil, double x) {
  const std::size_t n = pencil.size();
  std::size_t negatives = 0;
  // q_i: pivot of node i minus its outgoing conductance.
  double q = pencil.left_boundary - x * pencil.mass[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i + 1 < n) ? pencil.conductance[i] : pencil.right_boundary;
    double p = q + w;
    if (p == 0.0) p = -std::numeric_limits<double>::min();
    if (p < 0.0) ++negatives;
    if (i + 1 < n) q = w * (q / p) - x * pencil.mass[i + 1];
  }
  return negatives;
}

double spectral_upper_bound(const ChainPencil& pencil) {
  const std::size_t n = pencil.size();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = (i == 0) ? pencil.left_boundary : pencil.conductance[i - 1];
    const double right = (i + 1 == n) ? pencil.right_boundary : pencil.conductance[i];
    const double offdiag = (i == 0 ? 0.0 : pencil.conductance[i - 1]) +
                           (i + 1 == n ? 0.0 : pencil.conductance[i]);
    bound = std::max(bound, (left + right + offdiag) / pencil.mass[i]);
  }
  return bound;
}

std::vector<double> chain_eigenvalues(const ChainPencil& pencil, std::size_t k, double rel_tol) {
  validate(pencil);
  if (k > pencil.size()) {
    throw Error(ErrorCode::InvalidResolution,
                "requested " + std::to_string(k) + " eigenvalues from a chain of " +
                    std::to_string(pencil.size()) + " nodes");
  }
  const double upper = spectral_upper_bound(pencil) * (1.0 + 1e-12) + 1e-300;
  std::vector<double> values(k);
  double floor = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double lo = floor;
    double hi = upper;
    // Enough halvings to resolve an exact zero down to the smallest normal.
    for (int iter = 0; iter < 2200; ++iter) {
      if (hi - lo <= rel_tol * hi || hi <= std::numeric_limits<double>::min()) break;
      const double mid = lo + 0.5 * (hi - lo);
      if (!(mid > lo && mid < hi)) break;
      if (count_below(pencil, mid) > j) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    if (hi - lo > 1e3 * rel_tol * std::max(hi, 1e-300) && hi > 1e-300) {
      throw Error(ErrorCode::EigenSolverFailure, "chain bisection did not converge");
    }
    values[j] = lo + 0.5 * (hi - lo);
    floor = lo;
  }
  return values;
}

}  // namespace gapforge
