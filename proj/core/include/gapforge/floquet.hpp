#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gapforge/cell_graph.hpp"
#include "gapforge/hermitian_eigen.hpp"
#include "gapforge/interval_set.hpp"

namespace gapforge {

/// The theta-periodic pencil: boundary pairs eliminated by expressing each
/// identified vertex through a representative times a phase.
struct FoldedPencil {
  SparseHermitian stiffness;
  Eigen::VectorXd mass;
  std::vector<std::size_t> representative;  // vertex -> folded index
  std::vector<Complex> phase;               // u(v) = phase[v] * u(rep)
};

FoldedPencil fold(const PeriodCellGraph& graph, std::span<const Complex> theta);

/// True iff the matrix equals its conjugate transpose bit for bit.
bool is_exactly_hermitian(const SparseHermitian& matrix);

std::vector<double> theta_spectrum(const PeriodCellGraph& graph, std::span<const Complex> theta,
                                   std::size_t k);

/// Eigenpairs on the unfolded vertex set (vectors expanded through the
/// folding phases).
EigenPairs theta_eigenpairs(const PeriodCellGraph& graph, std::span<const Complex> theta,
                            std::size_t k);

struct BandStructure {
  int theta_resolution = 0;
  std::vector<std::vector<double>> theta_angles;  // per grid point, arg theta_alpha
  std::vector<std::vector<double>> eigen_table;   // per grid point, lambda_1..lambda_K
  std::vector<Interval> bands;                    // [min, max] per k, may overlap
  double top() const;
};

/// Theta on the uniform grid exp(2 pi i p / T) per direction; the first
/// direction varies fastest.
BandStructure band_structure(const PeriodCellGraph& graph, int theta_resolution, std::size_t K);

/// Open gaps between merged bands, strictly inside [lowest band edge, min(L, top band edge)].
IntervalSet detect_gaps(std::span<const Interval> bands, double L);
IntervalSet detect_gaps(const BandStructure& bs, double L);

struct EnclosureReport {
  std::vector<double> neumann;
  std::vector<double> dirichlet;  // +inf past the clamped dimension
  bool enclosure_ok = false;
  double worst_violation = 0.0;  // largest amount by which an inequality fails
};

inline constexpr double kEnclosureSlack = 1e-8;

/// Neumann (unfolded) and Dirichlet (pair vertices clamped) spectra checked
/// against every sampled theta of `bs`.
EnclosureReport nd_enclosure(const PeriodCellGraph& graph, std::size_t k, const BandStructure& bs);
EnclosureReport nd_enclosure(const PeriodCellGraph& graph, std::size_t k,
                             int theta_resolution = 8);

/// Header `theta_index,theta_1,...,theta_d,k,lambda`.
void write_band_csv(std::ostream& os, const BandStructure& bs);

void to_json(nlohmann::json& j, const BandStructure& bs);
void to_json(nlohmann::json& j, const EnclosureReport& r);

}  // namespace gapforge
