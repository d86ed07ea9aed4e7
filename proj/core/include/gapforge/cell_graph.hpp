#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

namespace gapforge {

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// u(b) = conj(theta_dir) u(a): vertex b is the image of a under the lattice
/// shift along direction `dir` (1-based).
struct BoundaryPair {
  std::size_t a = 0;
  std::size_t b = 0;
  int dir = 1;
};

/// Weighted graph model of a period cell: lumped masses, edge conductances
/// and the face identifications of the lattice.
struct PeriodCellGraph {
  int directions = 0;
  std::vector<double> mass;
  std::vector<GraphEdge> edges;
  std::vector<BoundaryPair> boundary_pairs;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return mass.size(); }
  double total_mass() const;
};

/// Checks positivity, connectivity and that boundary pairs are one-to-one
/// per direction; throws Error(InvalidGraph) naming the first violation.
void validate_graph(const PeriodCellGraph& graph);

/// Validating constructor for hand-made graphs.
PeriodCellGraph make_graph(int directions, std::vector<double> mass, std::vector<GraphEdge> edges,
                           std::vector<BoundaryPair> pairs);

struct HoleSpec {
  std::array<double, 2> center{0.5, 0.5};
  double hole_radius = 0.05;
  double bubble_radius = 0.3;  // 0: plain hole, no bubble attached
};

/// Direct geometric parameters of a two-dimensional period cell: the square
/// [0, cell_size]^2 with disks removed and a truncated sphere glued along
/// each disk boundary.
struct CellGridSpec {
  double cell_size = 1.0;
  int grid = 64;  // grid cells per side
  std::vector<HoleSpec> holes{HoleSpec{}};
  double kappa = 0.5;
  int subsamples = 8;  // per dual cell side, for areas and face lengths
};

/// The documented demo cell: unit square, one centred hole of radius 0.05
/// carrying a bubble of radius `bubble_radius`, 64x64 grid.
CellGridSpec demo_cell_spec(double bubble_radius = 0.3);

/// Finite-volume graph of the cell. Each bubble is a latitude-longitude
/// graph whose first ring coincides with the hole-boundary vertices of the
/// square grid.
PeriodCellGraph build_cell_graph(const CellGridSpec& spec);

/// Closed-form area of the continuum cell: square minus disks plus caps.
double cell_area(const CellGridSpec& spec);

void to_json(nlohmann::json& j, const PeriodCellGraph& g);
void to_json(nlohmann::json& j, const CellGridSpec& s);
void from_json(const nlohmann::json& j, CellGridSpec& s);

}  // namespace gapforge
