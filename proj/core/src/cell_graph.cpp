#include "gapforge/cell_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::string vertex_label(std::size_t v) { return "vertex " + std::to_string(v); }

class GridBuilder {
 public:
  explicit GridBuilder(const CellGridSpec& spec)
      : spec_(spec), n_(spec.grid), h_(spec.cell_size / spec.grid) {}

  PeriodCellGraph build() {
    classify_vertices();
    add_planar_masses();
    add_planar_edges();
    add_boundary_pairs();
    for (std::size_t k = 0; k < spec_.holes.size(); ++k) {
      if (spec_.holes[k].bubble_radius > 0.0) glue_bubble(k);
    }
    graph_.directions = 2;
    nlohmann::json meta = spec_;
    meta["grid_vertices"] = kept_count_;
    meta["bubbles"] = bubble_meta_;
    graph_.metadata = std::move(meta);
    validate_graph(graph_);
    return std::move(graph_);
  }

 private:
  bool in_hole(double x, double y) const {
    for (const auto& hole : spec_.holes) {
      const double dx = x - hole.center[0];
      const double dy = y - hole.center[1];
      if (dx * dx + dy * dy < hole.hole_radius * hole.hole_radius) return true;
    }
    return false;
  }

  std::size_t grid_id(int i, int j) const { return static_cast<std::size_t>(j) * (n_ + 1) + i; }

  void classify_vertices() {
    index_.assign(static_cast<std::size_t>(n_ + 1) * (n_ + 1), kRemoved);
    for (int j = 0; j <= n_; ++j) {
      for (int i = 0; i <= n_; ++i) {
        if (!in_hole(i * h_, j * h_)) index_[grid_id(i, j)] = kept_count_++;
      }
    }
    graph_.mass.assign(kept_count_, 0.0);
  }

  double dual_lo(int i) const { return std::max(0.0, (i - 0.5) * h_); }
  double dual_hi(int i) const { return std::min(spec_.cell_size, (i + 0.5) * h_); }

  void add_planar_masses() {
    const int S = spec_.subsamples;
    for (int j = 0; j <= n_; ++j) {
      for (int i = 0; i <= n_; ++i) {
        const std::size_t v = index_[grid_id(i, j)];
        if (v == kRemoved) continue;
        const double x0 = dual_lo(i), x1 = dual_hi(i);
        const double y0 = dual_lo(j), y1 = dual_hi(j);
        int outside = 0;
        for (int a = 0; a < S; ++a) {
          for (int b = 0; b < S; ++b) {
            const double x = x0 + (a + 0.5) * (x1 - x0) / S;
            const double y = y0 + (b + 0.5) * (y1 - y0) / S;
            if (!in_hole(x, y)) ++outside;
          }
        }
        const double fraction = outside > 0 ? static_cast<double>(outside) / (S * S) : 0.5 / (S * S);
        graph_.mass[v] = fraction * (x1 - x0) * (y1 - y0);
      }
    }
  }

  // Face between (i, j) and its neighbour in direction `axis` (0: +x, 1: +y).
  double face_weight(int i, int j, int axis) const {
    const int S = spec_.subsamples;
    const double fixed = ((axis == 0 ? i : j) + 0.5) * h_;
    const int along = axis == 0 ? j : i;
    const double lo = dual_lo(along), hi = dual_hi(along);
    int outside = 0;
    for (int s = 0; s < S; ++s) {
      const double t = lo + (s + 0.5) * (hi - lo) / S;
      const bool hole = axis == 0 ? in_hole(fixed, t) : in_hole(t, fixed);
      if (!hole) ++outside;
    }
    const double fraction = outside > 0 ? static_cast<double>(outside) / S : 0.5 / S;
    return fraction * (hi - lo) / h_;
  }

  void add_planar_edges() {
    for (int j = 0; j <= n_; ++j) {
      for (int i = 0; i <= n_; ++i) {
        const std::size_t v = index_[grid_id(i, j)];
        if (v == kRemoved) continue;
        if (i < n_) {
          const std::size_t w = index_[grid_id(i + 1, j)];
          if (w != kRemoved) graph_.edges.push_back({v, w, face_weight(i, j, 0)});
        }
        if (j < n_) {
          const std::size_t w = index_[grid_id(i, j + 1)];
          if (w != kRemoved) graph_.edges.push_back({v, w, face_weight(i, j, 1)});
        }
      }
    }
  }

  void add_boundary_pairs() {
    for (int t = 0; t <= n_; ++t) {
      graph_.boundary_pairs.push_back({index_[grid_id(0, t)], index_[grid_id(n_, t)], 1});
    }
    for (int t = 0; t <= n_; ++t) {
      graph_.boundary_pairs.push_back({index_[grid_id(t, 0)], index_[grid_id(t, n_)], 2});
    }
  }

  struct RingVertex {
    double angle;
    std::size_t id;
  };

  std::vector<RingVertex> hole_ring(const HoleSpec& hole) const {
    std::vector<RingVertex> ring;
    const double reach = hole.hole_radius + 2.0 * h_;
    for (int j = 0; j <= n_; ++j) {
      for (int i = 0; i <= n_; ++i) {
        const std::size_t v = index_[grid_id(i, j)];
        if (v == kRemoved) continue;
        const double dx = i * h_ - hole.center[0];
        const double dy = j * h_ - hole.center[1];
        if (std::hypot(dx, dy) > reach) continue;
        const bool touches = (i > 0 && index_[grid_id(i - 1, j)] == kRemoved) ||
                             (i < n_ && index_[grid_id(i + 1, j)] == kRemoved) ||
                             (j > 0 && index_[grid_id(i, j - 1)] == kRemoved) ||
                             (j < n_ && index_[grid_id(i, j + 1)] == kRemoved);
        if (touches) ring.push_back({std::atan2(dy, dx), v});
      }
    }
    std::sort(ring.begin(), ring.end(),
              [](const RingVertex& a, const RingVertex& b) { return a.angle < b.angle; });
    return ring;
  }

  void glue_bubble(std::size_t hole_index) {
    const HoleSpec& hole = spec_.holes[hole_index];
    const double b = hole.bubble_radius;
    const double theta0 = std::asin(hole.hole_radius / b);
    const auto ring = hole_ring(hole);
    const std::size_t K = ring.size();
    if (K < 3) {
      throw Error(ErrorCode::UnresolvableHole,
                  "holes[" + std::to_string(hole_index) + "]: boundary ring has fewer than 3 vertices");
    }
    std::vector<double> gap(K);  // longitude step from k to k+1
    for (std::size_t k = 0; k < K; ++k) {
      gap[k] = k + 1 < K ? ring[k + 1].angle - ring[k].angle : ring[0].angle + kTwoPi - ring[k].angle;
      if (!(gap[k] > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry,
                    "holes[" + std::to_string(hole_index) + "]: coincident boundary longitudes");
      }
    }
    std::vector<double> dual(K);
    for (std::size_t k = 0; k < K; ++k) dual[k] = 0.5 * (gap[(k + K - 1) % K] + gap[k]);

    const int rings = std::max(4, static_cast<int>(std::ceil(b * (std::numbers::pi - theta0) / h_)));
    const double step = (std::numbers::pi - theta0) / rings;
    auto polar = [&](int i) { return theta0 + i * step; };
    const double b2 = b * b;

    // Ring 0 reuses the hole-boundary vertices; rings 1..rings-1 are new.
    std::vector<std::vector<std::size_t>> ids(static_cast<std::size_t>(rings));
    for (std::size_t k = 0; k < K; ++k) ids[0].push_back(ring[k].id);
    for (int i = 1; i < rings; ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        ids[i].push_back(graph_.mass.size());
        graph_.mass.push_back(0.0);
      }
    }
    const std::size_t pole = graph_.mass.size();
    graph_.mass.push_back(kTwoPi * b2 * (std::cos(std::numbers::pi - 0.5 * step) + 1.0));

    for (int i = 0; i < rings; ++i) {
      const double lo = i == 0 ? theta0 : polar(i) - 0.5 * step;
      const double hi = polar(i) + 0.5 * step;
      const double band = b2 * (std::cos(lo) - std::cos(hi));
      const double dual_theta = i == 0 ? 0.5 * step : step;
      const double sin_mid = std::sin(polar(i) + 0.5 * step);
      const double sin_ring = std::sin(polar(i));
      for (std::size_t k = 0; k < K; ++k) {
        graph_.mass[ids[i][k]] += band * dual[k];
        const std::size_t up = i + 1 < rings ? ids[i + 1][k] : pole;
        graph_.edges.push_back({ids[i][k], up, sin_mid * dual[k] / step});
        graph_.edges.push_back({ids[i][k], ids[i][(k + 1) % K], dual_theta / (sin_ring * gap[k])});
      }
    }
    bubble_meta_.push_back({{"hole", hole_index},
                            {"theta", theta0},
                            {"longitudes", K},
                            {"rings", rings},
                            {"new_vertices", (rings - 1) * K + 1}});
  }

  static constexpr std::size_t kRemoved = static_cast<std::size_t>(-1);

  const CellGridSpec& spec_;
  int n_;
  double h_;
  std::vector<std::size_t> index_;
  std::size_t kept_count_ = 0;
  PeriodCellGraph graph_;
  nlohmann::json bubble_meta_ = nlohmann::json::array();
};

void check_spec(const CellGridSpec& spec) {
  if (!(spec.cell_size > 0.0)) throw Error(ErrorCode::InvalidGeometry, "cell_size must be positive");
  if (spec.grid < 2) throw Error(ErrorCode::InvalidResolution, "grid must be at least 2");
  if (spec.subsamples < 1) throw Error(ErrorCode::InvalidResolution, "subsamples must be at least 1");
  if (!(spec.kappa > 0.0)) throw Error(ErrorCode::InvalidGeometry, "kappa must be positive");
  const double h = spec.cell_size / spec.grid;
  const double margin = 0.5 * spec.kappa * spec.cell_size;
  for (std::size_t k = 0; k < spec.holes.size(); ++k) {
    const auto& hole = spec.holes[k];
    const std::string name = "holes[" + std::to_string(k) + "]";
    if (!(hole.hole_radius > 0.0)) throw Error(ErrorCode::InvalidGeometry, name + ": hole_radius must be positive");
    if (2.0 * hole.hole_radius < 6.0 * h) {
      throw Error(ErrorCode::UnresolvableHole,
                  name + ": diameter spans fewer than 6 grid cells; refine the grid");
    }
    if (hole.bubble_radius < 0.0 || (hole.bubble_radius > 0.0 && !(hole.bubble_radius > hole.hole_radius))) {
      throw Error(ErrorCode::DegenerateGeometry, name + ": bubble_radius must exceed hole_radius");
    }
    const double clearance =
        std::min({hole.center[0], hole.center[1], spec.cell_size - hole.center[0],
                  spec.cell_size - hole.center[1]}) -
        hole.hole_radius;
    if (clearance < margin) {
      throw Error(ErrorCode::HoleSeparation,
                  name + ": closer than kappa * cell_size / 2 to the cell boundary");
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto& other = spec.holes[i];
      const double dist = std::hypot(hole.center[0] - other.center[0], hole.center[1] - other.center[1]);
      if (dist - hole.hole_radius - other.hole_radius < 2.0 * margin) {
        throw Error(ErrorCode::HoleSeparation,
                    name + " and holes[" + std::to_string(i) + "] violate the kappa separation");
      }
    }
  }
}

}  // namespace

double PeriodCellGraph::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

void validate_graph(const PeriodCellGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) throw Error(ErrorCode::InvalidGraph, "graph has no vertices");
  for (std::size_t v = 0; v < n; ++v) {
    if (!(graph.mass[v] > 0.0) || !std::isfinite(graph.mass[v])) {
      throw Error(ErrorCode::InvalidGraph, vertex_label(v) + " has nonpositive mass");
    }
  }
  DisjointSets sets(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    if (edge.a >= n || edge.b >= n || edge.a == edge.b) {
      throw Error(ErrorCode::InvalidGraph, "edge " + std::to_string(e) + " has invalid endpoints");
    }
    if (!(edge.weight > 0.0) || !std::isfinite(edge.weight)) {
      throw Error(ErrorCode::InvalidGraph, "edge " + std::to_string(e) + " has nonpositive weight");
    }
    sets.unite(edge.a, edge.b);
  }
  for (std::size_t v = 1; v < n; ++v) {
    if (sets.find(v) != sets.find(0)) {
      throw Error(ErrorCode::InvalidGraph, "graph is disconnected at " + vertex_label(v));
    }
  }
  const auto dirs = static_cast<std::size_t>(std::max(graph.directions, 0));
  std::vector<std::vector<char>> used_a(dirs, std::vector<char>(n, 0));
  std::vector<std::vector<char>> used_b(dirs, std::vector<char>(n, 0));
  for (std::size_t p = 0; p < graph.boundary_pairs.size(); ++p) {
    const auto& pair = graph.boundary_pairs[p];
    const std::string name = "boundary pair " + std::to_string(p);
    if (pair.dir < 1 || pair.dir > graph.directions) {
      throw Error(ErrorCode::InvalidGraph, name + " has direction outside 1.." +
                                               std::to_string(graph.directions));
    }
    if (pair.a >= n || pair.b >= n || pair.a == pair.b) {
      throw Error(ErrorCode::InvalidGraph, name + " has invalid endpoints");
    }
    auto& ua = used_a[pair.dir - 1][pair.a];
    auto& ub = used_b[pair.dir - 1][pair.b];
    if (ua || ub) throw Error(ErrorCode::InvalidGraph, name + " breaks the face bijection");
    ua = ub = 1;
  }
}

PeriodCellGraph make_graph(int directions, std::vector<double> mass, std::vector<GraphEdge> edges,
                           std::vector<BoundaryPair> pairs) {
  PeriodCellGraph g;
  g.directions = directions;
  g.mass = std::move(mass);
  g.edges = std::move(edges);
  g.boundary_pairs = std::move(pairs);
  validate_graph(g);
  return g;
}

CellGridSpec demo_cell_spec(double bubble_radius) {
  CellGridSpec spec;
  spec.holes = {HoleSpec{{0.5, 0.5}, 0.05, bubble_radius}};
  return spec;
}

PeriodCellGraph build_cell_graph(const CellGridSpec& spec) {
  check_spec(spec);
  return GridBuilder(spec).build();
}

double cell_area(const CellGridSpec& spec) {
  double area = spec.cell_size * spec.cell_size;
  for (const auto& hole : spec.holes) {
    area -= std::numbers::pi * hole.hole_radius * hole.hole_radius;
    if (hole.bubble_radius > 0.0) {
      const double theta = std::asin(hole.hole_radius / hole.bubble_radius);
      area += kTwoPi * hole.bubble_radius * hole.bubble_radius * (1.0 + std::cos(theta));
    }
  }
  return area;
}

void to_json(nlohmann::json& j, const PeriodCellGraph& g) {
  auto vertices = nlohmann::json::array();
  for (std::size_t v = 0; v < g.size(); ++v) vertices.push_back({{"id", v}, {"mass", g.mass[v]}});
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"w", e.weight}});
  auto pairs = nlohmann::json::array();
  for (const auto& p : g.boundary_pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"dir", p.dir}});
  j = {{"directions", g.directions},
       {"vertices", std::move(vertices)},
       {"edges", std::move(edges)},
       {"boundary_pairs", std::move(pairs)},
       {"metadata", g.metadata}};
}

void to_json(nlohmann::json& j, const CellGridSpec& s) {
  auto holes = nlohmann::json::array();
  for (const auto& h : s.holes) {
    holes.push_back({{"center", h.center}, {"hole_radius", h.hole_radius}, {"bubble_radius", h.bubble_radius}});
  }
  j = {{"cell_size", s.cell_size}, {"grid", s.grid}, {"holes", std::move(holes)},
       {"kappa", s.kappa}, {"subsamples", s.subsamples}};
}

void from_json(const nlohmann::json& j, CellGridSpec& s) {
  CellGridSpec d;
  s.cell_size = j.value("cell_size", d.cell_size);
  s.grid = j.value("grid", d.grid);
  s.kappa = j.value("kappa", d.kappa);
  s.subsamples = j.value("subsamples", d.subsamples);
  if (j.contains("holes")) {
    s.holes.clear();
    for (const auto& h : j.at("holes")) {
      HoleSpec hole;
      hole.center = h.value("center", hole.center);
      hole.hole_radius = h.value("hole_radius", hole.hole_radius);
      hole.bubble_radius = h.value("bubble_radius", hole.bubble_radius);
      s.holes.push_back(hole);
    }
  } else {
    s.holes = d.holes;
  }
}

}  // namespace gapforge
