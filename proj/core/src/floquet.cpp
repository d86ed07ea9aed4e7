#include "gapforge/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "gapforge/error.hpp"
#include "gapforge/parallel.hpp"

namespace gapforge {

namespace {

constexpr double kUnitModulusTol = 1e-12;

using Triplet = Eigen::Triplet<Complex>;

// Union-find carrying the phase that relates each vertex to its parent.
struct PhaseForest {
  std::vector<std::size_t> parent;
  std::vector<Complex> phase;

  explicit PhaseForest(std::size_t n) : parent(n), phase(n, Complex(1.0, 0.0)) {
    for (std::size_t v = 0; v < n; ++v) parent[v] = v;
  }

  std::pair<std::size_t, Complex> find(std::size_t v) {
    Complex acc(1.0, 0.0);
    std::size_t r = v;
    while (parent[r] != r) {
      acc *= phase[r];
      r = parent[r];
    }
    // Path compression, recomputing the composed phase along the way.
    Complex rest = acc;
    while (parent[v] != v) {
      const std::size_t next = parent[v];
      const Complex own = phase[v];
      parent[v] = r;
      phase[v] = rest;
      rest /= own;
      v = next;
    }
    return {r, acc};
  }

  // Imposes u(b) = c u(a).
  void relate(std::size_t a, std::size_t b, Complex c) {
    const auto [ra, pa] = find(a);
    const auto [rb, pb] = find(b);
    if (ra == rb) {
      if (std::abs(pb - c * pa) > 1e-10) {
        throw Error(ErrorCode::InvalidCharacter,
                    "boundary identifications are inconsistent for this character");
      }
      return;
    }
    // u(rb) = c pa / pb u(ra); the smaller index becomes the root.
    const Complex link = c * pa * std::conj(pb);
    if (ra < rb) {
      parent[rb] = ra;
      phase[rb] = link;
    } else {
      parent[ra] = rb;
      phase[ra] = std::conj(link);
    }
  }
};

void check_character(const PeriodCellGraph& graph, std::span<const Complex> theta) {
  if (static_cast<int>(theta.size()) != graph.directions) {
    throw Error(ErrorCode::InvalidCharacter,
                "character has " + std::to_string(theta.size()) + " components, graph has " +
                    std::to_string(graph.directions) + " directions");
  }
  for (std::size_t a = 0; a < theta.size(); ++a) {
    if (std::abs(std::abs(theta[a]) - 1.0) > kUnitModulusTol) {
      throw Error(ErrorCode::InvalidCharacter,
                  "theta_" + std::to_string(a + 1) + " does not have unit modulus");
    }
  }
}

// Stiffness and masses on the vertices with keep[v] >= 0, no identifications.
std::pair<SparseHermitian, Eigen::VectorXd> restricted_pencil(const PeriodCellGraph& graph,
                                                              const std::vector<long>& keep,
                                                              std::size_t dim) {
  std::vector<Triplet> triplets;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t v = 0; v < graph.size(); ++v) {
    if (keep[v] >= 0) mass[keep[v]] = graph.mass[v];
  }
  for (const auto& e : graph.edges) {
    const long a = keep[e.a];
    const long b = keep[e.b];
    if (a >= 0) triplets.emplace_back(a, a, e.weight);
    if (b >= 0) triplets.emplace_back(b, b, e.weight);
    if (a >= 0 && b >= 0) {
      triplets.emplace_back(a, b, -e.weight);
      triplets.emplace_back(b, a, -e.weight);
    }
  }
  SparseHermitian K(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  K.setFromTriplets(triplets.begin(), triplets.end());
  return {std::move(K), std::move(mass)};
}

}  // namespace

bool is_exactly_hermitian(const SparseHermitian& matrix) {
  if (matrix.rows() != matrix.cols()) return false;
  const SparseHermitian diff = matrix - SparseHermitian(matrix.adjoint());
  for (Eigen::Index col = 0; col < diff.outerSize(); ++col) {
    for (SparseHermitian::InnerIterator it(diff, col); it; ++it) {
      if (it.value() != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

FoldedPencil fold(const PeriodCellGraph& graph, std::span<const Complex> theta) {
  check_character(graph, theta);
  const std::size_t n = graph.size();
  PhaseForest forest(n);
  for (const auto& pair : graph.boundary_pairs) {
    forest.relate(pair.a, pair.b, std::conj(theta[static_cast<std::size_t>(pair.dir - 1)]));
  }
  FoldedPencil out;
  out.representative.assign(n, 0);
  out.phase.assign(n, Complex(1.0, 0.0));
  std::vector<long> compact(n, -1);
  std::size_t dim = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto [root, ph] = forest.find(v);
    if (compact[root] < 0) compact[root] = static_cast<long>(dim++);
    out.representative[v] = static_cast<std::size_t>(compact[root]);
    out.phase[v] = ph;
  }
  out.mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t v = 0; v < n; ++v) out.mass[out.representative[v]] += graph.mass[v];

  std::vector<Triplet> triplets;
  triplets.reserve(4 * graph.edges.size());
  for (const auto& e : graph.edges) {
    const auto ra = static_cast<Eigen::Index>(out.representative[e.a]);
    const auto rb = static_cast<Eigen::Index>(out.representative[e.b]);
    const Complex pa = out.phase[e.a];
    const Complex pb = out.phase[e.b];
    if (ra == rb) {
      // w |pa - pb|^2 on the diagonal
      triplets.emplace_back(ra, ra, Complex(e.weight * std::norm(pa - pb), 0.0));
      continue;
    }
    const Complex off = -e.weight * std::conj(pa) * pb;
    triplets.emplace_back(ra, ra, Complex(e.weight, 0.0));
    triplets.emplace_back(rb, rb, Complex(e.weight, 0.0));
    triplets.emplace_back(ra, rb, off);
    triplets.emplace_back(rb, ra, std::conj(off));
  }
  out.stiffness.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  if (!is_exactly_hermitian(out.stiffness)) {
    throw Error(ErrorCode::InternalInvariant, "folded stiffness is not exactly Hermitian");
  }
  return out;
}

std::vector<double> theta_spectrum(const PeriodCellGraph& graph, std::span<const Complex> theta,
                                   std::size_t k) {
  const FoldedPencil folded = fold(graph, theta);
  return lowest_eigenpairs(folded.stiffness, folded.mass, k).values;
}

EigenPairs theta_eigenpairs(const PeriodCellGraph& graph, std::span<const Complex> theta,
                            std::size_t k) {
  const FoldedPencil folded = fold(graph, theta);
  EigenOptions options;
  options.want_vectors = true;
  EigenPairs pairs = lowest_eigenpairs(folded.stiffness, folded.mass, k, options);
  Eigen::MatrixXcd full(static_cast<Eigen::Index>(graph.size()), pairs.vectors.cols());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    full.row(static_cast<Eigen::Index>(v)) =
        folded.phase[v] * pairs.vectors.row(static_cast<Eigen::Index>(folded.representative[v]));
  }
  pairs.vectors = std::move(full);
  return pairs;
}

double BandStructure::top() const {
  double t = 0.0;
  for (const auto& b : bands) t = std::max(t, b.hi);
  return t;
}

BandStructure band_structure(const PeriodCellGraph& graph, int theta_resolution, std::size_t K) {
  if (theta_resolution < 2) {
    throw Error(ErrorCode::InvalidResolution, "theta_resolution must be at least 2");
  }
  if (K == 0) throw Error(ErrorCode::InvalidResolution, "number of bands must be positive");
  const int d = graph.directions;
  std::size_t points = 1;
  for (int a = 0; a < d; ++a) points *= static_cast<std::size_t>(theta_resolution);

  BandStructure bs;
  bs.theta_resolution = theta_resolution;
  bs.theta_angles.resize(points);
  bs.eigen_table.resize(points);
  for (std::size_t q = 0; q < points; ++q) {
    std::size_t rest = q;
    for (int a = 0; a < d; ++a) {
      const auto p = rest % static_cast<std::size_t>(theta_resolution);
      rest /= static_cast<std::size_t>(theta_resolution);
      bs.theta_angles[q].push_back(2.0 * std::numbers::pi * static_cast<double>(p) / theta_resolution);
    }
  }
  // The stiffness is real before folding, so conj(theta) has the same
  // spectrum as theta; only one point of each conjugate pair is solved.
  const auto T = static_cast<std::size_t>(theta_resolution);
  auto conjugate_index = [&](std::size_t q) {
    std::size_t out = 0, scale = 1, rest = q;
    for (int a = 0; a < d; ++a) {
      const std::size_t p = rest % T;
      rest /= T;
      out += ((T - p) % T) * scale;
      scale *= T;
    }
    return out;
  };
  std::vector<std::size_t> solved;
  for (std::size_t q = 0; q < points; ++q) {
    if (conjugate_index(q) >= q) solved.push_back(q);
  }
  parallel_for(solved.size(), [&](std::size_t i) {
    const std::size_t q = solved[i];
    std::vector<Complex> theta;
    for (double angle : bs.theta_angles[q]) theta.push_back(std::polar(1.0, angle));
    bs.eigen_table[q] = theta_spectrum(graph, theta, K);
  });
  for (std::size_t q = 0; q < points; ++q) {
    if (bs.eigen_table[q].empty()) bs.eigen_table[q] = bs.eigen_table[conjugate_index(q)];
  }
  bs.bands.assign(K, Interval{std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity()});
  for (const auto& row : bs.eigen_table) {
    for (std::size_t k = 0; k < K; ++k) {
      bs.bands[k].lo = std::min(bs.bands[k].lo, row[k]);
      bs.bands[k].hi = std::max(bs.bands[k].hi, row[k]);
    }
  }
  return bs;
}

IntervalSet detect_gaps(std::span<const Interval> bands, double L) {
  if (bands.empty()) return {};
  double top = 0.0;
  std::vector<Interval> clipped;
  for (const auto& b : bands) {
    top = std::max(top, b.hi);
    clipped.push_back({std::max(0.0, b.lo), std::max(0.0, b.hi)});
  }
  const double window = std::min(L, top);
  if (!(window > 0.0)) return {};
  std::sort(clipped.begin(), clipped.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> gaps;
  // Nothing below the lowest band counts as a gap, so rounding near zero cannot open one.
  double cursor = clipped.front().lo;
  for (const auto& b : clipped) {
    if (b.lo > cursor) {
      const double hi = std::min(b.lo, window);
      if (hi > cursor) gaps.push_back({cursor, hi});
    }
    cursor = std::max(cursor, b.hi);
    if (cursor >= window) break;
  }
  return IntervalSet::from_unsorted(std::move(gaps));
}

IntervalSet detect_gaps(const BandStructure& bs, double L) { return detect_gaps(bs.bands, L); }

EnclosureReport nd_enclosure(const PeriodCellGraph& graph, std::size_t k, const BandStructure& bs) {
  if (k == 0 || k > bs.bands.size()) {
    throw Error(ErrorCode::InvalidResolution,
                "enclosure: k must lie in 1.." + std::to_string(bs.bands.size()));
  }
  EnclosureReport report;
  {
    std::vector<long> keep(graph.size());
    for (std::size_t v = 0; v < graph.size(); ++v) keep[v] = static_cast<long>(v);
    const auto [K, M] = restricted_pencil(graph, keep, graph.size());
    report.neumann = lowest_eigenpairs(K, M, std::min(k, graph.size())).values;
  }
  {
    std::vector<char> clamped(graph.size(), 0);
    for (const auto& p : graph.boundary_pairs) clamped[p.a] = clamped[p.b] = 1;
    std::vector<long> keep(graph.size(), -1);
    std::size_t dim = 0;
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (!clamped[v]) keep[v] = static_cast<long>(dim++);
    }
    if (dim > 0) {
      const auto [K, M] = restricted_pencil(graph, keep, dim);
      report.dirichlet = lowest_eigenpairs(K, M, std::min(k, dim)).values;
    }
    report.dirichlet.resize(k, std::numeric_limits<double>::infinity());
  }
  report.neumann.resize(k, std::numeric_limits<double>::infinity());
  report.worst_violation = 0.0;
  for (const auto& row : bs.eigen_table) {
    for (std::size_t i = 0; i < k && i < row.size(); ++i) {
      report.worst_violation = std::max(report.worst_violation, report.neumann[i] - row[i]);
      if (std::isfinite(report.dirichlet[i])) {
        report.worst_violation = std::max(report.worst_violation, row[i] - report.dirichlet[i]);
      }
    }
  }
  report.enclosure_ok = report.worst_violation <= kEnclosureSlack;
  return report;
}

EnclosureReport nd_enclosure(const PeriodCellGraph& graph, std::size_t k, int theta_resolution) {
  return nd_enclosure(graph, k, band_structure(graph, theta_resolution, k));
}

void write_band_csv(std::ostream& os, const BandStructure& bs) {
  const std::size_t d = bs.theta_angles.empty() ? 0 : bs.theta_angles.front().size();
  os << "theta_index";
  for (std::size_t a = 0; a < d; ++a) os << ",theta_" << a + 1;
  os << ",k,lambda\n";
  char buf[64];
  for (std::size_t q = 0; q < bs.eigen_table.size(); ++q) {
    std::string prefix = std::to_string(q);
    for (double angle : bs.theta_angles[q]) {
      std::snprintf(buf, sizeof buf, ",%.17g", angle);
      prefix += buf;
    }
    for (std::size_t k = 0; k < bs.eigen_table[q].size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%zu,%.17g\n", k + 1, bs.eigen_table[q][k]);
      os << prefix << buf;
    }
  }
}

void to_json(nlohmann::json& j, const BandStructure& bs) {
  auto bands = nlohmann::json::array();
  for (const auto& b : bs.bands) bands.push_back({b.lo, b.hi});
  j = {{"theta_resolution", bs.theta_resolution},
       {"theta_angles", bs.theta_angles},
       {"eigen_table", bs.eigen_table},
       {"bands", std::move(bands)}};
}

void to_json(nlohmann::json& j, const EnclosureReport& r) {
  auto finite_or_null = [](const std::vector<double>& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return arr;
  };
  j = {{"neumann", finite_or_null(r.neumann)},
       {"dirichlet", finite_or_null(r.dirichlet)},
       {"enclosure_ok", r.enclosure_ok},
       {"worst_violation", r.worst_violation}};
}

}  // namespace gapforge
