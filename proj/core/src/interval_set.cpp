#include "gapforge/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gapforge/error.hpp"

namespace gapforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInterval: return "invalid_interval";
    case ErrorCode::EmptyInterval: return "empty_interval";
    case ErrorCode::OverlappingIntervals: return "overlapping_intervals";
    case ErrorCode::NonPositiveLowerEdge: return "nonpositive_lower_edge";
    case ErrorCode::InvalidDimension: return "invalid_dimension";
    case ErrorCode::NonPositiveDelta: return "nonpositive_delta";
    case ErrorCode::NonPositiveHorizon: return "nonpositive_horizon";
    case ErrorCode::EmptyWindow: return "empty_window";
    case ErrorCode::InvalidGeometry: return "invalid_geometry";
    case ErrorCode::DuplicateSigma: return "duplicate_sigma";
    case ErrorCode::InternalInvariant: return "internal_invariant";
    case ErrorCode::PoleEvaluation: return "pole_evaluation";
    case ErrorCode::HorizonTooSmall: return "horizon_too_small";
    case ErrorCode::RepresentableScale: return "representable_scale";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::QuadratureFailure: return "quadrature_failure";
    case ErrorCode::InvalidResolution: return "invalid_resolution";
    case ErrorCode::EigenSolverFailure: return "eigensolver_failure";
    case ErrorCode::UnresolvableHole: return "unresolvable_hole";
    case ErrorCode::HoleSeparation: return "hole_separation";
    case ErrorCode::InvalidCharacter: return "invalid_character";
    case ErrorCode::InvalidGraph: return "invalid_graph";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const Interval& iv) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << iv.lo << ", " << iv.hi << ')';
  return os.str();
}

void sort_by_lower(std::vector<Interval>& v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
}

// Closed pieces of the union clipped to [0, L]. Degenerate pieces (single
// points) are kept: a band [L, 10] meets the window in {L}.
std::vector<Interval> clip_closed(const IntervalSet& s, double L) {
  std::vector<Interval> out;
  for (const auto& iv : s) {
    if (iv.lo > L) break;
    out.push_back({std::max(iv.lo, 0.0), std::min(iv.hi, L)});
  }
  return out;
}

// Distance from x to a nonempty sorted union of closed intervals.
double distance_to(double x, const std::vector<Interval>& set) {
  auto it = std::lower_bound(set.begin(), set.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  double best = kInf;
  if (it != set.end()) {
    best = (x >= it->lo) ? 0.0 : it->lo - x;
  }
  if (it != set.begin()) {
    best = std::min(best, x - std::prev(it)->hi);
  }
  return best;
}

// sup_{a in A} dist(a, B). dist(., B) is piecewise linear with local maxima
// only at midpoints of the holes between consecutive pieces of B.
double directed_hausdorff(const std::vector<Interval>& A, const std::vector<Interval>& B) {
  std::vector<double> hole_mids;
  for (std::size_t k = 0; k + 1 < B.size(); ++k) {
    hole_mids.push_back(0.5 * (B[k].hi + B[k + 1].lo));
  }
  double sup = 0.0;
  for (const auto& a : A) {
    sup = std::max({sup, distance_to(a.lo, B), distance_to(a.hi, B)});
    auto first = std::lower_bound(hole_mids.begin(), hole_mids.end(), a.lo);
    for (auto it = first; it != hole_mids.end() && *it <= a.hi; ++it) {
      sup = std::max(sup, distance_to(*it, B));
    }
  }
  return sup;
}

}  // namespace

IntervalSet IntervalSet::from_unsorted(std::vector<Interval> intervals) {
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto& iv = intervals[k];
    if (!std::isfinite(iv.lo) || std::isnan(iv.hi)) {
      throw Error(ErrorCode::InvalidInterval, "interval " + describe(iv) + " has a non-finite lower end");
    }
    if (iv.lo < 0.0) {
      throw Error(ErrorCode::InvalidInterval, "interval " + describe(iv) + " extends below zero");
    }
    if (!(iv.lo < iv.hi)) {
      throw Error(ErrorCode::EmptyInterval, "interval " + describe(iv) + " is empty");
    }
  }
  sort_by_lower(intervals);
  for (std::size_t k = 0; k + 1 < intervals.size(); ++k) {
    if (intervals[k].hi > intervals[k + 1].lo + kEndpointTolerance) {
      throw Error(ErrorCode::OverlappingIntervals,
                  "intervals " + describe(intervals[k]) + " and " + describe(intervals[k + 1]) +
                      " overlap");
    }
  }
  return IntervalSet(std::move(intervals));
}

IntervalSet union_of(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& iv) { return !(iv.lo < iv.hi); });
  sort_by_lower(intervals);
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.lo <= merged.back().hi + kEndpointTolerance) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return IntervalSet::from_unsorted(std::move(merged));
}

GapSpec validate_gap_spec(std::span<const Interval> raw_intervals, int n, double delta,
                          double horizon) {
  if (raw_intervals.empty()) {
    throw Error(ErrorCode::InvalidInterval, "intervals: at least one target gap is required");
  }
  for (std::size_t k = 0; k < raw_intervals.size(); ++k) {
    const auto& iv = raw_intervals[k];
    const std::string field = "intervals[" + std::to_string(k) + "]";
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw Error(ErrorCode::InvalidInterval, field + ": endpoints must be finite");
    }
    if (!(iv.lo < iv.hi)) {
      throw Error(ErrorCode::EmptyInterval, field + ": lower edge " + describe(iv) +
                                                " must be strictly below the upper edge");
    }
    if (!(iv.lo > 0.0)) {
      throw Error(ErrorCode::NonPositiveLowerEdge, field + ": lower edge must be positive");
    }
  }
  std::vector<Interval> sorted(raw_intervals.begin(), raw_intervals.end());
  sort_by_lower(sorted);
  // Closures must be pairwise disjoint: b_j < a_{j+1} strictly.
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    if (!(sorted[k].hi < sorted[k + 1].lo)) {
      throw Error(ErrorCode::OverlappingIntervals,
                  "intervals: " + describe(sorted[k]) + " and " + describe(sorted[k + 1]) +
                      " overlap or touch");
    }
  }
  if (n < 2) {
    throw Error(ErrorCode::InvalidDimension, "n: dimension must be at least 2");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::NonPositiveDelta, "delta: tolerance must be positive");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::NonPositiveHorizon, "L: horizon must be positive");
  }
  GapSpec spec;
  spec.targets = IntervalSet::from_unsorted(std::move(sorted));
  spec.n = n;
  spec.delta = delta;
  spec.horizon = horizon;
  return spec;
}

IntervalSet complement_on(const IntervalSet& bands, double L) {
  std::vector<Interval> gaps;
  double cursor = 0.0;
  for (const auto& b : bands) {
    if (b.lo > L) break;
    if (b.lo - cursor > kEndpointTolerance) {
      gaps.push_back({cursor, b.lo});
    }
    cursor = std::max(cursor, b.hi);
  }
  if (L - cursor > kEndpointTolerance) {
    gaps.push_back({cursor, L});
  }
  return IntervalSet::from_unsorted(std::move(gaps));
}

double hausdorff_distance(const IntervalSet& A, const IntervalSet& B, double L) {
  const auto a = clip_closed(A, L);
  const auto b = clip_closed(B, L);
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptyWindow, "hausdorff_distance: a set has no points in [0, L]");
  }
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

MatchReport gap_match_report(const IntervalSet& computed_gaps, const GapSpec& spec) {
  MatchReport report;
  report.expected = spec.m();
  const double L = spec.horizon;
  for (const auto& g : computed_gaps) {
    if (g.lo < L) ++report.found_in_window;
  }
  const std::size_t paired = std::min(spec.m(), computed_gaps.size());
  bool all_edges_ok = true;
  for (std::size_t j = 0; j < paired; ++j) {
    GapMatch match;
    match.target = spec.targets[j];
    match.computed = computed_gaps[j];
    match.edge_error = std::abs(match.computed.lo - match.target.lo) +
                       std::abs(match.computed.hi - match.target.hi);
    match.pass = match.edge_error < spec.delta;
    all_edges_ok = all_edges_ok && match.pass;
    report.per_gap.push_back(match);
  }
  for (std::size_t k = paired; k < computed_gaps.size(); ++k) {
    report.extra_gaps.push_back(computed_gaps[k]);
    if (!(computed_gaps[k].lo > L)) report.stray_gaps.push_back(computed_gaps[k]);
  }
  report.count_mismatch = computed_gaps.size() < spec.m() || report.found_in_window < spec.m();
  report.pass = !report.count_mismatch && all_edges_ok && report.stray_gaps.empty();
  return report;
}

MatchReport gap_match_report(std::vector<Interval> computed_gaps, const GapSpec& spec) {
  return gap_match_report(IntervalSet::from_unsorted(std::move(computed_gaps)), spec);
}

void to_json(nlohmann::json& j, const Interval& interval) {
  j = nlohmann::json::array({interval.lo, nullptr});
  if (!interval.unbounded()) j[1] = interval.hi;
}

void to_json(nlohmann::json& j, const IntervalSet& set) {
  j = nlohmann::json::array();
  for (const auto& iv : set) j.push_back(iv);
}

void from_json(const nlohmann::json& j, IntervalSet& set) {
  std::vector<Interval> raw;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorCode::InvalidInterval, "interval must be a [lo, hi] pair");
    }
    const double hi = pair[1].is_null() ? kInf : pair[1].get<double>();
    raw.push_back({pair[0].get<double>(), hi});
  }
  set = IntervalSet::from_unsorted(std::move(raw));
}

void to_json(nlohmann::json& j, const MatchReport& report) {
  j = nlohmann::json::object();
  j["pass"] = report.pass;
  j["count_mismatch"] = report.count_mismatch;
  j["expected"] = report.expected;
  j["found_in_window"] = report.found_in_window;
  auto per_gap = nlohmann::json::array();
  for (const auto& g : report.per_gap) {
    per_gap.push_back({{"target", g.target},
                       {"computed", g.computed},
                       {"edge_error", g.edge_error},
                       {"pass", g.pass}});
  }
  j["per_gap"] = std::move(per_gap);
  j["extra_gaps"] = report.extra_gaps;
  j["stray_gaps"] = report.stray_gaps;
}

void to_json(nlohmann::json& j, const GapSpec& spec) {
  j = {{"intervals", spec.targets}, {"n", spec.n}, {"delta", spec.delta}, {"L", spec.horizon}};
}

}  // namespace gapforge
