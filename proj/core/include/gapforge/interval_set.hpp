#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gapforge {

/// Absolute tolerance used when comparing interval endpoints.
inline constexpr double kEndpointTolerance = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool unbounded() const { return hi == std::numeric_limits<double>::infinity(); }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint intervals on [0, inf). Whether an interval is
/// read as open (a gap) or closed (a band) is up to the caller; the container
/// only guarantees lo_k < hi_k <= lo_{k+1}. Only the last interval may have
/// hi = +inf.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Sorts and validates. Throws Error on empty/negative/overlapping input.
  static IntervalSet from_unsorted(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }
  const Interval& operator[](std::size_t k) const { return intervals_[k]; }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

  bool has_unbounded_tail() const {
    return !intervals_.empty() && intervals_.back().unbounded();
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  explicit IntervalSet(std::vector<Interval> sorted) : intervals_(std::move(sorted)) {}
  std::vector<Interval> intervals_;
};

struct GapSpec {
  IntervalSet targets;
  int n = 0;
  double delta = 0.0;
  double horizon = 0.0;

  std::size_t m() const { return targets.size(); }
  double alpha(std::size_t j) const { return targets[j].lo; }
  double beta(std::size_t j) const { return targets[j].hi; }
};

/// Union of possibly overlapping closed intervals; pieces that overlap or
/// touch (within kEndpointTolerance) are merged.
IntervalSet union_of(std::vector<Interval> intervals);

/// Sorts raw target intervals and checks the strict chain
/// 0 < a_1 < b_1 < a_2 < ... < b_m < inf. Every violation is a distinct
/// ErrorCode.
GapSpec validate_gap_spec(std::span<const Interval> raw_intervals, int n, double delta,
                          double horizon);

/// Open complement of the closed union of `bands` inside [0, L].
IntervalSet complement_on(const IntervalSet& bands, double L);

/// Hausdorff distance between the closed unions of A and B restricted to
/// [0, L]. Exact: the distance-to-set function is piecewise linear, so its
/// supremum over an interval sits at an endpoint or at a midpoint of a hole
/// in the other set.
double hausdorff_distance(const IntervalSet& A, const IntervalSet& B, double L);

struct GapMatch {
  Interval target;
  Interval computed;
  double edge_error = 0.0;  // |a_c - a| + |b_c - b|
  bool pass = false;
};

struct MatchReport {
  bool pass = false;
  bool count_mismatch = false;
  std::size_t expected = 0;
  std::size_t found_in_window = 0;
  std::vector<GapMatch> per_gap;
  std::vector<Interval> extra_gaps;  // computed gaps beyond the first m
  std::vector<Interval> stray_gaps;  // extra gaps that intrude into [0, L]
};

MatchReport gap_match_report(const IntervalSet& computed_gaps, const GapSpec& spec);
MatchReport gap_match_report(std::vector<Interval> computed_gaps, const GapSpec& spec);

void to_json(nlohmann::json& j, const Interval& interval);
void to_json(nlohmann::json& j, const IntervalSet& set);
void from_json(const nlohmann::json& j, IntervalSet& set);
void to_json(nlohmann::json& j, const MatchReport& report);
void to_json(nlohmann::json& j, const GapSpec& spec);

}  // namespace gapforge
