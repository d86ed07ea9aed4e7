#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gapforge/cell_graph.hpp"
#include "gapforge/error.hpp"

using namespace gapforge;
using Catch::Matchers::WithinRel;
constexpr double pi = std::numbers::pi;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InternalInvariant;
}

}  // namespace

TEST_CASE("demo cell mass matches the analytic area", "[graph]") {
  const auto spec = demo_cell_spec();
  const auto graph = build_cell_graph(spec);
  CHECK_NOTHROW(validate_graph(graph));
  const double theta = std::asin(0.05 / 0.3);
  const double cap = 2 * pi * 0.09 * (1 + std::cos(theta));
  const double area = 1 - pi * 0.05 * 0.05 + cap;
  CHECK_THAT(cell_area(spec), WithinRel(area, 1e-12));
  CHECK_THAT(graph.total_mass(), WithinRel(area, 0.02));
  CHECK(graph.directions == 2);
}

TEST_CASE("plain perforated square", "[graph]") {
  auto spec = demo_cell_spec();
  spec.holes[0].bubble_radius = 0.0;
  spec.holes[0].hole_radius = 0.1;
  const auto graph = build_cell_graph(spec);
  CHECK_THAT(graph.total_mass(), WithinRel(1 - pi * 0.01, 0.02));
  spec.holes.clear();
  CHECK_THAT(build_cell_graph(spec).total_mass(), WithinRel(1.0, 1e-12));
}

TEST_CASE("boundary pairs form a face bijection", "[graph]") {
  const auto graph = build_cell_graph(demo_cell_spec());
  std::size_t per_dir[3] = {0, 0, 0};
  for (const auto& p : graph.boundary_pairs) ++per_dir[p.dir];
  CHECK(per_dir[1] > 0);
  CHECK(per_dir[1] == per_dir[2]);
}

TEST_CASE("builder rejects unresolvable and crowded holes", "[graph]") {
  auto tiny = demo_cell_spec();
  tiny.holes[0].hole_radius = 0.02;  // 2r below 6 grid cells at h = 1/64
  CHECK(code_of([&] { build_cell_graph(tiny); }) == ErrorCode::UnresolvableHole);

  auto crowded = demo_cell_spec();
  crowded.holes = {HoleSpec{{0.4, 0.5}, 0.06, 0.2}, HoleSpec{{0.6, 0.5}, 0.06, 0.2}};
  CHECK(code_of([&] { build_cell_graph(crowded); }) == ErrorCode::HoleSeparation);

  auto edge = demo_cell_spec();
  edge.holes[0].center = {0.1, 0.5};
  CHECK(code_of([&] { build_cell_graph(edge); }) == ErrorCode::HoleSeparation);

  auto flat_bubble = demo_cell_spec();
  flat_bubble.holes[0].bubble_radius = 0.04;
  CHECK_THROWS_AS(build_cell_graph(flat_bubble), Error);
}

TEST_CASE("validate_graph catches malformed graphs", "[graph]") {
  CHECK(code_of([] { make_graph(1, {1, 1}, {}, {}); }) == ErrorCode::InvalidGraph);
  CHECK(code_of([] { make_graph(1, {1, 0}, {{0, 1, 1}}, {}); }) == ErrorCode::InvalidGraph);
  CHECK(code_of([] { make_graph(1, {1, 1}, {{0, 1, -1}}, {}); }) == ErrorCode::InvalidGraph);
  CHECK(code_of([] { make_graph(1, {1, 1, 1}, {{0, 1, 1}, {1, 2, 1}}, {{0, 1, 1}, {0, 2, 1}}); }) ==
        ErrorCode::InvalidGraph);
  CHECK(code_of([] { make_graph(1, {1, 1}, {{0, 1, 1}}, {{0, 1, 2}}); }) == ErrorCode::InvalidGraph);
}

TEST_CASE("graph and spec serialization", "[graph][json]") {
  const auto graph = make_graph(1, {0.5, 1, 0.5}, {{0, 1, 1}, {1, 2, 2}}, {{0, 2, 1}});
  const nlohmann::json j = graph;
  CHECK(j.at("vertices").size() == 3);
  CHECK(j.at("vertices")[1].at("mass") == 1.0);
  CHECK(j.at("edges")[1].at("w") == 2.0);
  CHECK(j.at("boundary_pairs")[0].at("dir") == 1);
  const nlohmann::json s = demo_cell_spec(0.35);
  CHECK(s.get<CellGridSpec>().holes[0].bubble_radius == 0.35);
}
