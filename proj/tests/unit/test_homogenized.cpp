#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "gapforge/dispersion.hpp"
#include "gapforge/error.hpp"
#include "gapforge/homogenized.hpp"
#include "support/oracles.hpp"

using namespace gapforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
constexpr double pi = std::numbers::pi;

namespace {

GapSpec spec_of(std::vector<Interval> raw, int n = 3) {
  return validate_gap_spec(raw, n, 0.01, 1000);
}

}  // namespace

TEST_CASE("sphere_measure matches the volume recursion", "[design]") {
  CHECK_THAT(sphere_measure(1), WithinRel(2 * pi, 1e-15));
  CHECK_THAT(sphere_measure(2), WithinRel(4 * pi, 1e-15));
  CHECK_THAT(sphere_measure(3), WithinRel(2 * pi * pi, 1e-15));
  for (int k = 1; k <= 12; ++k) {
    CHECK_THAT(sphere_measure(k), WithinRel(oracle::sphere_measure_recursive(k), 1e-13));
  }
  CHECK_THROWS_AS(sphere_measure(0), Error);
}

TEST_CASE("forward_model hand-evaluated channels", "[design]") {
  const auto g3 = make_geometry(3, {{1 / (2 * pi), std::cbrt(1 / (2 * pi * pi))}}, 0.5);
  const auto m3 = forward_model(g3);
  CHECK_THAT(m3.sigma[0], WithinRel(1.0, 1e-14));
  CHECK_THAT(m3.rho[0], WithinRel(1.0, 1e-14));

  const auto g2 = make_geometry(2, {{1 / pi, 1 / std::sqrt(4 * pi)}}, 0.5);
  const auto m2 = forward_model(g2);
  CHECK_THAT(m2.sigma[0], WithinRel(1.0, 1e-14));
  CHECK_THAT(m2.rho[0], WithinRel(1.0, 1e-14));
}

TEST_CASE("equal channels are rejected as duplicate resonances", "[design]") {
  try {
    make_geometry(3, {{0.2, 0.4}, {0.2, 0.4}}, 0.5);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateSigma);
  }
}

TEST_CASE("channels are ordered by resonance", "[design]") {
  const auto g = make_geometry(3, {{0.1, 0.2}, {0.3, 0.2}}, 0.5);
  const auto m = forward_model(g);
  CHECK(m.sigma[0] < m.sigma[1]);
  CHECK(g.channels[0].d == 0.1);  // sigma grows with d
}

TEST_CASE("design_geometry hand-evaluated targets", "[design]") {
  const auto one = design_geometry(spec_of({{1, 2}}));
  CHECK_THAT(one.geometry.channels[0].d, WithinRel(1 / (2 * pi), 1e-14));
  CHECK_THAT(one.geometry.channels[0].b, WithinRel(std::cbrt(1 / (2 * pi * pi)), 1e-14));

  const auto two = design_geometry(spec_of({{1, 2}, {3, 4}}));
  CHECK_THAT(two.geometry.channels[0].d, WithinRel(3 / (4 * pi), 1e-14));
  CHECK_THAT(two.geometry.channels[1].d, WithinRel(1 / (4 * pi), 1e-14));
  CHECK_THAT(two.model.rho[0], WithinRel(1.5, 1e-14));
  CHECK_THAT(two.model.rho[1], WithinRel(1.0 / 6, 1e-13));
  // rho = b^3 omega_3 fixes b independently of the design formulas.
  CHECK_THAT(two.geometry.channels[0].b,
             WithinRel(std::cbrt(1.5 / oracle::sphere_measure_recursive(3)), 1e-12));
  CHECK_THAT(two.geometry.channels[0].b, WithinAbs(0.42360, 5e-5));
  CHECK_THAT(two.geometry.channels[1].b, WithinAbs(0.20359, 5e-5));

  const auto flat = design_geometry(spec_of({{1, 2}}, 2));
  CHECK_THAT(flat.geometry.channels[0].d, WithinRel(1 / pi, 1e-14));
  CHECK_THAT(flat.geometry.channels[0].b, WithinRel(1 / std::sqrt(4 * pi), 1e-14));
}

TEST_CASE("weight formulas hand-evaluated", "[design]") {
  CHECK_THAT(weights_closed_form(spec_of({{1, 2}}))[0], WithinRel(1.0, 1e-15));
  CHECK_THAT(weights_closed_form(spec_of({{2, 3}}))[0], WithinRel(0.5, 1e-15));
  const auto w = weights_closed_form(spec_of({{1, 2}, {3, 4}}));
  CHECK_THAT(w[0], WithinRel(1.5, 1e-15));
  CHECK_THAT(w[1], WithinRel(1.0 / 6, 1e-14));
  const auto s = solve_weight_system(spec_of({{1, 2}, {3, 4}}));
  CHECK_THAT(s[0], WithinRel(1.5, 1e-14));
  CHECK_THAT(s[1], WithinRel(1.0 / 6, 1e-14));
  // Substituting back into the linear system.
  for (double beta : {2.0, 4.0}) {
    CHECK_THAT(1.0 * w[0] / (beta - 1.0) + 3.0 * w[1] / (beta - 3.0), WithinRel(1.0, 1e-14));
  }
}

TEST_CASE("closed-form and eliminated weights agree on random specs", "[design][property]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = spec_of(oracle::random_targets(rng, 1 + trial % 8, 100.0));
    const auto a = weights_closed_form(spec);
    const auto b = solve_weight_system(spec);
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(a[j] > 0.0);
      CHECK_THAT(b[j], WithinRel(a[j], 1e-9));
    }
  }
}

TEST_CASE("design round trip reproduces the targets", "[design][property]") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const auto spec = spec_of(oracle::random_targets(rng, 1 + trial % 5, 100.0), n);
    const auto design = design_geometry(spec);
    const auto model = forward_model(design.geometry);
    const auto mu = mu_roots(model);
    for (std::size_t j = 0; j < spec.m(); ++j) {
      CHECK_THAT(model.sigma[j], WithinRel(spec.alpha(j), 1e-12));
      CHECK_THAT(mu[j], WithinRel(spec.beta(j), 1e-9));
    }
  }
}

TEST_CASE("scaling the targets scales resonances and keeps weights", "[design][property]") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = oracle::random_targets(rng, 1 + trial % 4, 10.0);
    const double c = 0.5 + trial * 0.1;
    std::vector<Interval> scaled;
    for (const auto& iv : raw) scaled.push_back({c * iv.lo, c * iv.hi});
    const auto a = design_geometry(spec_of(raw)).model;
    const auto b = design_geometry(spec_of(scaled)).model;
    for (std::size_t j = 0; j < a.m(); ++j) {
      CHECK_THAT(b.sigma[j], WithinRel(c * a.sigma[j], 1e-12));
      CHECK_THAT(b.rho[j], WithinRel(a.rho[j], 1e-10));
      CHECK_THAT((*b.mu)[j], WithinRel(c * (*a.mu)[j], 1e-9));
    }
  }
}

TEST_CASE("geometry and model serialize as flat objects", "[design][json]") {
  const auto design = design_geometry(spec_of({{1, 2}, {3, 4}}));
  const nlohmann::json g = design.geometry;
  CHECK(g.at("d").size() == 2);
  CHECK(g.at("b").size() == 2);
  const auto back = g.get<BubbleGeometry>();
  CHECK(back.channels[1].b == design.geometry.channels[1].b);
  const nlohmann::json m = design.model;
  CHECK(m.at("mu").size() == 2);
  CHECK(m.get<HomogenizedModel>().sigma == design.model.sigma);
}
