#include <benchmark/benchmark.h>

#include <random>

#include "gapforge/cell_graph.hpp"
#include "gapforge/cell_spectrum.hpp"
#include "gapforge/dispersion.hpp"
#include "gapforge/floquet.hpp"
#include "gapforge/homogenized.hpp"

namespace {

using namespace gapforge;

GapSpec ladder_spec(std::size_t m) {
  std::vector<Interval> raw;
  for (std::size_t j = 0; j < m; ++j) raw.push_back({2.0 * j + 1.0, 2.0 * j + 1.8});
  return validate_gap_spec(raw, 3, 0.01, 100.0 * m);
}

void BM_MuRoots(benchmark::State& state) {
  const auto model = design_geometry(ladder_spec(static_cast<std::size_t>(state.range(0)))).model;
  for (auto _ : state) benchmark::DoNotOptimize(mu_roots(model));
}
BENCHMARK(BM_MuRoots)->Arg(1)->Arg(5)->Arg(20);

void BM_DesignGeometry(benchmark::State& state) {
  const auto spec = ladder_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(design_geometry(spec));
}
BENCHMARK(BM_DesignGeometry)->Arg(1)->Arg(5);

void BM_RadialEigenvalues(benchmark::State& state) {
  const auto base = design_geometry(ladder_spec(1)).geometry;
  const auto geom = eps_scale(base, 0.05);
  const int nodes = static_cast<int>(state.range(0));
  const auto cell = build_radial_cell(geom, 0, {nodes, nodes});
  for (auto _ : state) benchmark::DoNotOptimize(radial_eigenvalues(cell, 2));
}
BENCHMARK(BM_RadialEigenvalues)->Arg(257)->Arg(1025)->Unit(benchmark::kMillisecond);

void BM_TrialRayleigh(benchmark::State& state) {
  const auto geom = eps_scale(design_geometry(ladder_spec(1)).geometry, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(trial_rayleigh(geom, 0));
}
BENCHMARK(BM_TrialRayleigh)->Unit(benchmark::kMillisecond);

void BM_ThetaSpectrum(benchmark::State& state) {
  auto spec = demo_cell_spec();
  spec.grid = static_cast<int>(state.range(0));
  const auto graph = build_cell_graph(spec);
  const std::vector<Complex> theta{std::polar(1.0, 0.7), std::polar(1.0, -1.9)};
  for (auto _ : state) benchmark::DoNotOptimize(theta_spectrum(graph, theta, 12));
}
BENCHMARK(BM_ThetaSpectrum)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
