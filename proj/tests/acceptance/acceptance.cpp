// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gapforge/cell_graph.hpp"
#include "gapforge/cell_spectrum.hpp"
#include "gapforge/dispersion.hpp"
#include "gapforge/error.hpp"
#include "gapforge/floquet.hpp"
#include "gapforge/homogenized.hpp"
#include "gapforge/interval_set.hpp"
#include "support/oracles.hpp"

using namespace gapforge;

namespace {

// Pinned tolerances and budgets.
constexpr double kSigmaRel = 1e-12;
constexpr double kMuRel = 1e-9;
constexpr double kClosedFormMuRel = 1e-12;
constexpr double kWeightsRel = 1e-9;
constexpr double kLimitRel = 0.01;          // extrapolated lambda1 vs sigma
constexpr double kMeshConvergedRel = 1e-5;  // Richardson correction at the finest mesh
constexpr double kAsymptoticRel = 0.05;     // numerator, denominator, eps^2 lambda2
constexpr double kFluxRel = 0.01;
constexpr double kGroundState = 1e-10;
constexpr double kConstantVector = 1e-8;
constexpr double kBruteForce = 1e-10;
constexpr double kMatchDelta = 1e-6;
constexpr double kTargetSeparation = 1e-4;  // min spacing of random endpoints, relative to the range

constexpr double kBudget1 = 1.0, kBudget2 = 0.1, kBudget3 = 1.0, kBudget4 = 5.0;
constexpr double kBudget5 = 30.0, kBudget9 = 120.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* title, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget > 0 && seconds > budget) {
    out.require(false, fmt("runtime %.2f s exceeds %.2f s", seconds, budget));
  }
  if (!out.pass) ++failures;
  std::printf("criterion %2d: %s  %s  [%.2f s]%s%s\n", id, out.pass ? "PASS" : "FAIL", title, seconds,
              out.detail.empty() ? "" : "  ", out.detail.c_str());
  std::fflush(stdout);
}

struct RandomSpec {
  GapSpec spec;
  HomogenizedModel model;
};

std::vector<RandomSpec> round_trip_specs() {
  std::mt19937_64 rng(1001);
  std::vector<RandomSpec> out;
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + i % 3;
    const std::size_t m = 1 + static_cast<std::size_t>(i % 5);
    const auto raw = oracle::random_targets(rng, m, 100.0, kTargetSeparation);
    const GapSpec spec = validate_gap_spec(raw, n, kMatchDelta, 1000.0);
    const Design design = design_geometry(spec, 0.5);
    HomogenizedModel model = forward_model(design.geometry);
    cache_mu(model);
    out.push_back({spec, model});
  }
  return out;
}

Outcome criterion1() {
  Outcome out;
  double worst_sigma = 0, worst_mu = 0;
  for (const auto& [spec, model] : round_trip_specs()) {
    for (std::size_t j = 0; j < spec.m(); ++j) {
      worst_sigma = std::max(worst_sigma, rel_err(model.sigma[j], spec.alpha(j)));
      worst_mu = std::max(worst_mu, rel_err((*model.mu)[j], spec.beta(j)));
    }
  }
  out.require(worst_sigma <= kSigmaRel, "sigma mismatch");
  out.require(worst_mu <= kMuRel, "mu mismatch");
  out.detail = fmt("max rel sigma %.2e (tol %.0e), mu %.2e (tol %.0e)", worst_sigma, kSigmaRel, worst_mu,
                   kMuRel) + (out.pass ? "" : "; " + out.detail);
  return out;
}

Outcome criterion2() {
  Outcome out;
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double sigma = u(rng), rho = u(rng) / 10;
    worst = std::max(worst, rel_err(mu_roots(make_model(3, {sigma}, {rho}))[0], sigma * (1 + rho)));
  }
  out.require(worst <= kClosedFormMuRel, "closed form mismatch");
  out.detail = fmt("max rel error %.2e (tol %.0e)", worst, kClosedFormMuRel);
  return out;
}

Outcome criterion3() {
  Outcome out;
  std::mt19937_64 rng(1003);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const auto raw = oracle::random_targets(rng, 1 + static_cast<std::size_t>(i % 8), 100.0, kTargetSeparation);
    const GapSpec spec = validate_gap_spec(raw, 3, 0.01, 1000.0);
    const auto a = weights_closed_form(spec);
    const auto b = solve_weight_system(spec);
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, rel_err(b[j], a[j]));
  }
  out.require(worst <= kWeightsRel, "weights differ");
  out.detail = fmt("max rel difference %.2e (tol %.0e)", worst, kWeightsRel);
  return out;
}

Outcome criterion4() {
  Outcome out;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> step(0.1, 5.0), weight(0.01, 3.0);
  long sign_checks = 0, level_checks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> sigma, rho;
    double s = 0;
    for (int j = 0; j <= trial % 5; ++j) {
      s += step(rng);
      sigma.push_back(s);
      rho.push_back(weight(rng));
    }
    const auto model = make_model(3, sigma, rho);
    const auto mu = mu_roots(model);
    const std::size_t m = model.m();
    for (std::size_t j = 0; j < m; ++j) {
      out.require(sigma[j] < mu[j] && (j + 1 == m || mu[j] < sigma[j + 1]), "interlacing violated");
    }
    std::uniform_real_distribution<double> level(0.0, 10 * mu.back());
    for (int k = 0; k < 100; ++k) {
      const auto roots = level_set_roots(model, level(rng));
      ++level_checks;
      out.require(roots.size() == m + 1, "wrong number of level-set roots");
      for (double r : roots) out.require(r >= 0.0, "negative level-set root");
    }
    const double L = 2 * mu.back();
    const auto ls = limit_spectrum(model, L);
    for (int i = 1; i <= 10000; ++i) {
      const double x = L * (i - 0.5) / 10000.0;
      bool edge = false;
      for (std::size_t j = 0; j < m; ++j) {
        edge = edge || std::abs(x - sigma[j]) < 1e-9 || std::abs(x - mu[j]) < 1e-12 * mu[j];
      }
      if (edge) continue;
      bool in_gap = false;
      for (const auto& g : ls.gaps) in_gap = in_gap || (x > g.lo && x < g.hi);
      const double v = dispersion_eval(model, x);
      ++sign_checks;
      out.require(in_gap ? v < 0.0 : v >= 0.0, fmt("sign mismatch at lambda=%.6g", x));
    }
  }
  const std::string base = fmt("50 models, %ld level sets, %ld sign samples", level_checks, sign_checks);
  out.detail = out.pass ? base : base + "; " + out.detail;
  return out;
}

// Shared by criteria 5 to 8.
struct LadderRow {
  double eps;
  double lambda1;       // Richardson limit over the mesh ladder
  double mesh_change;   // |correction| / lambda1 at the finest mesh
  double order;         // observed mesh convergence order
  double lambda2;
  RayleighBound bound;
  JunctionFlux flux;
  double numerator_ratio;
  double denominator_ratio;
  double eps2_lambda2;
};

struct Ladder {
  std::vector<LadderRow> rows;
  ReferenceLimits limits;
  double sigma = 0;
};

const std::vector<double> kEpsLadder{0.2, 0.1, 0.05, 0.025};

Ladder build_ladder() {
  const std::vector<Interval> raw{{1, 2}};
  const GapSpec spec = validate_gap_spec(raw, 3, 0.01, 20);
  const Design design = design_geometry(spec, 0.5);
  const auto& base = design.geometry;
  Ladder ladder;
  ladder.sigma = design.model.sigma[0];
  ladder.limits = reference_limits(base, 0.5, 0);
  const double rho = design.model.rho[0];
  const RadialResolution res;
  for (double eps : kEpsLadder) {
    const EpsGeometry geom = eps_scale(base, eps);
    std::vector<std::vector<double>> lam;
    for (int f : {1, 2, 4}) lam.push_back(radial_eigenvalues(build_radial_cell(geom, 0, res.refined(f)), 2));
    LadderRow row;
    row.eps = eps;
    const double d1 = lam[0][0] - lam[1][0], d2 = lam[1][0] - lam[2][0];
    row.lambda1 = lam[2][0] - d2 / 3;
    row.mesh_change = std::abs(d2 / 3) / row.lambda1;
    row.order = std::log2(std::abs(d1 / d2));
    row.lambda2 = lam[2][1] - (lam[1][1] - lam[2][1]) / 3;
    row.bound = trial_rayleigh(geom, 0);
    row.flux = junction_flux(geom, 0);
    row.numerator_ratio = row.bound.numerator / (ladder.sigma * rho * std::pow(eps, 3));
    row.denominator_ratio = row.bound.denominator / (rho * std::pow(eps, 3));
    row.eps2_lambda2 = eps * eps * row.lambda2;
    ladder.rows.push_back(row);
  }
  return ladder;
}

Outcome criterion5(const Ladder& ladder) {
  Outcome out;
  double prev = INFINITY;
  for (const auto& r : ladder.rows) {
    const double err = std::abs(r.lambda1 - ladder.sigma);
    out.require(err < prev, fmt("|lambda1 - sigma| not decreasing at eps=%g", r.eps));
    out.require(r.mesh_change <= kMeshConvergedRel, fmt("mesh not converged at eps=%g", r.eps));
    prev = err;
  }
  // lambda1 - sigma = O(eps^2) along the ladder: one Richardson step in eps.
  const auto& a = ladder.rows[ladder.rows.size() - 2];
  const auto& b = ladder.rows.back();
  const double limit = (4 * b.lambda1 - a.lambda1) / 3;
  out.require(rel_err(limit, ladder.sigma) <= kLimitRel, "extrapolated limit off");
  std::string errs;
  for (const auto& r : ladder.rows) errs += fmt("%.3e ", std::abs(r.lambda1 - ladder.sigma));
  const std::string base = fmt("|lambda1-1| = %sextrapolated %.6f (tol %.0f%%), mesh order %.2f", errs.c_str(),
                               limit, 100 * kLimitRel, b.order);
  out.detail = out.pass ? base : base + "; " + out.detail;
  return out;
}

Outcome criterion6(const Ladder& ladder) {
  Outcome out;
  double prev_margin = INFINITY;
  for (const auto& r : ladder.rows) {
    const double margin = r.bound.quotient - r.lambda1;
    out.require(margin >= 0.0, fmt("Rayleigh quotient below lambda1 at eps=%g", r.eps));
    out.require(margin < prev_margin, fmt("margin not shrinking at eps=%g", r.eps));
    prev_margin = margin;
  }
  const auto& last = ladder.rows.back();
  out.require(rel_err(last.numerator_ratio, 1.0) <= kAsymptoticRel, "numerator ratio off");
  out.require(rel_err(last.denominator_ratio, 1.0) <= kAsymptoticRel, "denominator ratio off");
  const std::string base = fmt("final margin %.2e, numerator ratio %.5f, denominator ratio %.5f (tol %.0f%%)",
                               prev_margin, last.numerator_ratio, last.denominator_ratio, 100 * kAsymptoticRel);
  out.detail = out.pass ? base : base + "; " + out.detail;
  return out;
}

Outcome criterion7(const Ladder& ladder) {
  Outcome out;
  const auto& last = ladder.rows.back();
  const double target = ladder.limits.Lj_lambda2;
  const double dev = rel_err(last.eps2_lambda2, target);
  out.require(dev <= kAsymptoticRel, "eps^2 lambda2 off");
  out.detail = fmt("eps^2 lambda2 = %.5f vs min(disk %.3f, sphere %.4f) = %.4f, rel %.2e (zonal modes only)",
                   last.eps2_lambda2, ladder.limits.lambda1_D_disk, ladder.limits.lambda2_sphere, target, dev);
  return out;
}

Outcome criterion8(const Ladder& ladder) {
  Outcome out;
  const double ratio = ladder.rows.back().flux.ratio;
  out.require(rel_err(ratio, 1.0) <= kFluxRel, "flux ratio off");
  out.detail = fmt("flux ratio %.6f at eps=0.025 (tol %.0f%%)", ratio, 100 * kFluxRel);
  return out;
}

Outcome criterion9() {
  Outcome out;
  constexpr int kThetaGrid = 16;
  constexpr std::size_t kBands = 12;
  const auto graph = build_cell_graph(demo_cell_spec());

  // (a) exact Hermiticity on every sampled character.
  bool hermitian = true;
  for (int p = 0; p < kThetaGrid; ++p) {
    for (int q = 0; q < kThetaGrid; ++q) {
      const std::vector<Complex> theta{std::polar(1.0, 2 * M_PI * p / kThetaGrid),
                                       std::polar(1.0, 2 * M_PI * q / kThetaGrid)};
      hermitian = hermitian && is_exactly_hermitian(fold(graph, theta).stiffness);
    }
  }
  out.require(hermitian, "(a) folded stiffness not Hermitian");

  // (b) ground state at the trivial character.
  const auto ground = theta_eigenpairs(graph, std::vector<Complex>{1.0, 1.0}, 1);
  const Eigen::VectorXcd u = ground.vectors.col(0);
  const Complex mean = u.mean();
  const double spread = (u.array() - mean).abs().maxCoeff() / std::abs(mean);
  out.require(std::abs(ground.values[0]) < kGroundState, "(b) lambda1 at trivial character too large");
  out.require(spread < kConstantVector, "(b) ground state not constant");

  // (c) Neumann/Dirichlet enclosure over the whole band sweep.
  const auto bs = band_structure(graph, kThetaGrid, kBands);
  const auto enclosure = nd_enclosure(graph, kBands, bs);
  out.require(enclosure.enclosure_ok, "(c) enclosure violated");

  // (d) a gap exists and a larger bubble lowers its lower edge.
  const auto gaps = detect_gaps(bs, bs.top());
  out.require(!gaps.empty(), "(d) no gap detected");
  // The first gap sits between the two lowest bands, so the full sweep already holds it.
  const std::vector<Interval> lowest_two(bs.bands.begin(), bs.bands.begin() + 2);
  const auto small_gaps = detect_gaps(lowest_two, lowest_two[1].hi);
  const auto large = band_structure(build_cell_graph(demo_cell_spec(0.35)), kThetaGrid, 2);
  const auto large_gaps = detect_gaps(large, large.top());
  const bool both = !small_gaps.empty() && !large_gaps.empty();
  out.require(both && large_gaps[0].lo < small_gaps[0].lo, "(d) gap edge did not move down");

  // (e) brute-force equivalence on small graphs.
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dirs = 1 + trial % 2;
    const auto small_graph = oracle::random_small_cell(rng, 4 + trial % 9, dirs);
    std::vector<Complex> theta;
    for (int d = 0; d < dirs; ++d) theta.push_back(std::polar(1.0, angle(rng)));
    const auto exact = oracle::dense_floquet_spectrum(small_graph, theta);
    const auto values = theta_spectrum(small_graph, theta, exact.size());
    for (std::size_t k = 0; k < exact.size(); ++k) worst = std::max(worst, std::abs(values[k] - exact[k]));
  }
  out.require(worst <= kBruteForce, "(e) brute-force mismatch");

  const std::string gap = gaps.empty() ? std::string("none") : fmt("(%.5f, %.5f)", gaps[0].lo, gaps[0].hi);
  const std::string edges =
      both ? fmt("%.5f -> %.5f", small_gaps[0].lo, large_gaps[0].lo) : std::string("n/a");
  const std::string base =
      fmt("%zu vertices; lambda1(1)=%.1e; enclosure worst %.1e; first gap %s; bubble 0.30->0.35 lower edge %s; "
          "brute force %.1e",
          graph.size(), std::abs(ground.values[0]), enclosure.worst_violation, gap.c_str(), edges.c_str(), worst);
  out.detail = out.pass ? base : base + "; " + out.detail;
  return out;
}

Outcome criterion10() {
  Outcome out;
  auto set = [](std::vector<Interval> v) { return IntervalSet::from_unsorted(std::move(v)); };
  const std::vector<Interval> unsorted{{3, 4}, {1, 2}};
  const auto sorted = validate_gap_spec(unsorted, 3, 0.01, 50);
  out.require(sorted.targets.intervals() == std::vector<Interval>{{1, 2}, {3, 4}}, "sorting");
  const std::vector<Interval> single{{1, 2}};
  out.require(validate_gap_spec(single, 2, 0.01, 50).m() == 1, "single target");
  bool overlap = false;
  try {
    const std::vector<Interval> bad{{1, 3}, {2, 4}};
    validate_gap_spec(bad, 3, 0.01, 50);
  } catch (const Error& e) {
    overlap = e.code() == ErrorCode::OverlappingIntervals;
  }
  out.require(overlap, "overlap not rejected");

  out.require(complement_on(set({{0, 1}, {2, 10}}), 10).intervals() == std::vector<Interval>{{1, 2}}, "complement 1");
  out.require(complement_on(set({{0, 10}}), 10).empty(), "complement 2");
  out.require(complement_on(set({{0, 1}, {2, 3}}), 5).intervals() == std::vector<Interval>{{1, 2}, {3, 5}},
              "complement 3");

  out.require(hausdorff_distance(set({{0, 1}}), set({{0, 1}}), 1) == 0.0, "hausdorff 1");
  out.require(hausdorff_distance(set({{0, 1}}), set({{0, 2}}), 2) == 1.0, "hausdorff 2");
  out.require(hausdorff_distance(set({{0, 1}, {3, 4}}), set({{0, 1.5}, {3, 4}}), 4) == 0.5, "hausdorff 3");

  const std::vector<Interval> targets{{1, 2}, {3, 4}};
  const auto spec = validate_gap_spec(targets, 3, 0.01, 50);
  const auto close = gap_match_report(std::vector<Interval>{{1.001, 1.999}, {3.0, 4.0}}, spec);
  out.require(close.pass && std::abs(close.per_gap[0].edge_error - 0.002) < 1e-12 &&
                  close.per_gap[1].edge_error == 0.0,
              "match 1");
  out.require(!gap_match_report(std::vector<Interval>{{1, 2}}, spec).pass, "match 2");
  out.require(gap_match_report(std::vector<Interval>{{1, 2}, {3, 4}, {60, 70}}, spec).pass, "match 3");

  int matched = 0;
  for (const auto& [s, model] : round_trip_specs()) {
    const auto ls = limit_spectrum(model, s.horizon);
    const auto report = gap_match_report(ls.gaps, s);
    out.require(report.pass, "criterion 1 output failed to match");
    matched += report.pass ? 1 : 0;
  }
  const std::string base = fmt("13 interval examples; %d/200 round-trip specs matched at delta=%.0e", matched, kMatchDelta);
  out.detail = out.pass ? base : base + "; " + out.detail;
  return out;
}

}  // namespace

int main() {
  report(1, "design round trip", kBudget1, criterion1);
  report(2, "single-channel closed form", kBudget2, criterion2);
  report(3, "weight system vs closed form", kBudget3, criterion3);
  report(4, "dispersion structure", kBudget4, criterion4);

  Ladder ladder;
  report(5, "first cell eigenvalue tends to the resonance", kBudget5, [&] {
    ladder = build_ladder();
    return criterion5(ladder);
  });
  const bool have_ladder = !ladder.rows.empty();
  auto with_ladder = [&](Outcome (*fn)(const Ladder&)) {
    return [&, fn] {
      if (!have_ladder) return Outcome{false, "cell ladder unavailable"};
      return fn(ladder);
    };
  };
  report(6, "trial Rayleigh upper bound", 0, with_ladder(criterion6));
  report(7, "rescaled second zonal eigenvalue", 0, with_ladder(criterion7));
  report(8, "junction flux identity", 0, with_ladder(criterion8));
  report(9, "Floquet property suite on the demo cell", kBudget9, criterion9);
  report(10, "interval algebra and gap matching", 0, criterion10);

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
