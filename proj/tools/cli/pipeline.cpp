#include "cli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gapforge/cell_graph.hpp"
#include "gapforge/cell_spectrum.hpp"
#include "gapforge/dispersion.hpp"
#include "gapforge/error.hpp"
#include "gapforge/floquet.hpp"
#include "gapforge/homogenized.hpp"

namespace gapforge::cli {

namespace {

using nlohmann::json;

struct Check {
  std::string name;
  bool pass = false;
  json detail;
};

void record_checks(Report& report, const std::vector<Check>& checks) {
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  report.document["checks"] = list;
  report.document["status"] = all ? "pass" : "fail";
  report.exit_code = all ? kExitPass : kExitChecksFailed;
}

HomogenizedModel resolve_model(const RunConfig& cfg, json& doc) {
  if (cfg.model) {
    HomogenizedModel model = *cfg.model;
    cache_mu(model);
    return model;
  }
  const Design design = design_geometry(cfg.spec(), cfg.kappa);
  doc["geometry"] = design.geometry;
  return design.model;
}

double model_top(const HomogenizedModel& model) {
  return std::max(model.mu->back(), model.sigma.back());
}

double model_horizon(const RunConfig& cfg, const HomogenizedModel& model) {
  if (cfg.L) return *cfg.L;
  if (cfg.has_spec()) return cfg.horizon();
  return 10.0 * model_top(model);
}

std::string interval_table(const LimitSpectrum& ls) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,lo,hi\n";
  for (const auto& b : ls.bands) os << "band," << b.lo << ',' << b.hi << '\n';
  for (const auto& g : ls.gaps) os << "gap," << g.lo << ',' << g.hi << '\n';
  return os.str();
}

json rayleigh_json(const RayleighBound& r) {
  return {{"numerator", r.numerator}, {"denominator", r.denominator}, {"quotient", r.quotient}};
}

std::vector<Check> convergence_checks(const std::vector<ConvergenceRow>& rows) {
  Check decreasing{"lambda1_error_decreasing", true, json::array()};
  Check bound{"rayleigh_upper_bound", true, json::array()};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double err = std::abs(rows[k].lambda1 - rows[k].sigma_target);
    decreasing.detail.push_back(err);
    if (k > 0 && !(err < std::abs(rows[k - 1].lambda1 - rows[k - 1].sigma_target))) {
      decreasing.pass = false;
    }
    bound.detail.push_back(rows[k].rayleigh_upper - rows[k].lambda1);
    if (!(rows[k].rayleigh_upper >= rows[k].lambda1)) bound.pass = false;
  }
  return {decreasing, bound};
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg, json& doc) {
  const Design design = design_geometry(cfg.spec(), cfg.kappa);
  doc["geometry"] = design.geometry;
  doc["channel"] = cfg.channel;
  doc["reference_limits"] = reference_limits(design.geometry, cfg.kappa, cfg.channel);
  auto rows = convergence_table(design.geometry, cfg.kappa, cfg.channel, cfg.eps_list, cfg.resolution);
  doc["rows"] = rows;
  return rows;
}

struct BandRun {
  BandStructure bands;
  IntervalSet gaps;
  EnclosureReport enclosure;
};

BandRun run_bands(const RunConfig& cfg, Report& report, json& doc) {
  const PeriodCellGraph graph = build_cell_graph(cfg.cell);
  doc["cell"] = cfg.cell;
  doc["vertices"] = graph.size();
  json graph_doc = graph;
  report.files.emplace_back("graph.json", graph_doc.dump(2) + "\n");

  BandRun run;
  run.bands = band_structure(graph, cfg.theta_grid, cfg.num_bands);
  const double L = cfg.L ? *cfg.L : run.bands.top();
  run.gaps = detect_gaps(run.bands, L);
  run.enclosure = nd_enclosure(graph, cfg.num_bands, run.bands);
  doc["bands"] = run.bands.bands;
  doc["gaps"] = run.gaps;
  doc["enclosure"] = run.enclosure;

  std::ostringstream csv;
  write_band_csv(csv, run.bands);
  report.table_csv = csv.str();
  report.files.emplace_back("bands.csv", report.table_csv);
  return run;
}

std::vector<Check> band_checks(const BandRun& run) {
  return {{"nd_enclosure", run.enclosure.enclosure_ok, run.enclosure.worst_violation},
          {"gap_detected", !run.gaps.empty(), run.gaps.size()}};
}

void run_command(const RunConfig& cfg, Report& report) {
  json& doc = report.document;
  switch (cfg.command) {
    case Command::Design: {
      const GapSpec spec = cfg.spec();
      doc["spec"] = spec;
      const Design design = design_geometry(spec, cfg.kappa);
      doc["geometry"] = design.geometry;
      doc["model"] = design.model;
      doc["mu"] = *design.model.mu;
      doc["status"] = "ok";
      return;
    }
    case Command::Dispersion: {
      const HomogenizedModel model = resolve_model(cfg, doc);
      doc["model"] = model;
      const auto range = cfg.range.value_or(std::pair{0.0, 1.5 * model_top(model)});
      doc["range"] = {range.first, range.second};
      doc["samples"] = cfg.samples;
      const DispersionCurve curve = sample_curve(model, range, cfg.samples);
      std::ostringstream csv;
      write_curve_csv(csv, curve);
      report.table_csv = csv.str();
      report.files.emplace_back("dispersion.csv", report.table_csv);
      doc["status"] = "ok";
      return;
    }
    case Command::LimitSpectrum: {
      const HomogenizedModel model = resolve_model(cfg, doc);
      doc["model"] = model;
      const double L = model_horizon(cfg, model);
      doc["L"] = L;
      const LimitSpectrum ls = limit_spectrum(model, L);
      doc["bands"] = ls.bands;
      doc["gaps"] = ls.gaps;
      report.table_csv = interval_table(ls);
      report.files.emplace_back("limit_spectrum.csv", report.table_csv);
      doc["status"] = "ok";
      return;
    }
    case Command::CellEigs: {
      const Design design = design_geometry(cfg.spec(), cfg.kappa);
      doc["geometry"] = design.geometry;
      doc["channel"] = cfg.channel;
      doc["cells"] = json::array();
      std::ostringstream csv;
      csv.precision(17);
      csv << "eps,lambda1,lambda2,rayleigh_upper,flux_ratio\n";
      for (double eps : cfg.eps_list) {
        const EpsGeometry geom = eps_scale(design.geometry, eps);
        const RadialCell cell = build_radial_cell(geom, cfg.channel, cfg.resolution);
        const auto lambda = radial_eigenvalues(cell, 2);
        const RayleighBound bound = trial_rayleigh(geom, cfg.channel);
        const JunctionFlux flux = junction_flux(geom, cfg.channel);
        doc["cells"].push_back({{"eps", eps},
                                {"scale", geom},
                                {"lambda", lambda},
                                {"rayleigh", rayleigh_json(bound)},
                                {"flux", flux.flux},
                                {"flux_ratio", flux.ratio}});
        csv << eps << ',' << lambda[0] << ',' << lambda[1] << ',' << bound.quotient << ','
            << flux.ratio << '\n';
      }
      report.table_csv = csv.str();
      report.files.emplace_back("cell_eigs.csv", report.table_csv);
      doc["status"] = "ok";
      return;
    }
    case Command::Convergence: {
      const auto rows = run_convergence(cfg, doc);
      std::ostringstream csv;
      write_convergence_csv(csv, rows);
      report.table_csv = csv.str();
      report.files.emplace_back("convergence.csv", report.table_csv);
      record_checks(report, convergence_checks(rows));
      return;
    }
    case Command::Bands: {
      const BandRun run = run_bands(cfg, report, doc);
      record_checks(report, band_checks(run));
      return;
    }
    case Command::Verify: {
      const GapSpec spec = cfg.spec();
      doc["spec"] = spec;
      const Design design = design_geometry(spec, cfg.kappa);
      doc["geometry"] = design.geometry;
      HomogenizedModel model = forward_model(design.geometry);
      cache_mu(model);
      doc["model"] = model;
      const LimitSpectrum ls = limit_spectrum(model, spec.horizon);
      doc["limit_gaps"] = ls.gaps;
      const MatchReport match = gap_match_report(ls.gaps, spec);
      doc["gap_match"] = match;
      std::vector<Check> checks{{"gap_match", match.pass, json::object()}};
      if (cfg.check_convergence) {
        json& sub = doc["convergence"];
        const auto rows = run_convergence(cfg, sub);
        for (auto& c : convergence_checks(rows)) checks.push_back(std::move(c));
      }
      if (cfg.check_bands) {
        json& sub = doc["floquet"];
        const BandRun run = run_bands(cfg, report, sub);
        for (auto& c : band_checks(run)) checks.push_back(std::move(c));
      }
      record_checks(report, checks);
      return;
    }
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::Config, "out: cannot write '" + path.string() + "'");
}

}  // namespace

Report run_pipeline(const RunConfig& cfg) {
  Report report;
  report.document = {{"command", std::string(command_name(cfg.command))}, {"status", "running"}};
  try {
    run_command(cfg, report);
  } catch (const Error& e) {
    report.document["status"] = "error";
    report.document["error"] = {{"code", std::string(to_string(e.code()))},
                                {"message", std::string(command_name(cfg.command)) + ": " + e.what()}};
    report.exit_code = kExitError;
  } catch (const std::exception& e) {
    report.document["status"] = "error";
    report.document["error"] = {{"code", "Internal"},
                                {"message", std::string(command_name(cfg.command)) + ": " + e.what()}};
    report.exit_code = kExitError;
  }
  return report;
}

void emit_report(const RunConfig& cfg, const Report& report, std::ostream& out) {
  const std::string body = report.document.dump(2) + "\n";
  if (!cfg.out_dir) {
    if (cfg.format == Format::Csv && !report.table_csv.empty()) {
      out << report.table_csv;
    } else {
      out << body;
    }
    return;
  }
  const std::filesystem::path dir(*cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Config, "out: cannot create '" + dir.string() + "': " + ec.message());
  write_file(dir / "report.json", body);
  for (const auto& [name, content] : report.files) write_file(dir / name, content);
}

}  // namespace gapforge::cli
