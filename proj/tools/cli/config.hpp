#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapforge/cell_graph.hpp"
#include "gapforge/cell_spectrum.hpp"
#include "gapforge/homogenized.hpp"
#include "gapforge/interval_set.hpp"

namespace gapforge::cli {

enum class Command { Design, Dispersion, LimitSpectrum, CellEigs, Convergence, Bands, Verify };

enum class Format { Json, Csv };

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
/// "design, dispersion, ..." for error messages.
std::string valid_commands();

struct RunConfig {
  Command command = Command::Design;

  // Target gaps and design knobs.
  std::vector<Interval> intervals;
  int n = 3;
  double delta = 0.01;
  std::optional<double> L;  // defaults to 10 * beta_m once a spec exists
  double kappa = 0.5;

  // Explicit limit model, bypassing the design step.
  std::optional<HomogenizedModel> model;

  // Dispersion sampling.
  std::optional<std::pair<double, double>> range;
  int samples = 1001;

  // Cell eigenvalues.
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  std::size_t channel = 0;
  RadialResolution resolution;

  // Band structure.
  CellGridSpec cell = demo_cell_spec();
  int theta_grid = 16;
  std::size_t num_bands = 12;

  // Optional verify stages.
  bool check_convergence = false;
  bool check_bands = false;

  std::optional<std::string> out_dir;
  Format format = Format::Json;

  bool has_spec() const { return !intervals.empty(); }
  /// Validated spec with defaults applied; requires intervals.
  GapSpec spec() const;
  /// L if given, else 10 * beta_m.
  double horizon() const;
};

/// Parses command-line arguments (argv[0] is skipped), merging an optional
/// --config JSON file under the explicit flags. Throws Error(Config) naming
/// the offending field.
RunConfig load_config(int argc, const char* const* argv);

/// Same from an in-memory JSON document (the command is taken from the
/// "command" key unless `command` is given).
RunConfig config_from_json(const nlohmann::json& doc, std::optional<Command> command = {});

/// Checks ranges and cross-field requirements.
void validate_config(const RunConfig& cfg);

}  // namespace gapforge::cli
