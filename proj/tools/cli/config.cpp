#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli/help.hpp"
#include "gapforge/error.hpp"

namespace gapforge::cli {

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::Design, "design"},           {Command::Dispersion, "dispersion"},
    {Command::LimitSpectrum, "limit-spectrum"}, {Command::CellEigs, "cell-eigs"},
    {Command::Convergence, "convergence"}, {Command::Bands, "bands"},
    {Command::Verify, "verify"},
};

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::Config, field + ": " + what);
}

template <typename T>
T read(const nlohmann::json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(key, "has the wrong type");
  }
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      config_error(field, "cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

std::vector<Interval> parse_interval_flag(const std::string& text) {
  std::vector<Interval> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ';')) {
    const std::string field = "intervals[" + std::to_string(out.size()) + "]";
    const auto nums = parse_number_list(piece, field);
    if (nums.size() != 2) config_error(field, "expected 'lo,hi'");
    out.push_back({nums[0], nums[1]});
  }
  return out;
}

std::vector<Interval> parse_interval_json(const nlohmann::json& j) {
  if (!j.is_array()) config_error("intervals", "expected an array of [lo, hi] pairs");
  std::vector<Interval> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& item = j[k];
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
      config_error("intervals[" + std::to_string(k) + "]", "expected [lo, hi]");
    }
    out.push_back({item[0].get<double>(), item[1].get<double>()});
  }
  return out;
}

RadialResolution parse_resolution(const nlohmann::json& j) {
  RadialResolution r;
  if (j.is_number_integer()) {
    r.annulus_nodes = r.arc_nodes = j.get<int>();
  } else if (j.is_object()) {
    r.annulus_nodes = j.value("annulus_nodes", r.annulus_nodes);
    r.arc_nodes = j.value("arc_nodes", r.arc_nodes);
  } else {
    config_error("resolution", "expected an integer or {annulus_nodes, arc_nodes}");
  }
  return r;
}

}  // namespace

std::string_view command_name(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

std::string valid_commands() {
  std::string out;
  for (const auto& [cmd, name] : kCommands) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

double RunConfig::horizon() const {
  if (L) return *L;
  double top = 0.0;
  for (const auto& iv : intervals) top = std::max({top, iv.lo, iv.hi});
  return 10.0 * top;
}

GapSpec RunConfig::spec() const { return validate_gap_spec(intervals, n, delta, horizon()); }

RunConfig config_from_json(const nlohmann::json& doc, std::optional<Command> command) {
  if (!doc.is_object()) config_error("config", "expected a JSON object");
  static const std::set<std::string> kKnown = {
      "command", "intervals", "n", "delta", "L", "kappa", "model", "range", "samples",
      "eps_list", "channel", "resolution", "cell", "theta_grid", "num_bands", "checks",
      "out", "format"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.count(key)) config_error(key, "unknown configuration key");
  }
  RunConfig cfg;
  if (!command && doc.contains("command")) {
    const auto name = read<std::string>(doc, "command");
    command = parse_command(name);
    if (!command) {
      config_error("command", "unknown command '" + name + "'; valid commands: " + valid_commands());
    }
  }
  if (!command) config_error("command", "missing; valid commands: " + valid_commands());
  cfg.command = *command;

  if (doc.contains("intervals")) cfg.intervals = parse_interval_json(doc.at("intervals"));
  if (doc.contains("n")) cfg.n = read<int>(doc, "n");
  if (doc.contains("delta")) cfg.delta = read<double>(doc, "delta");
  if (doc.contains("L")) cfg.L = read<double>(doc, "L");
  if (doc.contains("kappa")) cfg.kappa = read<double>(doc, "kappa");
  if (doc.contains("model")) {
    try {
      nlohmann::json model = doc.at("model");
      if (model.is_object() && !model.contains("n")) model["n"] = cfg.n;
      cfg.model = model.get<HomogenizedModel>();
    } catch (const nlohmann::json::exception&) {
      config_error("model", "expected {sigma: [...], rho: [...]}");
    } catch (const Error& e) {
      config_error("model", e.what());
    }
  }
  if (doc.contains("range")) {
    const auto r = read<std::vector<double>>(doc, "range");
    if (r.size() != 2) config_error("range", "expected [lo, hi]");
    cfg.range = std::pair{r[0], r[1]};
  }
  if (doc.contains("samples")) cfg.samples = read<int>(doc, "samples");
  if (doc.contains("eps_list")) cfg.eps_list = read<std::vector<double>>(doc, "eps_list");
  if (doc.contains("channel")) cfg.channel = read<std::size_t>(doc, "channel");
  if (doc.contains("resolution")) cfg.resolution = parse_resolution(doc.at("resolution"));
  if (doc.contains("cell")) {
    try {
      cfg.cell = doc.at("cell").get<CellGridSpec>();
    } catch (const nlohmann::json::exception&) {
      config_error("cell", "malformed cell description");
    }
  }
  if (doc.contains("theta_grid")) cfg.theta_grid = read<int>(doc, "theta_grid");
  if (doc.contains("num_bands")) cfg.num_bands = read<std::size_t>(doc, "num_bands");
  if (doc.contains("checks")) {
    const auto& checks = doc.at("checks");
    if (!checks.is_object()) config_error("checks", "expected an object");
    for (const auto& [key, value] : checks.items()) {
      if (key != "convergence" && key != "bands") config_error("checks." + key, "unknown check");
      if (!value.is_boolean()) config_error("checks." + key, "expected true or false");
    }
    cfg.check_convergence = checks.value("convergence", false);
    cfg.check_bands = checks.value("bands", false);
  }
  if (doc.contains("out")) cfg.out_dir = read<std::string>(doc, "out");
  if (doc.contains("format")) {
    const auto f = read<std::string>(doc, "format");
    if (f == "json") {
      cfg.format = Format::Json;
    } else if (f == "csv") {
      cfg.format = Format::Csv;
    } else {
      config_error("format", "expected 'json' or 'csv'");
    }
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.n < 2 || cfg.n > 16) config_error("n", "must lie in 2..16");
  if (!(cfg.delta > 0.0)) config_error("delta", "must be positive");
  if (!(cfg.kappa > 0.0)) config_error("kappa", "must be positive");
  if (cfg.L && !(*cfg.L > 0.0)) config_error("L", "must be positive");
  if (cfg.samples < 2) config_error("samples", "must be at least 2");
  if (cfg.eps_list.empty()) config_error("eps_list", "must not be empty");
  for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
    const double e = cfg.eps_list[k];
    const std::string field = "eps_list[" + std::to_string(k) + "]";
    if (!(e > 0.0 && e <= 1.0)) config_error(field, "must lie in (0, 1]");
    if (k > 0 && !(e < cfg.eps_list[k - 1])) config_error(field, "eps_list must be decreasing");
  }
  if (cfg.resolution.annulus_nodes < kMinSegmentNodes || cfg.resolution.arc_nodes < kMinSegmentNodes) {
    config_error("resolution", "needs at least " + std::to_string(kMinSegmentNodes) + " nodes per segment");
  }
  if (cfg.theta_grid < 2) config_error("theta_grid", "must be at least 2");
  if (cfg.num_bands < 1) config_error("num_bands", "must be at least 1");
  if (cfg.range && !(cfg.range->second > cfg.range->first)) config_error("range", "must satisfy lo < hi");

  const bool needs_spec = cfg.command == Command::Design || cfg.command == Command::CellEigs ||
                          cfg.command == Command::Convergence || cfg.command == Command::Verify;
  const bool needs_model = cfg.command == Command::Dispersion || cfg.command == Command::LimitSpectrum;
  if (needs_spec && !cfg.has_spec()) config_error("intervals", "required by this command");
  if (needs_model && !cfg.has_spec() && !cfg.model) {
    config_error("intervals", "required unless an explicit model is given");
  }
  if (cfg.has_spec()) {
    const GapSpec spec = cfg.spec();  // names intervals[k] on failure
    if (cfg.channel >= spec.m()) config_error("channel", "exceeds the number of target gaps");
  }
}

RunConfig load_config(int argc, const char* const* argv) {
  CLI::App app{"Design and verify periodic manifolds with prescribed spectral gaps", "gapforge"};
  std::string command_text;
  std::optional<std::string> config_path, out_dir, format, intervals, eps_list;
  std::optional<int> dim, theta_grid, resolution;
  std::optional<std::size_t> num_bands;
  std::optional<double> L, delta;
  app.add_option("command", command_text, "One of: " + valid_commands());
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Output directory (default: stdout)");
  app.add_option("--format", format, "json or csv");
  app.add_option("--intervals", intervals, "Target gaps as \"a1,b1;a2,b2\"");
  app.add_option("--dim", dim, "Manifold dimension n");
  app.add_option("--eps-list", eps_list, "Decreasing scales, comma separated");
  app.add_option("--theta-grid", theta_grid, "Characters per lattice direction");
  app.add_option("--resolution", resolution, "Radial nodes per segment");
  app.add_option("--num-bands", num_bands, "Number of bands");
  app.add_option("--L", L, "Spectral window [0, L]");
  app.add_option("--delta", delta, "Gap edge tolerance");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::Config, std::string("command line: ") + e.what());
  }

  nlohmann::json doc = nlohmann::json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) config_error("--config", "cannot open '" + *config_path + "'");
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      config_error("--config", std::string("invalid JSON: ") + e.what());
    }
  }
  std::optional<Command> command;
  if (!command_text.empty()) {
    command = parse_command(command_text);
    if (!command) {
      config_error("command", "unknown command '" + command_text + "'; valid commands: " + valid_commands());
    }
  }
  RunConfig cfg = config_from_json(doc, command);
  if (intervals) cfg.intervals = parse_interval_flag(*intervals);
  if (dim) cfg.n = *dim;
  if (eps_list) cfg.eps_list = parse_number_list(*eps_list, "eps_list");
  if (theta_grid) cfg.theta_grid = *theta_grid;
  if (resolution) cfg.resolution.annulus_nodes = cfg.resolution.arc_nodes = *resolution;
  if (num_bands) cfg.num_bands = *num_bands;
  if (L) cfg.L = *L;
  if (delta) cfg.delta = *delta;
  if (out_dir) cfg.out_dir = *out_dir;
  if (format) {
    if (*format == "json") {
      cfg.format = Format::Json;
    } else if (*format == "csv") {
      cfg.format = Format::Csv;
    } else {
      config_error("format", "expected 'json' or 'csv'");
    }
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace gapforge::cli
