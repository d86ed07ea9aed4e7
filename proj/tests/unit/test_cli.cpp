#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/config.hpp"
#include "cli/pipeline.hpp"
#include "gapforge/error.hpp"

using namespace gapforge;
using namespace gapforge::cli;
using nlohmann::json;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
}

RunConfig parse_args(std::vector<const char*> args) {
  args.insert(args.begin(), "gapforge");
  return load_config(static_cast<int>(args.size()), args.data());
}

}  // namespace

TEST_CASE("minimal design config gets defaults", "[cli]") {
  const auto cfg = config_from_json(json::parse(R"({"command":"design","intervals":[[1,2]],"n":3})"));
  validate_config(cfg);
  CHECK(cfg.delta == 0.01);
  CHECK(cfg.horizon() == 20.0);
  CHECK(cfg.resolution.annulus_nodes == RadialResolution{}.annulus_nodes);
  CHECK(cfg.spec().horizon == 20.0);
}

TEST_CASE("validation errors name the field", "[cli]") {
  const auto msg = error_of([] {
    validate_config(config_from_json(json::parse(R"({"command":"design","intervals":[[2,1]]})")));
  });
  CHECK(msg.find("intervals[0]") != std::string::npos);
  CHECK(error_of([] { config_from_json(json::parse(R"({"command":"design","intervals":[[1]]})")); })
            .find("intervals[0]") != std::string::npos);
  CHECK(error_of([] { config_from_json(json::parse(R"({"command":"design","colour":1})")); })
            .find("colour") != std::string::npos);
  CHECK(error_of([] { config_from_json(json::parse(R"({"command":"design","n":"three"})")); })
            .find("n:") != std::string::npos);
  CHECK(error_of([] {
          validate_config(config_from_json(
              json::parse(R"({"command":"convergence","intervals":[[1,2]],"eps_list":[0.1,0.2]})")));
        }).find("eps_list[1]") != std::string::npos);
}

TEST_CASE("unknown command lists the valid ones", "[cli]") {
  const auto msg = error_of([] { parse_args({"frobnicate"}); });
  for (const char* name : {"design", "dispersion", "limit-spectrum", "cell-eigs", "convergence", "bands", "verify"}) {
    CHECK(msg.find(name) != std::string::npos);
  }
}

TEST_CASE("flags override the config file", "[cli]") {
  const auto path = std::filesystem::temp_directory_path() / "gapforge_cli_test.json";
  std::ofstream(path) << R"({"command":"convergence","intervals":[[1,2]],"n":4,"theta_grid":8})";
  const auto cfg = parse_args({"--config", path.c_str(), "--intervals", "1,2;3,4", "--dim", "3",
                               "--eps-list", "0.2,0.1", "--resolution", "129", "--L", "60"});
  CHECK(cfg.command == Command::Convergence);
  CHECK(cfg.intervals.size() == 2);
  CHECK(cfg.n == 3);
  CHECK(cfg.theta_grid == 8);
  CHECK(cfg.eps_list == std::vector<double>{0.2, 0.1});
  CHECK(cfg.resolution.arc_nodes == 129);
  CHECK(cfg.horizon() == 60.0);
  CHECK(error_of([] { parse_args({"design", "--config", "/nonexistent/x.json"}); }).find("--config") !=
        std::string::npos);
}

TEST_CASE("verify passes on the analytic pipeline", "[cli]") {
  const auto cfg = parse_args({"verify", "--intervals", "1,2;3,4", "--dim", "3", "--delta", "1e-9"});
  const auto report = run_pipeline(cfg);
  CHECK(report.exit_code == kExitPass);
  CHECK(report.document.at("status") == "pass");
  const auto& model = report.document.at("model");
  CHECK(model.at("sigma")[0].get<double>() == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(model.at("mu")[1].get<double>() - 4.0) < 1e-9);
}

TEST_CASE("dispersion command emits the sign pattern", "[cli]") {
  auto cfg = config_from_json(json::parse(
      R"({"command":"dispersion","model":{"sigma":[1],"rho":[1]},"range":[0,3],"samples":31})"));
  validate_config(cfg);
  const auto report = run_pipeline(cfg);
  REQUIRE(report.exit_code == kExitPass);
  std::istringstream csv(report.table_csv);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "lambda,value,pole_adjacent");
  while (std::getline(csv, line)) {
    double lambda = 0, value = 0;
    int pole = 0;
    char comma;
    std::istringstream row(line);
    row >> lambda >> comma;
    if (line.find("nan") != std::string::npos) continue;
    row >> value >> comma >> pole;
    const bool in_gap = lambda > 1.0 && lambda < 2.0;
    CHECK((value < 0.0) == in_gap);
  }
}

TEST_CASE("cell-eigs with an unrepresentable scale fails with exit 2", "[cli]") {
  const auto cfg = parse_args({"cell-eigs", "--intervals", "1,2", "--dim", "2", "--eps-list", "0.01"});
  const auto report = run_pipeline(cfg);
  CHECK(report.exit_code == kExitError);
  CHECK(report.document.at("status") == "error");
  CHECK(report.document.at("error").at("code") == "representable_scale");
  CHECK(report.document.contains("geometry"));
}

TEST_CASE("reports are deterministic and written to the output directory", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path() / "gapforge_cli_out";
  std::filesystem::remove_all(dir);
  auto cfg = parse_args({"limit-spectrum", "--intervals", "1,2;3,4"});
  cfg.out_dir = dir.string();
  const auto a = run_pipeline(cfg);
  const auto b = run_pipeline(cfg);
  CHECK(a.document.dump() == b.document.dump());
  std::ostringstream sink;
  emit_report(cfg, a, sink);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "limit_spectrum.csv"));
  std::filesystem::remove_all(dir);
}
