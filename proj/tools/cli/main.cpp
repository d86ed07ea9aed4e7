#include <iostream>

#include "cli/config.hpp"
#include "cli/help.hpp"
#include "cli/pipeline.hpp"
#include "gapforge/error.hpp"

int main(int argc, char** argv) {
  using namespace gapforge::cli;
  RunConfig cfg;
  try {
    cfg = load_config(argc, argv);
  } catch (const HelpRequested& help) {
    std::cout << help.text;
    return kExitPass;
  } catch (const gapforge::Error& e) {
    std::cerr << "gapforge: " << e.what() << '\n';
    return kExitError;
  }
  const Report report = run_pipeline(cfg);
  try {
    emit_report(cfg, report, std::cout);
  } catch (const gapforge::Error& e) {
    std::cerr << "gapforge: " << e.what() << '\n';
    return kExitError;
  }
  if (report.exit_code == kExitError) {
    std::cerr << "gapforge: " << report.document["error"]["message"].get<std::string>() << '\n';
  }
  return report.exit_code;
}
